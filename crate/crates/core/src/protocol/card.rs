use serde::Serialize;

use super::sim::{normalization_log2, Branching};
use crate::error::Result;
use crate::ncpoly::TensorPoly;

/// What the lab does at one chronological step for one party.
#[derive(Clone, Debug, Serialize)]
pub struct CardStep {
    /// 1-based chronological step.
    pub step: usize,
    /// 0-based position in the product-order word.
    pub word_position: usize,
    pub letters: Vec<String>,
    /// "free" (V only, no probe), "deterministic" (one probe letter) or
    /// "branch" (memory-controlled superposition of the letters).
    pub action: &'static str,
    /// Memory register index in canonical layout (party·m + step − 1).
    pub memory_index: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct PartySchedule {
    pub party: usize,
    pub summary: String,
    pub steps: Vec<CardStep>,
}

/// Memory post-selection amplitude for one basis state.
#[derive(Clone, Debug, Serialize)]
pub struct CardAmplitude {
    /// One digit per memory register in index order; digit = letter index.
    pub memory: String,
    pub words: Vec<String>,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentCard {
    pub n_parties: usize,
    pub degree: usize,
    pub var_names: Vec<String>,
    pub free_evolution_only: bool,
    pub memory_layout: String,
    pub parties: Vec<PartySchedule>,
    /// g*/‖g‖ on the memory basis states.
    pub post_selection: Vec<CardAmplitude>,
    pub coefficient_norm_sq: f64,
    pub canonical_normalization_log2: f64,
    pub compressed_normalization_log2: f64,
    pub branching_columns: usize,
}

const LAYOUT: &str = "register q = party*m + (step-1); step 1 is the first probe sent, which applies the rightmost letter of the product-order word";

pub fn experiment_card(p: &TensorPoly) -> Result<ExperimentCard> {
    let n = p.n_parties();
    let m = p.degrees().first().copied().unwrap_or(0);
    let names = p.var_names().to_vec();
    let profile = p.column_profile();
    let mut parties = Vec::with_capacity(n);
    let mut branching_columns = 0;
    for (k, cols) in profile.iter().enumerate() {
        let steps: Vec<CardStep> = (0..m)
            .map(|t| {
                let pos = m - 1 - t;
                let set = &cols[pos];
                let action = if set.len() > 1 {
                    "branch"
                } else if set.iter().all(|&l| l == 0) {
                    "free"
                } else {
                    "deterministic"
                };
                CardStep {
                    step: t + 1,
                    word_position: pos,
                    letters: set.iter().map(|&l| names[l as usize].clone()).collect(),
                    action,
                    memory_index: k * m + t,
                }
            })
            .collect();
        let branches = steps.iter().filter(|s| s.action == "branch").count();
        branching_columns += branches;
        let summary = if steps.iter().all(|s| s.action == "free") {
            "free evolution only".to_string()
        } else {
            format!("{branches} branching step(s) of {m}")
        };
        parties.push(PartySchedule { party: k, summary, steps });
    }
    let norm_sq = p.coefficient_norm_sq();
    let g = norm_sq.sqrt();
    let post_selection = p
        .terms()
        .map(|(words, c)| {
            let mut memory = String::with_capacity(n * m);
            for w in words {
                for t in 0..m {
                    let l = w.letters()[m - 1 - t];
                    memory.push(char::from_digit(l as u32, 36).unwrap_or('?'));
                }
            }
            let a = c.conj() / g;
            CardAmplitude { memory, words: words.iter().map(|w| w.display(&names)).collect(), re: a.re, im: a.im }
        })
        .collect();
    Ok(ExperimentCard {
        n_parties: n,
        degree: m,
        free_evolution_only: parties.iter().all(|s| s.summary == "free evolution only"),
        var_names: names.clone(),
        memory_layout: LAYOUT.into(),
        parties,
        post_selection,
        coefficient_norm_sq: norm_sq,
        canonical_normalization_log2: normalization_log2(&profile, names.len(), Branching::Canonical),
        compressed_normalization_log2: normalization_log2(&profile, names.len(), Branching::Compressed),
        branching_columns,
    })
}
