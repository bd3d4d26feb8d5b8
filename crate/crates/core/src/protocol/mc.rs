use serde::Serialize;

use super::model::{derive_vw, ModelSource};
use super::sim::{run_program, ProtocolProgram, Segment};
use crate::error::{Error, Result};
use crate::ncpoly::ScaledMatrix;
use crate::numkit::{ginibre, haar_unitary, kron_all, random_state, vec_norm, ComplexMatrix, RngStream, StateVector};
use crate::par::map_range;

/// Distribution over assignments of the program's letters.
#[derive(Clone, Debug)]
pub enum Sampler {
    /// Independent Haar unitaries for every letter.
    Haar { d: usize },
    /// Independent Ginibre matrices for every letter.
    Ginibre { d: usize },
    /// (V, W) derived from a (possibly random) Hamiltonian model.
    Model(ModelSource),
}

impl Sampler {
    pub fn d(&self) -> usize {
        match self {
            Sampler::Haar { d } | Sampler::Ginibre { d } => *d,
            Sampler::Model(m) => m.d(),
        }
    }

    pub fn descriptor(&self) -> String {
        match self {
            Sampler::Haar { d } => format!("haar(d={d})"),
            Sampler::Ginibre { d } => format!("ginibre(d={d})"),
            Sampler::Model(ModelSource::Fixed(m)) => format!("model(fixed, d={}, d_probe={})", m.d, m.d_probe),
            Sampler::Model(ModelSource::Random(s)) => format!("model(random, d={}, d_probe={})", s.d, s.d_probe),
        }
    }

    pub fn sample(&self, n_vars: usize, rng: &mut RngStream) -> Result<Vec<ComplexMatrix>> {
        match self {
            Sampler::Haar { d } => Ok((0..n_vars).map(|_| haar_unitary(*d, rng)).collect()),
            Sampler::Ginibre { d } => Ok((0..n_vars).map(|_| ginibre(*d, *d, rng)).collect()),
            Sampler::Model(src) => {
                if n_vars != 2 {
                    return Err(Error::Invalid(format!(
                        "model sampler provides V, W only, program has {n_vars} letters"
                    )));
                }
                let (v, w) = derive_vw(&src.draw(rng))?;
                Ok(vec![v, w])
            }
        }
    }
}

/// Which initial state each trial uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiPolicy {
    /// |0…0⟩ when the program operator is proportional to a unitary (the
    /// probability then does not depend on ψ), otherwise a Haar-random ψ.
    #[default]
    Auto,
    Random,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuccessEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
    pub sampler: String,
    pub normalization_log2: f64,
    /// Trials whose final state vanished.
    pub zero_trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_trial: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct MonteCarloOptions {
    pub trials: usize,
    pub seed: u64,
    pub psi: PsiPolicy,
    pub keep_trials: bool,
}

impl MonteCarloOptions {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self { trials, seed, psi: PsiPolicy::Auto, keep_trials: false }
    }

    pub fn keep_trials(mut self) -> Self {
        self.keep_trials = true;
        self
    }
}

/// Product of the segment operators (later segments on the left).
pub fn program_operator(prog: &ProtocolProgram, assignment: &[ComplexMatrix]) -> Result<ScaledMatrix> {
    let d = assignment.first().map(|x| x.rows()).ok_or_else(|| Error::Invalid("empty assignment".into()))?;
    let dim = d.pow(prog.n_parties as u32);
    let mut acc = ScaledMatrix::new(ComplexMatrix::identity(dim), 0.0);
    for seg in &prog.segments {
        let m = match seg {
            Segment::Poly { poly, .. } => poly.evaluate_scaled(assignment)?,
            Segment::Free { steps } => {
                let vs = assignment[0].pow(*steps);
                ScaledMatrix::new(kron_all(std::iter::repeat_n(&vs, prog.n_parties)), 0.0)
            }
        };
        acc = ScaledMatrix::new(m.mantissa().matmul(acc.mantissa()), m.exponent() + acc.exponent());
        let n = acc.mantissa().max_abs();
        if n == 0.0 {
            return Ok(acc);
        }
        acc = ScaledMatrix::new(acc.mantissa().scale_real(1.0 / n), acc.exponent() + n.log2());
    }
    Ok(acc)
}

fn proportional_to_unitary(m: &ScaledMatrix) -> bool {
    let a = m.mantissa();
    let g = a.adjoint().matmul(a);
    let n = g.rows();
    let c = g.trace().re / n as f64;
    if c <= 0.0 {
        return false;
    }
    let dev = (&g - &ComplexMatrix::identity(n).scale_real(c)).max_abs();
    dev <= 1e-9 * c
}

fn one_trial(prog: &ProtocolProgram, sampler: &Sampler, psi: PsiPolicy, rng: &mut RngStream) -> Result<f64> {
    let xs = sampler.sample(prog.var_names.len(), rng)?;
    let dim = sampler.d().pow(prog.n_parties as u32);
    if psi == PsiPolicy::Random {
        return Ok(run_program(prog, &xs, &random_state(dim, rng))?.prob);
    }
    let op = program_operator(prog, &xs)?;
    if op.is_zero() {
        return Ok(0.0);
    }
    let state = if proportional_to_unitary(&op) { StateVector::basis(dim, 0) } else { random_state(dim, rng) };
    let v = op.mantissa().mul_vec(state.amplitudes());
    let log2_prob = 2.0 * (vec_norm(&v).log2() + op.exponent()) - prog.normalization_log2();
    Ok(log2_prob.exp2())
}

/// Average success probability over `trials` sampled assignments. Trial i
/// draws from the child stream ("trial", i) of the root seed, so results do
/// not depend on the thread count.
pub fn monte_carlo(prog: &ProtocolProgram, sampler: &Sampler, opts: &MonteCarloOptions) -> Result<SuccessEstimate> {
    if opts.trials == 0 {
        return Err(Error::Invalid("trials must be at least 1".into()));
    }
    let root = RngStream::named(opts.seed, "monte_carlo");
    let outcomes: Vec<Result<f64>> = map_range(opts.trials, |i| {
        let mut rng = root.child("trial", i as u64);
        one_trial(prog, sampler, opts.psi, &mut rng)
    });
    let probs = outcomes.into_iter().collect::<Result<Vec<f64>>>()?;
    let n = probs.len() as f64;
    let mean = probs.iter().sum::<f64>() / n;
    let var = if probs.len() > 1 { probs.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Ok(SuccessEstimate {
        mean,
        stderr: (var / n).sqrt(),
        trials: probs.len(),
        sampler: sampler.descriptor(),
        normalization_log2: prog.normalization_log2(),
        zero_trials: probs.iter().filter(|&&p| p == 0.0).count(),
        per_trial: opts.keep_trials.then_some(probs),
    })
}
