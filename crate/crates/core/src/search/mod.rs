//! Randomized discovery of polynomials proportional to a target operator.
//!
//! For random matrices X, and vectors L, R, the generator vector with
//! entries ⟨L|T·X_w|R⟩ (T·target ∝ I) is orthogonal to every coefficient
//! vector g whose polynomial evaluates to a multiple of the target, provided
//! ⟨L|R⟩ = 0; without that constraint it is orthogonal exactly to the
//! polynomials that vanish identically. Closing the spans of both families
//! gives V⊥ ⊆ N⊥, and N⊥ ⊖ V⊥ represents the quotient V/N.

mod bounds;
mod closure;
mod generator;
mod mps;
mod sparsify;

pub use bounds::{dim_bound, perm_span_residual, permutations};
pub use closure::{
    orthocomplement, quotient_swap_space, span_close, span_close_mps, MpsClosure, SubspaceBasis, MPS_TOL,
};
pub use generator::{
    coefficient_index, coefficient_words, coefficients_from_poly, default_var_names, generator_vector,
    poly_from_coefficients, sample_generator, tuple_letters, GeneratorConfig, GeneratorDraw, DEFAULT_CONFIRM,
    DEFAULT_MAX_AMBIENT, DEFAULT_TOL,
};
pub use mps::{mps_inner, MpsVector};
pub use sparsify::{sparsify, sparsify_quotient, verify_proportional, SparsifyOptions, SparsifyResult, Verification};

use serde::Serialize;

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Dense,
    Mps,
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct SearchDims {
    pub vperp: usize,
    pub nperp: usize,
    pub quotient: usize,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SearchDraws {
    pub vperp: u64,
    pub nperp: u64,
}

/// Summary of one search, as written to `report.json`.
#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub d: usize,
    pub n_vars: usize,
    pub m: usize,
    pub n_parties: usize,
    pub mode: SearchMode,
    pub dims: SearchDims,
    /// Upper bound on dim(N⊥) (two-party searches only).
    pub bound: Option<String>,
    pub ambient: usize,
    pub draws: SearchDraws,
    pub seed: u64,
    pub tol: f64,
}

/// Dense-mode result with the bases themselves.
#[derive(Clone, Debug)]
pub struct DenseSearch {
    pub vperp: SubspaceBasis,
    pub nperp: SubspaceBasis,
    pub quotient: SubspaceBasis,
    pub report: SearchReport,
}

impl DenseSearch {
    /// Quotient basis vectors as polynomials.
    pub fn quotient_polys(&self, cfg: &GeneratorConfig) -> Result<Vec<crate::ncpoly::TensorPoly>> {
        self.quotient
            .vectors
            .iter()
            .map(|v| poly_from_coefficients(v, cfg.var_names(), cfg.n_parties, cfg.m, 1e-12))
            .collect()
    }
}

fn bound_for(cfg: &GeneratorConfig) -> Option<String> {
    (cfg.n_parties == 2)
        .then(|| dim_bound(cfg.m, cfg.n_vars, cfg.d).map(|b| b.to_string()).unwrap_or("overflow".into()))
}

/// Closes V⊥ and N⊥ densely and extracts the quotient.
pub fn search_dense(cfg: &GeneratorConfig) -> Result<DenseSearch> {
    let vperp = span_close(&cfg.clone().with_orthogonal_lr(true))?;
    let nperp = span_close(&cfg.clone().with_orthogonal_lr(false))?;
    let quotient = quotient_swap_space(&nperp, &vperp)?;
    let report = SearchReport {
        d: cfg.d,
        n_vars: cfg.n_vars,
        m: cfg.m,
        n_parties: cfg.n_parties,
        mode: SearchMode::Dense,
        dims: SearchDims { vperp: vperp.dim(), nperp: nperp.dim(), quotient: quotient.dim() },
        bound: bound_for(cfg),
        ambient: nperp.ambient_dim,
        draws: SearchDraws { vperp: vperp.closure_draws_used, nperp: nperp.closure_draws_used },
        seed: cfg.seed,
        tol: cfg.tol,
    };
    Ok(DenseSearch { vperp, nperp, quotient, report })
}

/// Dimension-only search in MPS form; the quotient dimension is
/// dim N⊥ − dim V⊥ since V⊥ ⊆ N⊥.
pub fn search_mps(cfg: &GeneratorConfig, tol: f64) -> Result<SearchReport> {
    let v = span_close_mps(&cfg.clone().with_orthogonal_lr(true), tol)?;
    let n = span_close_mps(&cfg.clone().with_orthogonal_lr(false), tol)?;
    Ok(SearchReport {
        d: cfg.d,
        n_vars: cfg.n_vars,
        m: cfg.m,
        n_parties: cfg.n_parties,
        mode: SearchMode::Mps,
        dims: SearchDims { vperp: v.dim, nperp: n.dim, quotient: n.dim.saturating_sub(v.dim) },
        bound: bound_for(cfg),
        ambient: cfg.ambient_dim().unwrap_or(usize::MAX),
        draws: SearchDraws { vperp: v.draws_used, nperp: n.draws_used },
        seed: cfg.seed,
        tol,
    })
}
