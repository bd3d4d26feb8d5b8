use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::generator::{sample_generator, GeneratorConfig};
use super::mps::{mps_inner, MpsVector};
use crate::error::{Error, Result};
use crate::numkit::{complex_normal, orthonormal_extend, vec_inner, RngStream};

/// Orthonormal basis of a subspace of coefficient vectors.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    pub ambient_dim: usize,
    pub vectors: Vec<Vec<C64>>,
    /// Generator draws consumed by the closure that produced this basis
    /// (0 for derived bases).
    pub closure_draws_used: u64,
    pub tol: f64,
}

impl SubspaceBasis {
    pub fn empty(ambient_dim: usize, tol: f64) -> Self {
        Self { ambient_dim, vectors: Vec::new(), closure_draws_used: 0, tol }
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate().skip(i) {
                let g = vec_inner(a, b);
                let e = if i == j { (g - 1.0).norm() } else { g.norm() };
                worst = worst.max(e);
            }
        }
        worst
    }

    /// Norm of the component of `v` orthogonal to the span.
    pub fn residual_norm(&self, v: &[C64]) -> f64 {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for b in &self.vectors {
                let c = vec_inner(b, &r);
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        crate::numkit::vec_norm(&r)
    }
}

/// Number of generator draws prepared concurrently before the ordered
/// acceptance pass.
const BATCH: u64 = 32;

/// Orthonormal basis of the span of the config's generator vectors. Draws
/// are generated concurrently but accepted strictly in draw order, and the
/// closure stops after `confirm_draws` consecutive in-span draws.
pub fn span_close(cfg: &GeneratorConfig) -> Result<SubspaceBasis> {
    cfg.validate()?;
    let amb = cfg.ambient_dim()?;
    if amb > cfg.max_ambient {
        return Err(Error::Guard(format!("ambient dimension {amb} exceeds the dense-mode limit {}", cfg.max_ambient)));
    }
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut rejected = 0usize;
    let mut next = 0u64;
    loop {
        let idx: Vec<u64> = (next..next + BATCH).collect();
        let batch = crate::par::map_slice(&idx, |&i| sample_generator(cfg, i));
        for (i, v) in idx.iter().zip(batch) {
            let v = v?;
            let accepted =
                if crate::numkit::vec_norm(&v) == 0.0 { None } else { orthonormal_extend(&basis, &v, cfg.tol)? };
            match accepted {
                Some(u) => {
                    basis.push(u);
                    rejected = 0;
                }
                None => rejected += 1,
            }
            if rejected >= cfg.confirm_draws {
                return Ok(SubspaceBasis { ambient_dim: amb, vectors: basis, closure_draws_used: i + 1, tol: cfg.tol });
            }
        }
        next += BATCH;
    }
}

/// Dimension-only closure in MPS form: the span is tracked through the Gram
/// matrix of accepted MPS vectors (incremental Cholesky), never densely.
#[derive(Clone, Debug, Serialize)]
pub struct MpsClosure {
    pub dim: usize,
    pub draws_used: u64,
    pub tol: f64,
}

/// Default relative tolerance for the Gram-based rank decision.
pub const MPS_TOL: f64 = 1e-6;

pub fn span_close_mps(cfg: &GeneratorConfig, tol: f64) -> Result<MpsClosure> {
    cfg.validate()?;
    let mut accepted: Vec<MpsVector> = Vec::new();
    // Lower-triangular Cholesky factor of the Gram matrix, row by row.
    let mut chol: Vec<Vec<C64>> = Vec::new();
    let mut rejected = 0usize;
    let mut i = 0u64;
    loop {
        let v = MpsVector::sample(cfg, i)?;
        i += 1;
        let vv = mps_inner(&v, &v)?.re;
        if vv <= 0.0 {
            rejected += 1;
        } else {
            let g = crate::par::map_slice(&accepted, |b| mps_inner(b, &v));
            let g: Vec<C64> = g.into_iter().collect::<Result<_>>()?;
            // Forward substitution L y = g.
            let mut y = vec![C64::new(0.0, 0.0); g.len()];
            for r in 0..g.len() {
                let s: C64 = (0..r).map(|c| chol[r][c] * y[c]).sum();
                y[r] = (g[r] - s) / chol[r][r];
            }
            let res2 = vv - y.iter().map(|z| z.norm_sqr()).sum::<f64>();
            if res2 > tol * tol * vv {
                let mut row: Vec<C64> = y.iter().map(|z| z.conj()).collect();
                row.push(C64::new(res2.sqrt(), 0.0));
                chol.push(row);
                accepted.push(v);
                rejected = 0;
            } else {
                rejected += 1;
            }
        }
        if rejected >= cfg.confirm_draws {
            return Ok(MpsClosure { dim: accepted.len(), draws_used: i, tol });
        }
    }
}

/// Basis of {v ∈ span(nperp) : v ⊥ span(vperp)}: the coefficient vectors
/// representing V/N. Computed from the Hermitian matrix C†C with
/// C = Q_V·Q_N†; its eigenvalues are squared cosines of principal angles,
/// and eigenvectors with eigenvalue below 1/2 span the quotient.
pub fn quotient_swap_space(nperp: &SubspaceBasis, vperp: &SubspaceBasis) -> Result<SubspaceBasis> {
    if nperp.ambient_dim != vperp.ambient_dim {
        return Err(Error::Shape("bases live in different ambient spaces".into()));
    }
    let kn = nperp.dim();
    let kv = vperp.dim();
    if kn == 0 {
        return Ok(SubspaceBasis::empty(nperp.ambient_dim, nperp.tol));
    }
    let rows: Vec<Vec<C64>> =
        crate::par::map_slice(&vperp.vectors, |a| nperp.vectors.iter().map(|b| vec_inner(a, b)).collect());
    let c = DMatrix::from_fn(kv, kn, |i, j| rows[i][j]);
    let g = c.adjoint() * &c;
    let eig = g.symmetric_eigen();
    let mut vectors = Vec::new();
    for (col, lambda) in eig.eigenvalues.iter().enumerate() {
        if *lambda < 0.5 {
            let u = eig.eigenvectors.column(col);
            let mut v = vec![C64::new(0.0, 0.0); nperp.ambient_dim];
            for (j, b) in nperp.vectors.iter().enumerate() {
                let cj = u[j];
                for (x, y) in v.iter_mut().zip(b) {
                    *x += cj * y;
                }
            }
            vectors.push(v);
        }
    }
    Ok(SubspaceBasis { ambient_dim: nperp.ambient_dim, vectors, closure_draws_used: 0, tol: nperp.tol })
}

/// Orthonormal basis of the orthogonal complement of `basis`, from
/// projected random vectors (seeded, hence deterministic).
pub fn orthocomplement(basis: &SubspaceBasis, seed: u64) -> Result<SubspaceBasis> {
    let amb = basis.ambient_dim;
    let want = amb.saturating_sub(basis.dim());
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(want);
    let mut rng = RngStream::named(seed, "orthocomplement");
    let mut attempts = 0;
    while out.len() < want {
        attempts += 1;
        if attempts > want + 64 {
            return Err(Error::Degenerate(format!("complement stalled at {} of {want} vectors", out.len())));
        }
        let g: Vec<C64> = (0..amb).map(|_| complex_normal(&mut rng)).collect();
        let mut r = g;
        for _ in 0..2 {
            let coefs = crate::par::map_slice(&basis.vectors, |b| vec_inner(b, &r));
            for (b, c) in basis.vectors.iter().zip(&coefs) {
                for (x, y) in r.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        if let Some(u) = orthonormal_extend(&out, &r, 1e-6)? {
            out.push(u);
        }
    }
    Ok(SubspaceBasis { ambient_dim: amb, vectors: out, closure_draws_used: 0, tol: basis.tol })
}
