//! Sparse representatives of a quotient class v + N.
//!
//! Both the target space and the null space are closed under complex
//! conjugation of coefficients, so real representatives exist. For a real
//! direction q = Re(e^{iθ}v) the search minimizes ‖x‖₁ subject to
//! x − q ∈ span_R(N), written as Bᵀx = Bᵀq with B an orthonormal basis of
//! the real complement of N. The LP support is then cleaned by a
//! least-squares re-solve on that support and the result is re-verified by
//! evaluation.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::closure::SubspaceBasis;
use super::generator::poly_from_coefficients;
use crate::error::{Error, Result};
use crate::ncpoly::TensorPoly;
use crate::numkit::{ginibre, haar_unitary, proportionality_fit, ComplexMatrix, RngStream};

#[derive(Clone, Debug)]
pub struct SparsifyOptions {
    pub target: ComplexMatrix,
    pub d: usize,
    pub n_parties: usize,
    pub m: usize,
    pub var_names: Vec<String>,
    /// Desired maximum number of nonzero terms.
    pub budget: usize,
    /// Number of real directions tried.
    pub directions: usize,
    pub verify_draws: usize,
    pub verify_tol: f64,
    pub seed: u64,
}

impl SparsifyOptions {
    pub fn new(target: ComplexMatrix, d: usize, n_parties: usize, m: usize, var_names: Vec<String>) -> Self {
        Self {
            target,
            d,
            n_parties,
            m,
            var_names,
            budget: usize::MAX,
            directions: 20,
            verify_draws: 20,
            verify_tol: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SparsifyResult {
    pub poly: TensorPoly,
    pub terms: usize,
    pub within_budget: bool,
    pub verification: Verification,
    /// Directions that produced a verified polynomial.
    pub verified_directions: usize,
}

/// Worst-case proportionality check over random draws.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Verification {
    pub draws: usize,
    pub passes: usize,
    pub worst_relative: f64,
    pub min_abs_scalar: f64,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.passes == self.draws
    }
}

/// Checks `p(X) ∝ target` on `draws` assignments (alternating Haar and
/// Ginibre); a draw passes when the relative residual is ≤ `tol` and the
/// fitted scalar is nonzero.
pub fn verify_proportional(
    p: &TensorPoly,
    target: &ComplexMatrix,
    d: usize,
    draws: usize,
    tol: f64,
    rng: &mut RngStream,
) -> Result<Verification> {
    let mut v = Verification { draws, passes: 0, worst_relative: 0.0, min_abs_scalar: f64::INFINITY };
    for i in 0..draws {
        let xs: Vec<ComplexMatrix> =
            (0..p.n_vars()).map(|_| if i % 2 == 0 { haar_unitary(d, rng) } else { ginibre(d, d, rng) }).collect();
        let val = p.evaluate(&xs)?;
        let fit = proportionality_fit(&val, target)?;
        v.worst_relative = v.worst_relative.max(fit.relative);
        v.min_abs_scalar = v.min_abs_scalar.min(fit.scalar.norm());
        if fit.relative <= tol && val.norm() > 1e-10 * term_bound(p, &xs) {
            v.passes += 1;
        }
    }
    Ok(v)
}

/// Σ|g|·∏‖X‖ over terms: the triangle-inequality scale of an evaluation.
pub(crate) fn term_bound(p: &TensorPoly, xs: &[ComplexMatrix]) -> f64 {
    let norms: Vec<f64> = xs.iter().map(|x| x.norm()).collect();
    p.terms()
        .map(|(words, c)| {
            c.norm() * words.iter().flat_map(|w| w.letters()).map(|&l| norms[l as usize]).product::<f64>()
        })
        .sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Adds `v` to a real orthonormal set if its residual exceeds `tol`·‖v‖.
fn real_extend(basis: &mut Vec<Vec<f64>>, mut v: Vec<f64>, tol: f64) {
    let n0 = dot(&v, &v).sqrt();
    if n0 == 0.0 {
        return;
    }
    for _ in 0..2 {
        for b in basis.iter() {
            let c = dot(b, &v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
    let n = dot(&v, &v).sqrt();
    if n > tol * n0 {
        v.iter_mut().for_each(|x| *x /= n);
        basis.push(v);
    }
}

/// Orthonormal basis of span_R{Re b, Im b : b ∈ basis}.
fn real_span(basis: &SubspaceBasis) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for b in &basis.vectors {
        real_extend(&mut out, b.iter().map(|z| z.re).collect(), 1e-8);
        real_extend(&mut out, b.iter().map(|z| z.im).collect(), 1e-8);
    }
    out
}

/// Orthonormal basis of the real orthogonal complement of `span`.
fn real_complement(span: &[Vec<f64>], amb: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
    let want = amb - span.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(want);
    let mut guard = 0;
    while out.len() < want && guard < want + 64 {
        guard += 1;
        let mut g: Vec<f64> = (0..amb).map(|_| rng.sample(StandardNormal)).collect();
        for _ in 0..2 {
            let coefs = crate::par::map_slice(span, |b| dot(b, &g));
            for (b, c) in span.iter().zip(coefs) {
                g.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        real_extend(&mut out, g, 1e-6);
    }
    out
}

/// min ‖x‖₁ subject to Bᵀx ∈ span{c_j} and wᵀx = 1. Returns None if the
/// solver fails.
fn l1_solve(rows: &[Vec<f64>], class: &[Vec<f64>], w: &[f64], amb: usize) -> Option<Vec<f64>> {
    let mut p = Problem::new(OptimizationDirection::Minimize);
    let plus: Vec<_> = (0..amb).map(|_| p.add_var(1.0, (0.0, f64::INFINITY))).collect();
    let minus: Vec<_> = (0..amb).map(|_| p.add_var(1.0, (0.0, f64::INFINITY))).collect();
    let a: Vec<_> = class.iter().map(|_| p.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY))).collect();
    let push = |terms: &mut Vec<_>, i: usize, c: f64| {
        if c.abs() > 1e-14 {
            terms.push((plus[i], c));
            terms.push((minus[i], -c));
        }
    };
    for (r, row) in rows.iter().enumerate() {
        let mut terms = Vec::with_capacity(2 * amb + a.len());
        for (i, &c) in row.iter().enumerate() {
            push(&mut terms, i, c);
        }
        for (aj, cj) in a.iter().zip(class) {
            terms.push((*aj, -cj[r]));
        }
        p.add_constraint(terms.as_slice(), ComparisonOp::Eq, 0.0);
    }
    let mut terms = Vec::with_capacity(2 * amb);
    for (i, &c) in w.iter().enumerate() {
        push(&mut terms, i, c);
    }
    p.add_constraint(terms.as_slice(), ComparisonOp::Eq, 1.0);
    let microlp::SolveOutcome::Solution(sol) = p.solve().ok()? else {
        return None;
    };
    Some((0..amb).map(|i| sol[plus[i]] - sol[minus[i]]).collect())
}

/// Least-squares cleanup on a fixed support: the smallest correction that
/// puts Bᵀx back into span{c_j} (the class coordinates, orthonormal).
fn resolve_on_support(rows: &[Vec<f64>], class: &[Vec<f64>], x: &[f64], support: &[usize]) -> Vec<f64> {
    let r = rows.len();
    let bs = DMatrix::from_fn(r, support.len(), |i, c| rows[i][support[c]]);
    let mut proj = DMatrix::<f64>::identity(r, r);
    for c in class {
        let v = DVector::from_column_slice(c);
        proj -= &v * v.transpose();
    }
    let a = proj * bs;
    let xs = DVector::from_iterator(support.len(), support.iter().map(|&i| x[i]));
    let e = &a * &xs;
    let delta = a.svd(true, true).solve(&e, 1e-12).unwrap_or_else(|_| DVector::zeros(support.len()));
    let mut out = vec![0.0; x.len()];
    for (k, &i) in support.iter().enumerate() {
        out[i] = xs[k] - delta[k];
    }
    out
}

/// Real coordinates Bᵀ(Re u), Bᵀ(Im u) of the class vectors, orthonormalized.
fn class_coordinates(rows: &[Vec<f64>], class: &[Vec<C64>]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for u in class {
        for part in [u.iter().map(|z| z.re).collect::<Vec<f64>>(), u.iter().map(|z| z.im).collect()] {
            let c: Vec<f64> = crate::par::map_slice(rows, |b| dot(b, &part));
            real_extend(&mut out, c, 1e-8);
        }
    }
    out
}

/// Searches for a sparse polynomial in the class of `v` modulo the span of
/// `null_basis` (up to an overall scalar). With an empty null basis, `v`
/// itself is returned (scaled).
pub fn sparsify(v: &[C64], null_basis: &SubspaceBasis, opts: &SparsifyOptions) -> Result<SparsifyResult> {
    sparsify_span(std::slice::from_ref(&v.to_vec()), null_basis, opts)
}

/// As [`sparsify`], but the representative may come from any class in the
/// span of `quotient`; each direction fixes a random normalization inside
/// that span.
pub fn sparsify_quotient(
    quotient: &SubspaceBasis,
    null_basis: &SubspaceBasis,
    opts: &SparsifyOptions,
) -> Result<SparsifyResult> {
    if quotient.dim() == 0 {
        return Err(Error::Invalid("empty quotient: nothing to sparsify".into()));
    }
    sparsify_span(&quotient.vectors, null_basis, opts)
}

fn sparsify_span(class: &[Vec<C64>], null_basis: &SubspaceBasis, opts: &SparsifyOptions) -> Result<SparsifyResult> {
    let amb = null_basis.ambient_dim;
    if let Some(u) = class.iter().find(|u| u.len() != amb) {
        return Err(Error::Shape(format!("vector length {} vs ambient {amb}", u.len())));
    }
    let mut rng = RngStream::named(opts.seed, "sparsify");
    let finish = |poly: TensorPoly, rng: &mut RngStream, verified_directions| -> Result<SparsifyResult> {
        let verification = verify_proportional(&poly, &opts.target, opts.d, opts.verify_draws, opts.verify_tol, rng)?;
        let terms = poly.term_count();
        Ok(SparsifyResult { poly, terms, within_budget: terms <= opts.budget, verification, verified_directions })
    };
    if null_basis.dim() == 0 && class.len() == 1 {
        let v = &class[0];
        let vmax = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if vmax == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let scaled: Vec<C64> = v.iter().map(|z| z / vmax).collect();
        let poly = poly_from_coefficients(&scaled, opts.var_names.clone(), opts.n_parties, opts.m, 1e-12)?;
        return finish(poly, &mut rng, 0);
    }
    let n_real = real_span(null_basis);
    let rows = real_complement(&n_real, amb, &mut rng);
    let coords = class_coordinates(&rows, class);
    if coords.is_empty() {
        return Err(Error::ZeroNorm);
    }
    let mut best: Option<(usize, TensorPoly)> = None;
    let mut verified = 0;
    for _ in 0..opts.directions {
        let alpha: Vec<f64> = coords.iter().map(|_| rng.sample(StandardNormal)).collect();
        let z: Vec<f64> = (0..rows.len()).map(|r| coords.iter().zip(&alpha).map(|(c, a)| a * c[r]).sum()).collect();
        let w: Vec<f64> = (0..amb).map(|i| rows.iter().zip(&z).map(|(b, zr)| b[i] * zr).sum()).collect();
        let Some(x) = l1_solve(&rows, &coords, &w, amb) else { continue };
        let xmax = x.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if xmax == 0.0 {
            continue;
        }
        let support: Vec<usize> = (0..amb).filter(|&i| x[i].abs() > 1e-7 * xmax).collect();
        let x = resolve_on_support(&rows, &coords, &x, &support);
        let xmax = x.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let coeffs: Vec<C64> = x.iter().map(|&r| C64::new(r / xmax, 0.0)).collect();
        let poly = match poly_from_coefficients(&coeffs, opts.var_names.clone(), opts.n_parties, opts.m, 1e-9) {
            Ok(p) => p,
            Err(_) => continue,
        };
        let check = verify_proportional(&poly, &opts.target, opts.d, opts.verify_draws, opts.verify_tol, &mut rng)?;
        if !check.passed() {
            continue;
        }
        verified += 1;
        if best.as_ref().is_none_or(|(t, _)| poly.term_count() < *t) {
            best = Some((poly.term_count(), poly));
        }
        if best.as_ref().is_some_and(|(t, _)| *t <= opts.budget) {
            break;
        }
    }
    match best {
        Some((_, poly)) => finish(poly, &mut rng, verified),
        None => Err(Error::Degenerate("no direction produced a verified sparse representative".into())),
    }
}
