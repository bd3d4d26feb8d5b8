use num_complex::Complex64 as C64;
use serde::Serialize;

use super::matrix::ComplexMatrix;
use super::state::{vec_inner, vec_norm};
use crate::error::{Error, Result};

const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] =
    [17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0, 2162160.0, 110880.0, 3960.0, 90.0, 1.0];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
// 1-norm thresholds for orders 3, 5, 7, 9, 13 (double precision).
const THETA: [f64; 5] =
    [1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1, 2.097847961257068e0, 5.371920351148152e0];

/// Matrix exponential by scaling and squaring with a diagonal Padé approximant.
pub fn expm(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::Shape(format!("expm needs a square matrix, got {}x{}", m.rows(), m.cols())));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(m.clone());
    }
    let norm = m.norm_one();
    let low: [&[f64]; 4] = [&PADE3, &PADE5, &PADE7, &PADE9];
    for (coeffs, theta) in low.iter().zip(THETA) {
        if norm <= theta {
            return pade_low(m, coeffs);
        }
    }
    let s = if norm > THETA[4] { (norm / THETA[4]).log2().ceil().max(0.0) as i32 } else { 0 };
    let a = m.scale_real(0.5f64.powi(s));
    let mut x = pade13(&a)?;
    for _ in 0..s {
        x = x.matmul(&x);
    }
    Ok(x)
}

fn pade_low(a: &ComplexMatrix, b: &[f64]) -> Result<ComplexMatrix> {
    let n = a.rows();
    let a2 = a.matmul(a);
    let mut odd = ComplexMatrix::identity(n).scale_real(b[1]);
    let mut even = ComplexMatrix::identity(n).scale_real(b[0]);
    let mut p = ComplexMatrix::identity(n);
    for k in 1..b.len() / 2 {
        p = p.matmul(&a2);
        odd.axpy(C64::new(b[2 * k + 1], 0.0), &p);
        even.axpy(C64::new(b[2 * k], 0.0), &p);
    }
    let u = a.matmul(&odd);
    pade_solve(&even, &u)
}

fn pade13(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let b = PADE13;
    let n = a.rows();
    let id = ComplexMatrix::identity(n);
    let a2 = a.matmul(a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let lin = |terms: &[(f64, &ComplexMatrix)]| {
        let mut acc = ComplexMatrix::zeros(n, n);
        for (c, m) in terms {
            acc.axpy(C64::new(*c, 0.0), m);
        }
        acc
    };
    let u_inner = a6.matmul(&lin(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)]));
    let u = a.matmul(&(&u_inner + &lin(&[(b[7], &a6), (b[5], &a4), (b[3], &a2), (b[1], &id)])));
    let v_inner = a6.matmul(&lin(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)]));
    let v = &v_inner + &lin(&[(b[6], &a6), (b[4], &a4), (b[2], &a2), (b[0], &id)]);
    pade_solve(&v, &u)
}

/// Solves (V − U) X = V + U.
fn pade_solve(v: &ComplexMatrix, u: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve(&(v - u), &(v + u))
}

/// Solves A X = B by LU with partial pivoting.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(Error::Shape("solve needs square A with matching rows in B".into()));
    }
    let lu = a.to_nalgebra().lu();
    let x = lu.solve(&b.to_nalgebra()).ok_or_else(|| Error::Singular("LU solve hit a zero pivot".into()))?;
    Ok(ComplexMatrix::from_nalgebra(&x))
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve(a, &ComplexMatrix::identity(a.rows()))
}

pub fn determinant(a: &ComplexMatrix) -> Result<C64> {
    if !a.is_square() {
        return Err(Error::Shape("determinant of a non-square matrix".into()));
    }
    Ok(a.to_nalgebra().determinant())
}

/// Gram–Schmidt step with one re-orthogonalization pass. Returns the unit
/// residual if `‖residual‖ > tol·‖v‖`, otherwise `None` (v is in the span).
pub fn orthonormal_extend<B: AsRef<[C64]> + Sync>(basis: &[B], v: &[C64], tol: f64) -> Result<Option<Vec<C64>>> {
    let vn = vec_norm(v);
    if vn == 0.0 || !vn.is_finite() {
        return Err(Error::ZeroNorm);
    }
    if basis.len() >= v.len() {
        return Ok(None);
    }
    let mut r = v.to_vec();
    for _ in 0..2 {
        let coefs = crate::par::map_slice(basis, |b| vec_inner(b.as_ref(), &r));
        for (b, c) in basis.iter().zip(&coefs) {
            for (ri, bi) in r.iter_mut().zip(b.as_ref()) {
                *ri -= c * bi;
            }
        }
    }
    let rn = vec_norm(&r);
    if rn <= tol * vn {
        return Ok(None);
    }
    for x in r.iter_mut() {
        *x /= rn;
    }
    Ok(Some(r))
}

/// Least-squares fit a ≈ c·b.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Proportionality {
    pub scalar: C64,
    /// ‖a − c·b‖.
    pub residual: f64,
    /// ‖a − c·b‖ / ‖a‖ (0 when a = 0). Scale-free distance of a from the ray of b.
    pub relative: f64,
    /// Both inputs were exactly zero.
    pub degenerate: bool,
}

/// Unconditional least-squares fit of `a ≈ c·b`.
pub fn proportionality_fit(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Proportionality> {
    if a.shape() != b.shape() {
        return Err(Error::Shape(format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    let na = a.norm();
    let nb = b.norm();
    if nb == 0.0 {
        return Ok(Proportionality {
            scalar: C64::new(0.0, 0.0),
            residual: na,
            relative: if na == 0.0 { 0.0 } else { 1.0 },
            degenerate: na == 0.0,
        });
    }
    let c = b.inner(a) / (nb * nb);
    let residual = a.data().iter().zip(b.data()).map(|(x, y)| (x - c * y).norm_sqr()).sum::<f64>().sqrt();
    let relative = if na == 0.0 { 0.0 } else { residual / na };
    Ok(Proportionality { scalar: c, residual, relative, degenerate: false })
}

/// Returns the fit if `‖a − c·b‖ ≤ tol·max(‖a‖, ‖b‖)`. Two zero matrices
/// give `c = 0` with the degenerate flag set.
pub fn proportionality(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> Result<Option<Proportionality>> {
    let fit = proportionality_fit(a, b)?;
    if fit.degenerate {
        return Ok(Some(fit));
    }
    if b.norm() == 0.0 {
        return Ok(None);
    }
    let scale = a.norm().max(b.norm());
    Ok((fit.residual <= tol * scale).then_some(fit))
}

fn check_permutation(perm: &[usize]) -> Result<()> {
    let n = perm.len();
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Operator that moves tensor factor k to slot perm[k] (0-based), so that
/// `P_π P_σ = P_{π∘σ}`.
pub fn permutation_operator(n: usize, d: usize, perm: &[usize]) -> Result<ComplexMatrix> {
    if perm.len() != n {
        return Err(Error::InvalidPermutation(format!("expected {n} entries, got {}", perm.len())));
    }
    check_permutation(perm)?;
    let dim = d.checked_pow(n as u32).ok_or_else(|| Error::Overflow("d^n".into()))?;
    let mut out = ComplexMatrix::zeros(dim, dim);
    let mut digits = vec![0usize; n];
    let mut moved = vec![0usize; n];
    for col in 0..dim {
        let mut x = col;
        for k in (0..n).rev() {
            digits[k] = x % d;
            x /= d;
        }
        for k in 0..n {
            moved[perm[k]] = digits[k];
        }
        let row = moved.iter().fold(0, |acc, &i| acc * d + i);
        out[(row, col)] = C64::new(1.0, 0.0);
    }
    Ok(out)
}

/// Composition (π∘σ)(k) = π(σ(k)).
pub fn compose_perm(pi: &[usize], sigma: &[usize]) -> Vec<usize> {
    sigma.iter().map(|&k| pi[k]).collect()
}

pub fn swap_matrix(d: usize) -> ComplexMatrix {
    permutation_operator(2, d, &[1, 0]).expect("valid transposition")
}

pub fn symmetric_projector(d: usize) -> ComplexMatrix {
    (&ComplexMatrix::identity(d * d) + &swap_matrix(d)).scale_real(0.5)
}

pub fn antisymmetric_projector(d: usize) -> ComplexMatrix {
    (&ComplexMatrix::identity(d * d) - &swap_matrix(d)).scale_real(0.5)
}

/// Γ̃ = Σ_i |i⟩⟨i⊕1|.
pub fn cyclic_shift(d: usize) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        g[(i, (i + 1) % d)] = C64::new(1.0, 0.0);
    }
    g
}

/// Checks ∏_{j=1}^{d−1} Γ̃^j y Γ̃^{−j} = det(y)·y^{−1} for diagonal invertible y,
/// relative to ‖det(y)·y^{−1}‖.
pub fn gamma_conjugation_check(d: usize, y: &ComplexMatrix, tol: f64) -> Result<bool> {
    if y.shape() != (d, d) {
        return Err(Error::Shape(format!("expected {d}x{d} diagonal matrix")));
    }
    if !y.is_diagonal(0.0) {
        return Err(Error::Invalid("y must be diagonal".into()));
    }
    if (0..d).any(|i| y[(i, i)] == C64::new(0.0, 0.0)) {
        return Err(Error::Singular("diagonal y has a zero entry".into()));
    }
    let g = cyclic_shift(d);
    let g_inv = g.adjoint();
    let mut lhs = ComplexMatrix::identity(d);
    let mut conj = y.clone();
    for _ in 1..d {
        conj = g.matmul(&conj).matmul(&g_inv);
        lhs = lhs.matmul(&conj);
    }
    let det: C64 = (0..d).map(|i| y[(i, i)]).product();
    let rhs = ComplexMatrix::diag(&(0..d).map(|i| det / y[(i, i)]).collect::<Vec<_>>());
    Ok((&lhs - &rhs).norm() <= tol * rhs.norm())
}
