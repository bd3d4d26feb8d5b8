use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numkit::{orthonormal_extend, permutation_operator, vec_inner, ComplexMatrix};

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// Upper bound C(2m + Dd² − 1, Dd² − 1)·d² on dim(N⊥) for the two-party
/// search.
pub fn dim_bound(m: usize, n_vars: usize, d: usize) -> Result<u128> {
    let overflow = || Error::Overflow(format!("dim_bound({m}, {n_vars}, {d}) overflows"));
    let d2 = (d as u128).checked_mul(d as u128).ok_or_else(overflow)?;
    let k = (n_vars as u128).checked_mul(d2).ok_or_else(overflow)?;
    if k == 0 {
        return Ok(0);
    }
    let n = (2 * m as u128).checked_add(k - 1).ok_or_else(overflow)?;
    binomial(n, k - 1).and_then(|b| b.checked_mul(d2)).ok_or_else(overflow)
}

/// ‖mat − Π(mat)‖/‖mat‖ where Π projects (Frobenius) onto
/// span{P_π : π ∈ Sₙ}. Returns 0 for the zero matrix.
pub fn perm_span_residual(mat: &ComplexMatrix, n: usize, d: usize) -> Result<f64> {
    let dim = d.pow(n as u32);
    if mat.shape() != (dim, dim) {
        return Err(Error::Shape(format!("expected {dim}×{dim}, got {:?}", mat.shape())));
    }
    let norm = mat.norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for perm in permutations(n) {
        let p = permutation_operator(n, d, &perm)?;
        if let Some(u) = orthonormal_extend(&basis, p.data(), 1e-10)? {
            basis.push(u);
        }
    }
    let mut r = mat.data().to_vec();
    for _ in 0..2 {
        for b in &basis {
            let c = vec_inner(b, &r);
            for (x, y) in r.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    Ok(crate::numkit::vec_norm(&r) / norm)
}

/// All permutations of 0..n in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_values() {
        assert_eq!(dim_bound(1, 1, 1).unwrap(), 1);
        assert_eq!(dim_bound(5, 2, 2).unwrap(), 77792);
        assert!(dim_bound(10_000_000, 1000, 1000).is_err());
    }

    #[test]
    fn perm_residuals() {
        let s = crate::numkit::swap_matrix(2).scale_real(3.0);
        assert!(perm_span_residual(&s, 2, 2).unwrap() < 1e-14);
        let mut e = ComplexMatrix::zeros(4, 4);
        e[(0, 0)] = C64::new(1.0, 0.0);
        assert!(perm_span_residual(&e, 2, 2).unwrap() > 0.1);
        assert_eq!(permutations(3).len(), 6);
    }
}
