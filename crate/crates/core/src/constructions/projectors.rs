//! Symbolic projector and permutation polynomials.
//!
//! With Zᵢ = Σ_k c_{ik} X_k⊗X_k (which commute with SWAP), a central
//! polynomial G for dimension d(d+1)/2 gives G̃ = G(Z) ∝ Π_S, since it is
//! central on the symmetric block and vanishes on the smaller antisymmetric
//! one. Sandwiching G̃ between P = Y_a⊗Y_b − Y_b⊗Y_a (which swaps the blocks)
//! and applying a central polynomial H for dimension d(d−1)/2 gives H̃ ∝ Π_A.
//! After padding G̃ to deg H̃, K = G̃+H̃ = αΠ_S + βΠ_A, and for a central F
//! on dimension d² with Qᵢ = T_{2i−1}⊗T_{2i},
//! F̃ = F(KQ₁K, …) = K·M·K with M the word-wise interleaving of F with K².
//! Then S̃ = G̃·M·G̃ = fΠ_S and Ã = H̃·M·H̃ = fΠ_A share the scalar f.

use num_complex::Complex64 as C64;
use rand::Rng;

use super::central::{central_filler, formanek_central, pad_central, CentralPoly};
use crate::error::{Error, Result};
use crate::ncpoly::{Letter, PolyExpr, ScaledMatrix, TensorPoly, Word};
use crate::numkit::{
    antisymmetric_projector, compose_perm, ginibre, haar_unitary, permutation_operator, proportionality_fit,
    swap_matrix, symmetric_projector, ComplexMatrix, RngStream,
};

const RETRY_BUDGET: usize = 16;
const CERTIFY_DRAWS: usize = 4;
const CERTIFY_TOL: f64 = 1e-8;

/// Symbolic polynomials ∝ Π_S, Π_A and SWAP with one shared scalar.
#[derive(Clone, Debug)]
pub struct PermutationPolyBundle {
    pub sym: PolyExpr,
    pub antisym: PolyExpr,
    pub swap: PolyExpr,
    /// sym + antisym, ∝ I.
    pub identity: PolyExpr,
    /// G̃ before padding, ∝ Π_S.
    pub g_tilde: PolyExpr,
    /// H̃, ∝ Π_A.
    pub h_tilde: PolyExpr,
    pub degree: usize,
    pub d: usize,
}

impl PermutationPolyBundle {
    pub fn var_names(&self) -> &[String] {
        self.swap.var_names()
    }

    /// Random assignment of the bundle's variables.
    pub fn random_assignment(&self, rng: &mut RngStream, haar: bool) -> Vec<ComplexMatrix> {
        (0..self.swap.n_vars())
            .map(|_| if haar { haar_unitary(self.d, rng) } else { ginibre(self.d, self.d, rng) })
            .collect()
    }
}

/// Result of checking `value ∝ target` on scale-tracked matrices.
#[derive(Clone, Copy, Debug)]
pub struct ScaledFit {
    /// Relative residual ‖a − c·b‖/‖a‖.
    pub relative: f64,
    /// log₂|c|.
    pub log2_abs: f64,
    /// c/|c|.
    pub phase: C64,
}

pub fn scaled_fit(a: &ScaledMatrix, target: &ComplexMatrix) -> Result<ScaledFit> {
    if a.is_zero() {
        return Ok(ScaledFit { relative: 0.0, log2_abs: f64::NEG_INFINITY, phase: C64::new(0.0, 0.0) });
    }
    let fit = proportionality_fit(a.mantissa(), target)?;
    let n = fit.scalar.norm();
    Ok(ScaledFit {
        relative: fit.relative,
        log2_abs: a.exponent() + n.log2(),
        phase: if n == 0.0 { C64::new(0.0, 0.0) } else { fit.scalar / n },
    })
}

impl ScaledFit {
    /// Relative distance between two fitted scalars.
    pub fn scalar_distance(&self, other: &ScaledFit) -> f64 {
        let ratio = (other.log2_abs - self.log2_abs).exp2();
        (self.phase - other.phase * ratio).norm()
    }
}

fn names_for(q: usize, n_y: usize, n_t: usize) -> Vec<String> {
    let mut v: Vec<String> = (1..=q).map(|i| format!("X{i}")).collect();
    v.extend((1..=n_y).map(|i| format!("Y{i}")));
    v.extend((1..=n_t).map(|i| format!("T{i}")));
    v
}

fn two_party(names: &[String], terms: &[(C64, Letter, Letter)]) -> Result<PolyExpr> {
    let t = terms.iter().map(|&(c, a, b)| (c, vec![Word::letter(a), Word::letter(b)]));
    Ok(PolyExpr::leaf(TensorPoly::from_terms(names.to_vec(), 2, t)?))
}

/// Central polynomial for `dim`; the 1-dimensional case is H(Z) = Z, which
/// is trivially central on scalars.
fn central_for(dim: usize) -> Result<CentralPoly> {
    if dim == 1 {
        let p = TensorPoly::from_strs(&["Z"], &[(1.0, "Z")])?;
        return CentralPoly::certify(p, 1);
    }
    formanek_central(dim)
}

/// Builds the bundle for dimension `d` from a seeded stream; random
/// coefficient choices are redrawn (up to 16 times) when G̃ or H̃ vanish.
pub fn swap_poly_symbolic(d: usize, seed: u64) -> Result<PermutationPolyBundle> {
    if d < 2 {
        return Err(Error::Invalid("swap_poly_symbolic needs d ≥ 2".into()));
    }
    let dim_s = d * (d + 1) / 2;
    let dim_a = d * (d - 1) / 2;
    let outer_dim = d * d;
    for (label, dim) in [("symmetric", dim_s), ("antisymmetric", dim_a), ("outer", outer_dim)] {
        if dim > super::central::FORMANEK_MAX_DIM {
            return Err(Error::Guard(format!(
                "d={d} needs a central polynomial for the {label} dimension {dim}, above the default size guard"
            )));
        }
    }
    let mut rng = RngStream::named(seed, "swap-poly-symbolic");
    let mut last_err = None;
    for _ in 0..RETRY_BUDGET {
        match try_build(d, dim_s, dim_a, outer_dim, &mut rng) {
            Ok(b) => return Ok(b),
            Err(e @ Error::Degenerate(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::Degenerate("retry budget exhausted".into())))
}

fn try_build(
    d: usize,
    dim_s: usize,
    dim_a: usize,
    outer_dim: usize,
    rng: &mut RngStream,
) -> Result<PermutationPolyBundle> {
    let g = central_for(dim_s)?;
    let h = central_for(dim_a)?;
    let f = central_for(outer_dim)?;
    let q = g.poly().n_vars();
    let n_y = 2;
    let n_t = 2 * f.poly().n_vars();
    let names = names_for(q, n_y, n_t);
    let x = |i: usize| i as Letter;
    let y = |i: usize| (q + i) as Letter;
    let t = |i: usize| (q + n_y + i) as Letter;

    // Zᵢ = Σ_k c_ik X_k⊗X_k.
    let coeffs = ginibre(q, q, rng);
    let zs: Vec<PolyExpr> = (0..q)
        .map(|i| two_party(&names, &(0..q).map(|k| (coeffs[(i, k)], x(k), x(k))).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let g_tilde = PolyExpr::compose(g.poly().clone(), zs.clone())?;

    // Sandwiches P G̃ P' with P = Y_a⊗Y_b − Y_b⊗Y_a; random signs/weights per H variable.
    let p_ab = two_party(&names, &[(C64::new(1.0, 0.0), y(0), y(1)), (C64::new(-1.0, 0.0), y(1), y(0))])?;
    let h_args: Vec<PolyExpr> = (0..h.poly().n_vars())
        .map(|_| {
            let r = C64::new(rng.random_range(0.5..1.5), rng.random_range(-0.5..0.5));
            Ok(PolyExpr::scalar(r, PolyExpr::product(vec![p_ab.clone(), g_tilde.clone(), p_ab.clone()])?))
        })
        .collect::<Result<_>>()?;
    let h_tilde = PolyExpr::compose(h.poly().clone(), h_args)?;

    let deg_g = g_tilde.degrees()[0];
    let deg_h = h_tilde.degrees()[0];
    if deg_h < deg_g {
        return Err(Error::Homogeneity(format!("deg H̃ = {deg_h} below deg G̃ = {deg_g}")));
    }
    let g_pad = pad_central(&g, deg_h - deg_g)?;
    let g_padded = PolyExpr::compose(g_pad.poly().clone(), zs)?;
    let k_expr = PolyExpr::sum(vec![g_padded.clone(), h_tilde.clone()])?;

    // M: every word a₁a₂…a_m of F becomes Q_{a₁} K K Q_{a₂} K K … Q_{a_m}.
    let nq = f.poly().n_vars();
    let k_letter = nq as Letter;
    let mut outer_names: Vec<String> = (1..=nq).map(|i| format!("Q{i}")).collect();
    outer_names.push("K".into());
    let mut mb = TensorPoly::builder(outer_names, 1);
    for (w, c) in f.poly().terms() {
        let mut letters = Vec::with_capacity(3 * w[0].len());
        for (i, &l) in w[0].letters().iter().enumerate() {
            if i > 0 {
                letters.extend([k_letter, k_letter]);
            }
            letters.push(l);
        }
        mb.add(*c, vec![Word::new(letters)])?;
    }
    let m_outer = mb.finish()?;
    let mut m_args: Vec<PolyExpr> =
        (0..nq).map(|i| two_party(&names, &[(C64::new(1.0, 0.0), t(2 * i), t(2 * i + 1))])).collect::<Result<_>>()?;
    m_args.push(k_expr);
    let m = PolyExpr::compose(m_outer, m_args)?;

    let sym = PolyExpr::product(vec![g_padded.clone(), m.clone(), g_padded])?;
    let antisym = PolyExpr::product(vec![h_tilde.clone(), m.clone(), h_tilde.clone()])?;
    let swap = PolyExpr::sum(vec![sym.clone(), PolyExpr::scalar(C64::new(-1.0, 0.0), antisym.clone())])?;
    let identity = PolyExpr::sum(vec![sym.clone(), antisym.clone()])?;
    let degree = sym.degrees()[0];
    let bundle = PermutationPolyBundle { sym, antisym, swap, identity, g_tilde, h_tilde, degree, d };
    certify_bundle(&bundle, rng)?;
    Ok(bundle)
}

/// Per-draw measurements of the bundle's proportionality claims.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BundleCheck {
    pub g_sym_residual: f64,
    pub h_antisym_residual: f64,
    pub identity_residual: f64,
    pub swap_residual: f64,
    /// Relative mismatch between the I- and SWAP-scalars.
    pub shared_scalar_mismatch: f64,
    /// ‖S̃·Ã‖ relative to ‖S̃‖‖Ã‖.
    pub orthogonality: f64,
    pub log2_scalar: f64,
}

impl BundleCheck {
    pub fn worst(&self) -> f64 {
        [
            self.g_sym_residual,
            self.h_antisym_residual,
            self.identity_residual,
            self.swap_residual,
            self.shared_scalar_mismatch,
            self.orthogonality,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

pub fn check_bundle(b: &PermutationPolyBundle, xs: &[ComplexMatrix]) -> Result<BundleCheck> {
    check_with(b, |e| e.evaluate_scaled(xs))
}

/// As [`check_bundle`] with double-double evaluation; the S̃ block comes out
/// of heavy cancellation at some draws and f64 cannot resolve it there.
pub fn check_bundle_extended(b: &PermutationPolyBundle, xs: &[ComplexMatrix]) -> Result<BundleCheck> {
    check_with(b, |e| e.evaluate_extended(xs))
}

fn check_with(b: &PermutationPolyBundle, eval: impl Fn(&PolyExpr) -> Result<ScaledMatrix>) -> Result<BundleCheck> {
    let d = b.d;
    let g = eval(&b.g_tilde)?;
    let h = eval(&b.h_tilde)?;
    let s = eval(&b.sym)?;
    let a = eval(&b.antisym)?;
    let id = eval(&b.identity)?;
    let sw = eval(&b.swap)?;
    let fg = scaled_fit(&g, &symmetric_projector(d))?;
    let fh = scaled_fit(&h, &antisymmetric_projector(d))?;
    let fi = scaled_fit(&id, &ComplexMatrix::identity(d * d))?;
    let fs = scaled_fit(&sw, &swap_matrix(d))?;
    if [fg.log2_abs, fh.log2_abs, fi.log2_abs].iter().any(|x| !x.is_finite()) {
        return Err(Error::Degenerate("G̃, H̃ or F̃ vanished at this draw".into()));
    }
    let prod = s.mantissa().matmul(a.mantissa());
    let orth = prod.norm() / (s.mantissa().norm() * a.mantissa().norm()).max(f64::MIN_POSITIVE);
    Ok(BundleCheck {
        g_sym_residual: fg.relative,
        h_antisym_residual: fh.relative,
        identity_residual: fi.relative,
        swap_residual: fs.relative,
        shared_scalar_mismatch: fi.scalar_distance(&fs),
        orthogonality: orth,
        log2_scalar: fi.log2_abs,
    })
}

fn certify_bundle(b: &PermutationPolyBundle, rng: &mut RngStream) -> Result<()> {
    for i in 0..CERTIFY_DRAWS {
        let xs = b.random_assignment(rng, true);
        let c = check_bundle(b, &xs)?;
        if c.worst() > CERTIFY_TOL {
            return Err(Error::Certification(format!("draw {i}: bundle check failed: {c:?}")));
        }
    }
    Ok(())
}

/// Transpositions t₀,…,t_{n−2} (possibly trivial, tₖ = (k,k)) with
/// π = t₀∘t₁∘…∘t_{n−2}, from σ₀ = π, tₖ = (k, σₖ(k)), σ_{k+1} = tₖ∘σₖ.
pub fn transposition_chain(perm: &[usize]) -> Vec<(usize, usize)> {
    let n = perm.len();
    let mut sigma = perm.to_vec();
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    for k in 0..n.saturating_sub(1) {
        let a = sigma[k];
        out.push((k, a));
        let mut t: Vec<usize> = (0..n).collect();
        t.swap(k, a);
        sigma = compose_perm(&t, &sigma);
    }
    out
}

/// n-party polynomial ∝ permutation_operator(n, d, perm): the product of
/// bundle factors P^{(k,a)} along the transposition chain, where a swap
/// factor S̃−Ã sits on (k,a) for a ≠ k and an identity factor S̃+Ã sits on
/// (k,k+1) for a = k. Bystanders carry a central filler of equal degree.
pub fn perm_poly(n: usize, d: usize, perm: &[usize], base: &PermutationPolyBundle) -> Result<PolyExpr> {
    if base.d != d {
        return Err(Error::Invalid(format!("bundle is for d={}, asked for d={d}", base.d)));
    }
    if n < 2 {
        return Err(Error::Invalid("perm_poly needs n ≥ 2".into()));
    }
    permutation_operator(n, 1, perm)?;
    let filler = if n > 2 { Some(central_filler(d, base.degree, base.var_names(), 0, 1)?) } else { None };
    let mut factors = Vec::new();
    for (k, a) in transposition_chain(perm) {
        let (child, targets) = if a == k { (&base.identity, [k, k + 1]) } else { (&base.swap, [k, a]) };
        if n == 2 && targets == [0, 1] {
            factors.push(child.clone());
        } else {
            factors.push(PolyExpr::tensor_embed(child.clone(), n, &targets, filler.clone())?);
        }
    }
    PolyExpr::product(factors)
}

/// Convenience: bundle's scalar-free evaluation target for tests.
pub fn perm_target(n: usize, d: usize, perm: &[usize]) -> Result<ComplexMatrix> {
    permutation_operator(n, d, perm)
}
