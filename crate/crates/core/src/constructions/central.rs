use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::ncpoly::{names, Letter, TensorPoly, Word};
use crate::numkit::{haar_unitary, proportionality_fit, ComplexMatrix, RngStream};

/// Seed of the private stream used for construction-time certification.
const CERTIFY_SEED: u64 = 0x7e3c_0a1d_2024_0001;
const CERTIFY_SAMPLES: usize = 20;
const VANISH_SAMPLES: usize = 5;
const CERTIFY_TOL: f64 = 1e-9;

/// Largest dimension `formanek_central` builds without an explicit override.
pub const FORMANEK_MAX_DIM: usize = 4;

/// A single-party polynomial certified to evaluate to a scalar multiple of
/// the identity on random `target_dim`×`target_dim` inputs and to vanish on
/// every smaller dimension.
#[derive(Clone, Debug)]
pub struct CentralPoly {
    poly: TensorPoly,
    target_dim: usize,
    linear_vars: Vec<Letter>,
}

impl CentralPoly {
    /// Runs the numerical certification and wraps `poly` on success.
    pub fn certify(poly: TensorPoly, target_dim: usize) -> Result<Self> {
        if poly.n_parties() != 1 {
            return Err(Error::Invalid("central polynomials are single-party".into()));
        }
        let mut rng = RngStream::named(CERTIFY_SEED, "central-certify");
        let n_vars = poly.n_vars();
        let scale: f64 = poly.terms().map(|(_, c)| c.norm()).sum();
        let mut max_scalar = 0f64;
        for i in 0..CERTIFY_SAMPLES {
            let xs: Vec<ComplexMatrix> = (0..n_vars).map(|_| haar_unitary(target_dim, &mut rng)).collect();
            let val = poly.evaluate(&xs)?;
            let fit = proportionality_fit(&val, &ComplexMatrix::identity(target_dim))?;
            if fit.residual > CERTIFY_TOL * val.norm().max(scale * 1e-6) {
                return Err(Error::Certification(format!(
                    "sample {i}: not proportional to the identity at dimension {target_dim} (relative residual {:.3e})",
                    fit.relative
                )));
            }
            max_scalar = max_scalar.max(fit.scalar.norm());
        }
        if max_scalar <= CERTIFY_TOL * scale {
            return Err(Error::Certification(format!(
                "vanishes on all {CERTIFY_SAMPLES} samples at dimension {target_dim}"
            )));
        }
        for dim in 1..target_dim {
            for i in 0..VANISH_SAMPLES {
                let xs: Vec<ComplexMatrix> = (0..n_vars).map(|_| haar_unitary(dim, &mut rng)).collect();
                let val = poly.evaluate(&xs)?;
                if val.norm() > CERTIFY_TOL * scale {
                    return Err(Error::Certification(format!(
                        "sample {i}: nonzero (norm {:.3e}) at dimension {dim} < {target_dim}",
                        val.norm()
                    )));
                }
            }
        }
        let linear_vars = poly.linear_vars();
        Ok(Self { poly, target_dim, linear_vars })
    }

    pub fn poly(&self) -> &TensorPoly {
        &self.poly
    }

    pub fn into_poly(self) -> TensorPoly {
        self.poly
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn linear_vars(&self) -> &[Letter] {
        &self.linear_vars
    }

    pub fn degree(&self) -> usize {
        self.poly.degrees()[0]
    }
}

/// `[A,B]²`: the square of a traceless 2×2 matrix is a multiple of I.
pub fn qubit_central() -> Result<CentralPoly> {
    let p = TensorPoly::from_strs(&["A", "B"], &[(1.0, "ABAB"), (-1.0, "ABBA"), (-1.0, "BAAB"), (1.0, "BABA")])?;
    CentralPoly::certify(p, 2)
}

/// Commutative auxiliary polynomial
/// g(t₁,…,t_{d+1}) = ∏_{i=2}^{d} (t₁−tᵢ)(t_{d+1}−tᵢ) · ∏_{2≤i<j≤d} (tᵢ−tⱼ)²
/// as a map from exponent vectors to integer coefficients.
fn formanek_g(d: usize) -> BTreeMap<Vec<u32>, i64> {
    let nv = d + 1;
    let mut factors: Vec<(usize, usize)> = Vec::new();
    for i in 1..d {
        factors.push((0, i));
        factors.push((d, i));
    }
    for i in 1..d {
        for j in i + 1..d {
            factors.push((i, j));
            factors.push((i, j));
        }
    }
    let mut poly: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
    poly.insert(vec![0; nv], 1);
    for (a, b) in factors {
        let mut next: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
        for (e, c) in &poly {
            let mut ea = e.clone();
            ea[a] += 1;
            *next.entry(ea).or_insert(0) += c;
            let mut eb = e.clone();
            eb[b] += 1;
            *next.entry(eb).or_insert(0) -= c;
        }
        next.retain(|_, c| *c != 0);
        poly = next;
    }
    poly
}

/// Central polynomial for dimension `d` of degree d², linear in Y₁…Y_d,
/// from the classical eigenvalue-difference recipe: each monomial
/// t₁^{e₁}⋯t_{d+1}^{e_{d+1}} of g becomes Σ_σ X^{e₁} Y_{σ(1)} X^{e₂} ⋯ Y_{σ(d)} X^{e_{d+1}}
/// summed over the d cyclic shifts σ of (Y₁,…,Y_d). The result is certified
/// numerically; the recipe itself is not trusted.
pub fn formanek_central(d: usize) -> Result<CentralPoly> {
    if d > FORMANEK_MAX_DIM {
        return Err(Error::Guard(format!(
            "formanek_central({d}) exceeds the default size guard (d ≤ {FORMANEK_MAX_DIM}); use formanek_central_unguarded"
        )));
    }
    formanek_central_unguarded(d)
}

pub fn formanek_central_unguarded(d: usize) -> Result<CentralPoly> {
    if d < 2 {
        return Err(Error::Invalid("formanek_central needs d ≥ 2".into()));
    }
    let mut var_names = vec!["X".to_string()];
    var_names.extend((1..=d).map(|i| format!("Y{i}")));
    let mut b = TensorPoly::builder(var_names, 1);
    for (e, c) in formanek_g(d) {
        for shift in 0..d {
            let mut letters: Vec<Letter> = Vec::with_capacity(d * d);
            for i in 0..d {
                letters.extend(std::iter::repeat_n(0, e[i] as usize));
                letters.push((1 + (i + shift) % d) as Letter);
            }
            letters.extend(std::iter::repeat_n(0, e[d] as usize));
            b.add(C64::new(c as f64, 0.0), vec![Word::new(letters)])?;
        }
    }
    let p = b.finish().map_err(|_| Error::ZeroPolynomial(format!("Formanek recipe for d={d} cancelled to zero")))?;
    CentralPoly::certify(p, d)
}

/// Raises the degree by `extra` through U → U^{extra+1} on a certified
/// linear variable U; the result is re-certified.
pub fn pad_central(c: &CentralPoly, extra: usize) -> Result<CentralPoly> {
    if extra == 0 {
        return Ok(c.clone());
    }
    let &u = c
        .linear_vars
        .last()
        .ok_or_else(|| Error::Invalid("no certified linear variable available for padding".into()))?;
    let p = c.poly.substitute(u, &Word::power(u, extra + 1))?;
    CentralPoly::certify(p, c.target_dim)
}

/// A central polynomial for dimension `d` of exactly `degree` in the two
/// letters `a` and `b` of `var_names`: Formanek's F_d with X → a,
/// Yᵢ → b·a^{kᵢ}, where kᵢ = i−1 for i < d and the last Y absorbs the
/// remaining degree. Used to pad bystander parties. Certified nonzero.
pub fn central_filler(d: usize, degree: usize, var_names: &[String], a: Letter, b: Letter) -> Result<TensorPoly> {
    let base = formanek_central(d)?;
    let mut ks: Vec<usize> = (0..d - 1).collect();
    let used = d * d + ks.iter().sum::<usize>();
    if degree < used {
        return Err(Error::Invalid(format!("central filler for d={d} needs degree ≥ {used}, asked for {degree}")));
    }
    ks.push(degree - used);
    let n = var_names.len();
    let mut out = TensorPoly::builder(var_names.to_vec(), 1);
    for (w, c) in base.poly().terms() {
        let mut letters = Vec::with_capacity(degree);
        for &l in w[0].letters() {
            if l == 0 {
                letters.push(a);
            } else {
                letters.push(b);
                letters.extend(std::iter::repeat_n(a, ks[l as usize - 1]));
            }
        }
        out.add(*c, vec![Word::new(letters)])?;
    }
    let p = out.finish()?;
    debug_assert!(n >= 2);
    // Certify on the two active letters only; the other variables are absent.
    let active =
        p.relabel(&(0..n as Letter).map(|l| if l == b { 1 } else { 0 }).collect::<Vec<_>>(), names(&["a", "b"]))?;
    CentralPoly::certify(active, d)?;
    Ok(p)
}
