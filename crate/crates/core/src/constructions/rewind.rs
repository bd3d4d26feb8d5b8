use num_complex::Complex64 as C64;

use super::central::formanek_central;
use crate::error::{Error, Result};
use crate::ncpoly::{vw_names, Letter, TensorPoly, Word};

/// R_d(V, W₁,…,W_d) with R_d·V^s ∝ I: substitute Yᵢ → Wᵢ V^s into the
/// central F_d(V, Y₁,…,Y_d) and strip the trailing V^s that every word then
/// carries. Degree s(d−1)+d²; coefficients scaled to unit norm.
pub fn rewind_poly(d: usize, s: usize) -> Result<TensorPoly> {
    let f = formanek_central(d)?;
    let mut var_names = vec!["V".to_string()];
    var_names.extend((1..=d).map(|i| format!("W{i}")));
    let mut p = f.poly().renamed(var_names)?;
    for i in 1..=d {
        let mut rep = vec![i as Letter];
        rep.extend(std::iter::repeat_n(0, s));
        p = p.substitute(i as Letter, &Word::new(rep))?;
    }
    let r = p.strip_suffix(0, s)?;
    let expected = s * (d - 1) + d * d;
    if r.degrees()[0] != expected {
        return Err(Error::Homogeneity(format!("rewind degree {} ≠ {expected}", r.degrees()[0])));
    }
    r.normalized()
}

/// The d = 2 rewinder in a single probe letter: R₂ with W₁ = W₂ = W.
pub fn rewind_poly_vw(d: usize, s: usize) -> Result<TensorPoly> {
    let r = rewind_poly(d, s)?;
    let map: Vec<Letter> = (0..=d).map(|i| if i == 0 { 0 } else { 1 }).collect();
    r.relabel(&map, vw_names())?.normalized()
}

/// `[W,V]` with unit-norm coefficients, (WV − VW)/√2.
pub fn commutator_step() -> TensorPoly {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    TensorPoly::from_strs(&["V", "W"], &[(h, "WV"), (-h, "VW")]).expect("valid commutator")
}

/// `[W,V] V^s [W,V]` ∝ V^{−s} for 2×2 inputs, degree 4+s, coefficients ±1/2.
pub fn qubit_rewind(s: usize) -> Result<TensorPoly> {
    let c = commutator_step();
    let vs = TensorPoly::monomial(vw_names(), vec![Word::power(0, s)], C64::new(1.0, 0.0))?;
    c.mul(&vs)?.mul(&c)
}

/// Which rewinder to use for a given number of rewound steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rewinder {
    /// `[W,V]V^s[W,V]` (d = 2 only).
    Qubit,
    /// Formanek-based R_d with a single probe letter W (all Wᵢ identified).
    Formanek { d: usize },
}

impl Rewinder {
    pub fn default_for(d: usize) -> Self {
        if d == 2 {
            Rewinder::Qubit
        } else {
            Rewinder::Formanek { d }
        }
    }

    pub fn build(&self, s: usize) -> Result<TensorPoly> {
        match *self {
            Rewinder::Qubit => qubit_rewind(s),
            Rewinder::Formanek { d } => rewind_poly_vw(d, s),
        }
    }

    /// Degree of the rewinder for `s` steps.
    pub fn degree(&self, s: usize) -> usize {
        match *self {
            Rewinder::Qubit => 4 + s,
            Rewinder::Formanek { d } => s * (d - 1) + d * d,
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            Rewinder::Qubit => 2,
            Rewinder::Formanek { d } => d,
        }
    }
}
