use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use super::central::central_filler;
use crate::error::{Error, Result};
use crate::ncpoly::{PolyExpr, TensorPoly, Word};

/// SWAP polynomials Ω^{(j,k)} for ordered party pairs, plus the central
/// filler that pads bystanders to deg(Ω). All Ω share one degree.
#[derive(Clone, Debug)]
pub struct SwapPolys {
    d: usize,
    default: Option<PolyExpr>,
    pairs: BTreeMap<(usize, usize), PolyExpr>,
    degree: usize,
    var_names: Vec<String>,
}

impl SwapPolys {
    /// The same Ω for every pair. Ω must be two-party with equal degrees.
    pub fn uniform(d: usize, omega: impl Into<PolyExpr>) -> Result<Self> {
        let omega = omega.into();
        let degree = Self::check(&omega)?;
        Ok(Self { d, var_names: omega.var_names().to_vec(), default: Some(omega), pairs: BTreeMap::new(), degree })
    }

    /// Explicit per-pair map (0-based parties, first entry is the party
    /// whose factor comes first in Ω's tensor product).
    pub fn from_pairs(d: usize, pairs: BTreeMap<(usize, usize), PolyExpr>) -> Result<Self> {
        let first = pairs.values().next().ok_or_else(|| Error::Invalid("empty swap map".into()))?;
        let degree = Self::check(first)?;
        let var_names = first.var_names().to_vec();
        for p in pairs.values() {
            if Self::check(p)? != degree || p.var_names() != var_names.as_slice() {
                return Err(Error::Homogeneity("all swap polynomials must share degree and alphabet".into()));
            }
        }
        Ok(Self { d, default: None, pairs, degree, var_names })
    }

    fn check(omega: &PolyExpr) -> Result<usize> {
        if omega.n_parties() != 2 || omega.degrees()[0] != omega.degrees()[1] {
            return Err(Error::Homogeneity(format!(
                "swap polynomial must be two-party with equal degrees, got {:?}",
                omega.degrees()
            )));
        }
        Ok(omega.degrees()[0])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn get(&self, j: usize, k: usize) -> Result<PolyExpr> {
        if let Some(p) = self.pairs.get(&(j, k)) {
            return Ok(p.clone());
        }
        self.default.clone().ok_or_else(|| Error::Invalid(format!("no swap polynomial for pair ({j},{k})")))
    }

    /// Re-expressed over a wider alphabet (matched by name).
    pub fn with_alphabet(&self, var_names: &[String]) -> Result<Self> {
        Ok(Self {
            d: self.d,
            default: self.default.as_ref().map(|p| p.with_alphabet(var_names)).transpose()?,
            pairs: self.pairs.iter().map(|(k, p)| Ok((*k, p.with_alphabet(var_names)?))).collect::<Result<_>>()?,
            degree: self.degree,
            var_names: var_names.to_vec(),
        })
    }

    fn filler(&self) -> Result<TensorPoly> {
        central_filler(self.d, self.degree, &self.var_names, 0, 1)
    }
}

fn single(var_names: &[String], word: Word) -> Result<TensorPoly> {
    TensorPoly::monomial(var_names.to_vec(), vec![word], C64::new(1.0, 0.0))
}

/// Builds X_j ∏_{k≠j} Ω^{(j,k)} X_k Ω^{(j,k)} for per-party blocks X.
fn conjugation_chain(n: usize, j: usize, block: &TensorPoly, swaps: &SwapPolys) -> Result<PolyExpr> {
    if j >= n {
        return Err(Error::Invalid(format!("party {j} out of range for n = {n}")));
    }
    let names = swaps.var_names().to_vec();
    let block = block.with_alphabet(&names)?;
    let filler = if n > 2 { Some(swaps.filler()?) } else { None };
    let on = |k: usize| PolyExpr::tensor_embed(PolyExpr::leaf(block.clone()), n, &[k], None);
    let mut factors = Vec::new();
    if block.degrees()[0] > 0 || n == 1 {
        factors.push(on(j)?);
    }
    for k in (0..n).filter(|&k| k != j) {
        let omega = PolyExpr::tensor_embed(swaps.get(j, k)?, n, &[j, k], filler.clone())?;
        factors.push(omega.clone());
        if block.degrees()[0] > 0 {
            factors.push(on(k)?);
        }
        factors.push(omega);
    }
    let e = PolyExpr::product(factors)?;
    let d0 = e.degrees()[0];
    if e.degrees().iter().any(|&x| x != d0) {
        return Err(Error::Homogeneity(format!("unbalanced per-party degrees {:?}", e.degrees())));
    }
    Ok(e)
}

/// E^j = V_j^s ∏_{k≠j} Ω^{(j,k)} V_k^s Ω^{(j,k)} ∝ V^{ns} on party j and
/// identity elsewhere. Parties are 0-based.
pub fn compose_fast_forward(n: usize, j: usize, s: usize, swaps: &SwapPolys) -> Result<PolyExpr> {
    let vs = single(swaps.var_names(), Word::power(0, s))?;
    conjugation_chain(n, j, &vs, swaps)
}

/// D^j = R_j ∏_{k≠j} Ω^{(j,k)} R_k Ω^{(j,k)} ∝ V^{−ns} on party j, where
/// `rewinder` satisfies R·V^s ∝ I. The alphabet is the union of both.
pub fn compose_fast_rewind(n: usize, j: usize, swaps: &SwapPolys, rewinder: &TensorPoly) -> Result<PolyExpr> {
    if rewinder.n_parties() != 1 {
        return Err(Error::Invalid("rewinder must be single-party".into()));
    }
    let mut names = swaps.var_names().to_vec();
    for v in rewinder.var_names() {
        if !names.contains(v) {
            names.push(v.clone());
        }
    }
    let swaps = swaps.with_alphabet(&names)?;
    conjugation_chain(n, j, rewinder, &swaps)
}
