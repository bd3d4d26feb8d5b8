//! Generator vectors as translation-invariant matrix product states.
//!
//! The generator entry for tuple word w is ℓ·Y_{w₁}⋯Y_{w_m}·R with site
//! matrices Y_a of size dⁿ (bond dimension dⁿ, physical dimension Dⁿ), so an
//! inner product of two such vectors contracts site by site in O(m) time.

use num_complex::Complex64 as C64;

use super::generator::{GeneratorConfig, GeneratorDraw};
use crate::error::{Error, Result};
use crate::numkit::ComplexMatrix;

/// A generator vector in MPS form. Entries are stored conjugated, matching
/// the dense [`super::generator_vector`].
#[derive(Clone, Debug)]
pub struct MpsVector {
    m: usize,
    sites: Vec<ComplexMatrix>,
    ell: Vec<C64>,
    right: Vec<C64>,
}

impl MpsVector {
    pub fn from_draw(cfg: &GeneratorConfig, draw: &GeneratorDraw) -> Self {
        Self { m: cfg.m, sites: draw.ys.clone(), ell: draw.ell.clone(), right: draw.right.clone() }
    }

    pub fn sample(cfg: &GeneratorConfig, index: u64) -> Result<Self> {
        let t = cfg.probe_matrix()?;
        let mut rng = super::generator::stream_for(cfg, index);
        Ok(Self::from_draw(cfg, &GeneratorDraw::sample(cfg, &t, &mut rng)))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bond_dim(&self) -> usize {
        self.ell.len()
    }

    pub fn physical_dim(&self) -> usize {
        self.sites.len()
    }

    /// Same site tensors at a different length.
    pub fn with_length(&self, m: usize) -> Self {
        Self { m, ..self.clone() }
    }

    /// Materializes the dense vector (small m only).
    pub fn to_dense(&self) -> Vec<C64> {
        let k = self.bond_dim();
        let mut rows = vec![self.ell.clone()];
        for _ in 0..self.m {
            rows = rows
                .iter()
                .flat_map(|r| {
                    self.sites.iter().map(move |y| (0..k).map(|j| (0..k).map(|i| r[i] * y[(i, j)]).sum()).collect())
                })
                .collect();
        }
        rows.iter().map(|r| r.iter().zip(&self.right).map(|(a, b)| a * b).sum::<C64>().conj()).collect()
    }
}

/// ⟨a|b⟩ = Σ_w conj(a_w)·b_w, contracted through the chain.
pub fn mps_inner(a: &MpsVector, b: &MpsVector) -> Result<C64> {
    if a.m != b.m || a.bond_dim() != b.bond_dim() || a.physical_dim() != b.physical_dim() {
        return Err(Error::Shape(format!(
            "MPS shapes differ: (m {}, bond {}, phys {}) vs (m {}, bond {}, phys {})",
            a.m,
            a.bond_dim(),
            a.physical_dim(),
            b.m,
            b.bond_dim(),
            b.physical_dim()
        )));
    }
    // conj(a_w) b_w = p^a_w conj(p^b_w) with p = ℓ Y_w R.
    // ρ_{ij} = Σ_w (ℓᵃY^a_w)_i conj((ℓᵇY^b_w)_j), updated as ρ ← Σ_a (Y^a)ᵀ ρ conj(Y^b).
    let k = a.bond_dim();
    let mut rho = ComplexMatrix::from_fn(k, k, |i, j| a.ell[i] * b.ell[j].conj());
    let conj_b: Vec<ComplexMatrix> =
        b.sites.iter().map(|y| ComplexMatrix::from_fn(k, k, |i, j| y[(i, j)].conj())).collect();
    let at: Vec<ComplexMatrix> = a.sites.iter().map(|y| y.transpose()).collect();
    for _ in 0..a.m {
        let mut next = ComplexMatrix::zeros(k, k);
        for (ya, yb) in at.iter().zip(&conj_b) {
            next += &ya.matmul(&rho).matmul(yb);
        }
        rho = next;
    }
    let mut s = C64::new(0.0, 0.0);
    for i in 0..k {
        for j in 0..k {
            s += rho[(i, j)] * a.right[i] * b.right[j].conj();
        }
    }
    Ok(s)
}
