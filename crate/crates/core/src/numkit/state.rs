use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A ket. Unnormalized vectors are allowed; `is_normalized` checks the
/// unit-norm invariant at 1e-12.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>) -> Self {
        Self { amps }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); dim];
        amps[index] = C64::new(1.0, 0.0);
        Self { amps }
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.amps)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(Self { amps: self.amps.iter().map(|a| a / n).collect() })
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &Self) -> C64 {
        vec_inner(&self.amps, &other.amps)
    }

    /// |⟨a|b⟩|² / (‖a‖²‖b‖²); ray fidelity of two unnormalized vectors.
    pub fn fidelity(&self, other: &Self) -> f64 {
        let den = self.norm().powi(2) * other.norm().powi(2);
        if den == 0.0 {
            return 0.0;
        }
        self.inner(other).norm_sqr() / den
    }
}

pub fn vec_inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for StateVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateJson {
            dim: self.amps.len(),
            re: self.amps.iter().map(|z| z.re).collect(),
            im: self.amps.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = StateJson::deserialize(d)?;
        if j.re.len() != j.dim || j.im.len() != j.dim {
            return Err(D::Error::custom("state re/im length must equal dim"));
        }
        if j.re.iter().chain(&j.im).any(|x| !x.is_finite()) {
            return Err(D::Error::custom("state amplitudes must be finite"));
        }
        Ok(Self { amps: j.re.iter().zip(&j.im).map(|(&r, &i)| C64::new(r, i)).collect() })
    }
}
