use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{expm, kron, random_hermitian, random_state, ComplexMatrix, RngStream, StateVector};

/// Target system of dimension d probed by a d_probe-level particle.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianModel {
    pub d: usize,
    pub d_probe: usize,
    pub h0: ComplexMatrix,
    pub hp: ComplexMatrix,
    /// Interaction on system ⊗ probe (system index most significant).
    pub hi: ComplexMatrix,
    /// Probe state sent out.
    pub phi_in: StateVector,
    /// Probe state post-selected on return.
    pub phi_out: StateVector,
    pub dt: f64,
}

impl HamiltonianModel {
    pub fn validate(&self) -> Result<()> {
        let (d, p) = (self.d, self.d_probe);
        let check = |name: &str, m: &ComplexMatrix, n: usize| {
            if m.shape() != (n, n) {
                return Err(Error::Shape(format!("{name} is {:?}, expected {n}×{n}", m.shape())));
            }
            if !m.is_finite() {
                return Err(Error::Invalid(format!("{name} has non-finite entries")));
            }
            Ok(())
        };
        check("h0", &self.h0, d)?;
        check("hp", &self.hp, p)?;
        check("hi", &self.hi, d * p)?;
        if self.phi_in.dim() != p || self.phi_out.dim() != p {
            return Err(Error::Shape(format!(
                "probe states have dims {} and {}, expected {p}",
                self.phi_in.dim(),
                self.phi_out.dim()
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Invalid(format!("dt must be positive, got {}", self.dt)));
        }
        Ok(())
    }

    /// H₀⊗I + I⊗H_P + H_I on system ⊗ probe.
    pub fn joint_hamiltonian(&self) -> ComplexMatrix {
        let ip = ComplexMatrix::identity(self.d_probe);
        let is = ComplexMatrix::identity(self.d);
        &(&kron(&self.h0, &ip) + &kron(&is, &self.hp)) + &self.hi
    }

    /// Random Hermitian model with Haar-random probe states.
    pub fn random(spec: &RandomModelSpec, rng: &mut RngStream) -> Self {
        Self {
            d: spec.d,
            d_probe: spec.d_probe,
            h0: random_hermitian(spec.d, spec.h0_scale, rng),
            hp: random_hermitian(spec.d_probe, spec.hp_scale, rng),
            hi: random_hermitian(spec.d * spec.d_probe, spec.hi_scale, rng),
            phi_in: random_state(spec.d_probe, rng),
            phi_out: random_state(spec.d_probe, rng),
            dt: spec.dt,
        }
    }
}

/// Distribution over random Hermitian models.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomModelSpec {
    pub d: usize,
    pub d_probe: usize,
    pub dt: f64,
    #[serde(default = "one")]
    pub h0_scale: f64,
    #[serde(default = "one")]
    pub hp_scale: f64,
    #[serde(default = "one")]
    pub hi_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl RandomModelSpec {
    pub fn new(d: usize, d_probe: usize, dt: f64) -> Self {
        Self { d, d_probe, dt, h0_scale: 1.0, hp_scale: 1.0, hi_scale: 1.0 }
    }
}

/// Model file contents: one fixed model or a random-model distribution.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelSource {
    Fixed(HamiltonianModel),
    Random(RandomModelSpec),
}

impl ModelSource {
    pub fn draw(&self, rng: &mut RngStream) -> HamiltonianModel {
        match self {
            ModelSource::Fixed(m) => m.clone(),
            ModelSource::Random(s) => HamiltonianModel::random(s, rng),
        }
    }

    pub fn d(&self) -> usize {
        match self {
            ModelSource::Fixed(m) => m.d,
            ModelSource::Random(s) => s.d,
        }
    }
}

/// V = exp(−iH₀Δt) and W = (I⊗⟨φ̃|)·exp(−i(H₀+H_P+H_I)Δt)·(I⊗|φ⟩).
pub fn derive_vw(model: &HamiltonianModel) -> Result<(ComplexMatrix, ComplexMatrix)> {
    model.validate()?;
    let minus_i_dt = C64::new(0.0, -model.dt);
    let v = expm(&model.h0.scale(minus_i_dt))?;
    let u = expm(&model.joint_hamiltonian().scale(minus_i_dt))?;
    let (d, p) = (model.d, model.d_probe);
    let phi = model.phi_in.amplitudes();
    let phit = model.phi_out.amplitudes();
    let w = ComplexMatrix::from_fn(d, d, |i, j| {
        let mut s = C64::new(0.0, 0.0);
        for a in 0..p {
            for b in 0..p {
                s += phit[a].conj() * u[(i * p + a, j * p + b)] * phi[b];
            }
        }
        s
    });
    Ok((v, w))
}
