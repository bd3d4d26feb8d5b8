use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::model::HamiltonianModel;
use crate::error::{Error, Result};
use crate::ncpoly::{ColumnProfile, PolyExpr, ScaledMatrix, EXPAND_LIMIT};
use crate::numkit::{expm, kron_all, vec_norm, ComplexMatrix, StateVector};

/// How probe columns are normalized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branching {
    /// Every party-position superposes all D letters.
    #[default]
    Canonical,
    /// A party-position superposes only the letters that occur there; a
    /// single-letter position costs nothing.
    Compressed,
}

impl std::str::FromStr for Branching {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" => Ok(Branching::Canonical),
            "compressed" => Ok(Branching::Compressed),
            _ => Err(Error::Invalid(format!("unknown branching mode {s:?} (canonical|compressed)"))),
        }
    }
}

/// log₂ of Π b_col for a polynomial with `n_vars` letters and the given
/// column profile.
pub fn normalization_log2(profile: &ColumnProfile, n_vars: usize, mode: Branching) -> f64 {
    profile
        .iter()
        .flatten()
        .map(|set| match mode {
            Branching::Canonical => (n_vars as f64).log2(),
            Branching::Compressed if set.len() > 1 => (set.len() as f64).log2(),
            Branching::Compressed => 0.0,
        })
        .sum()
}

/// Result of running a protocol on one assignment.
#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    /// Success probability (may underflow to 0; see `log2_prob`).
    pub prob: f64,
    pub log2_prob: f64,
    /// Normalized final state, or None if the protocol annihilated ψ.
    pub state: Option<StateVector>,
    pub normalization_log2: f64,
}

impl Outcome {
    pub fn is_zero(&self) -> bool {
        self.state.is_none()
    }
}

/// A vector carried with a separate log₂ scale.
#[derive(Clone, Debug)]
struct ScaledVec {
    v: Vec<C64>,
    log2: f64,
}

impl ScaledVec {
    fn new(v: Vec<C64>) -> Self {
        let mut s = Self { v, log2: 0.0 };
        s.renorm();
        s
    }

    fn renorm(&mut self) {
        let n = vec_norm(&self.v);
        if n == 0.0 || !n.is_finite() {
            self.log2 = f64::NEG_INFINITY;
            return;
        }
        self.v.iter_mut().for_each(|x| *x /= n);
        self.log2 += n.log2();
    }

    fn apply(&mut self, m: &ScaledMatrix) {
        if m.is_zero() || self.log2 == f64::NEG_INFINITY {
            self.log2 = f64::NEG_INFINITY;
            return;
        }
        self.v = m.mantissa().mul_vec(&self.v);
        self.log2 += m.exponent();
        self.renorm();
    }

    fn into_outcome(self, normalization_log2: f64) -> Outcome {
        if self.log2 == f64::NEG_INFINITY {
            return Outcome { prob: 0.0, log2_prob: f64::NEG_INFINITY, state: None, normalization_log2 };
        }
        let log2_prob = 2.0 * self.log2 - normalization_log2;
        Outcome { prob: log2_prob.exp2(), log2_prob, state: Some(StateVector::new(self.v)), normalization_log2 }
    }
}

fn check_psi(psi: &StateVector, dim: usize) -> Result<()> {
    if psi.dim() != dim {
        return Err(Error::Shape(format!("state has dimension {}, expected {dim}", psi.dim())));
    }
    if !psi.is_normalized() {
        return Err(Error::Invalid("initial state must be normalized".into()));
    }
    Ok(())
}

fn dim_of(assignment: &[ComplexMatrix]) -> Result<usize> {
    assignment.first().map(|x| x.rows()).ok_or_else(|| Error::Invalid("empty assignment".into()))
}

/// ‖p(X)ψ‖² / Π b_col and the normalized final state.
pub fn success_probability(
    p: &PolyExpr,
    assignment: &[ComplexMatrix],
    psi: &StateVector,
    mode: Branching,
) -> Result<Outcome> {
    let d = dim_of(assignment)?;
    check_psi(psi, d.pow(p.n_parties() as u32))?;
    let norm = normalization_log2(&p.column_profile(), p.n_vars(), mode);
    let m = p.evaluate_scaled(assignment)?;
    let mut v = ScaledVec::new(psi.amplitudes().to_vec());
    v.apply(&m);
    Ok(v.into_outcome(norm))
}

/// One step of a sequential protocol.
#[derive(Clone, Debug)]
pub enum Segment {
    Poly {
        poly: PolyExpr,
        branching: Branching,
    },
    /// Free evolution V^steps on every party, no probes.
    Free {
        steps: usize,
    },
}

impl Segment {
    pub fn poly(p: impl Into<PolyExpr>, branching: Branching) -> Self {
        Segment::Poly { poly: p.into(), branching }
    }

    /// Time steps the segment occupies.
    pub fn steps(&self) -> usize {
        match self {
            Segment::Poly { poly, .. } => poly.degrees().first().copied().unwrap_or(0),
            Segment::Free { steps } => *steps,
        }
    }

    pub fn normalization_log2(&self) -> f64 {
        match self {
            Segment::Poly { poly, branching } => normalization_log2(&poly.column_profile(), poly.n_vars(), *branching),
            Segment::Free { .. } => 0.0,
        }
    }
}

/// Segments in application order (first segment acts first).
#[derive(Clone, Debug)]
pub struct ProtocolProgram {
    pub n_parties: usize,
    pub var_names: Vec<String>,
    pub segments: Vec<Segment>,
    pub dt: Option<f64>,
}

impl ProtocolProgram {
    pub fn new(n_parties: usize, var_names: Vec<String>, segments: Vec<Segment>) -> Result<Self> {
        if var_names.is_empty() {
            return Err(Error::Invalid("a program needs at least the variable V".into()));
        }
        for (i, s) in segments.iter().enumerate() {
            if let Segment::Poly { poly, .. } = s {
                if poly.n_parties() != n_parties {
                    return Err(Error::Invalid(format!(
                        "segment {i} has {} parties, program has {n_parties}",
                        poly.n_parties()
                    )));
                }
                if poly.var_names() != var_names.as_slice() {
                    return Err(Error::Invalid(format!(
                        "segment {i} uses alphabet {:?}, program uses {var_names:?}",
                        poly.var_names()
                    )));
                }
                let d0 = poly.degrees()[0];
                if poly.degrees().iter().any(|&x| x != d0) {
                    return Err(Error::Homogeneity(format!(
                        "segment {i} has unequal per-party degrees {:?}",
                        poly.degrees()
                    )));
                }
            }
        }
        Ok(Self { n_parties, var_names, segments, dt: None })
    }

    /// Single polynomial as a program.
    pub fn single(p: impl Into<PolyExpr>, branching: Branching) -> Result<Self> {
        let p = p.into();
        Self::new(p.n_parties(), p.var_names().to_vec(), vec![Segment::poly(p, branching)])
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn total_steps(&self) -> usize {
        self.segments.iter().map(Segment::steps).sum()
    }

    pub fn normalization_log2(&self) -> f64 {
        self.segments.iter().map(Segment::normalization_log2).sum()
    }

    pub fn duration(&self) -> Option<f64> {
        self.dt.map(|dt| dt * self.total_steps() as f64)
    }
}

/// Runs the segments in order; free segments contribute no normalization.
pub fn run_program(prog: &ProtocolProgram, assignment: &[ComplexMatrix], psi: &StateVector) -> Result<Outcome> {
    if assignment.len() != prog.var_names.len() {
        return Err(Error::Shape(format!("{} matrices for {} variables", assignment.len(), prog.var_names.len())));
    }
    let d = dim_of(assignment)?;
    check_psi(psi, d.pow(prog.n_parties as u32))?;
    let mut v = ScaledVec::new(psi.amplitudes().to_vec());
    let mut norm = 0.0;
    for seg in &prog.segments {
        match seg {
            Segment::Poly { poly, branching } => {
                norm += normalization_log2(&poly.column_profile(), poly.n_vars(), *branching);
                v.apply(&poly.evaluate_scaled(assignment)?);
            }
            Segment::Free { steps } => {
                let vs = assignment[0].pow(*steps);
                let full = kron_all(std::iter::repeat_n(&vs, prog.n_parties));
                v.apply(&ScaledMatrix::new(full, 0.0));
            }
        }
    }
    Ok(v.into_outcome(norm))
}

/// Largest memory ⊗ systems ⊗ probe state the reference simulator builds.
pub const REFERENCE_LIMIT: usize = 1 << 24;

/// Full-Hilbert-space simulation of the scattering experiment. For every
/// probe step a memory qubit is prepared in the uniform superposition of
/// the letters allowed at that column; on |1⟩ a probe in |φ⟩ is sent
/// (otherwise it stays in an extra lab level), system and probe evolve
/// under the extended Hamiltonian for Δt, and the return operation
/// |0⟩⟨0|⊗I + |1⟩⟨1|⊗|lab⟩⟨φ̃| returns the probe to the lab. Finally the
/// memory is projected on Σ_j g_j*|j⟩ with the raw coefficients g.
///
/// Memory qubit q = k·m + t belongs to party k and chronological step t
/// (t = 0 is the first probe, i.e. the rightmost letter of the word).
pub fn reference_simulate(prog: &ProtocolProgram, model: &HamiltonianModel, psi: &StateVector) -> Result<Outcome> {
    model.validate()?;
    if prog.var_names.len() != 2 {
        return Err(Error::Invalid("the reference simulator handles the two letters V, W only".into()));
    }
    let n = prog.n_parties;
    let d = model.d;
    check_psi(psi, d.pow(n as u32))?;
    let pe = model.d_probe + 1;
    let lab = model.d_probe;
    let u_ext = extended_propagator(model)?;
    let mut phi_in = model.phi_in.amplitudes().to_vec();
    phi_in.push(C64::new(0.0, 0.0));
    let mut phi_out = model.phi_out.amplitudes().to_vec();
    phi_out.push(C64::new(0.0, 0.0));

    let sys_dim = d.pow(n as u32);
    let mut state: Vec<C64> = psi.amplitudes().to_vec();
    let mut norm_log2 = 0.0;
    for seg in &prog.segments {
        match seg {
            Segment::Free { steps } => {
                let v = expm(&model.h0.scale(C64::new(0.0, -model.dt * *steps as f64)))?;
                let full = kron_all(std::iter::repeat_n(&v, n));
                state = full.mul_vec(&state);
            }
            Segment::Poly { poly, branching } => {
                let p = poly.expand(EXPAND_LIMIT)?;
                let m = p.degrees()[0];
                let nq = n * m;
                let mem_dim = 1usize
                    .checked_shl(nq as u32)
                    .filter(|&x| x.saturating_mul(sys_dim).saturating_mul(pe) <= REFERENCE_LIMIT)
                    .ok_or_else(|| {
                        Error::Guard(format!(
                            "reference state for {nq} memory qubits exceeds {REFERENCE_LIMIT} amplitudes"
                        ))
                    })?;
                let profile = p.column_profile();
                norm_log2 += normalization_log2(&profile, 2, *branching);
                // amp[j * sys_dim + s]
                let mut amp = vec![C64::new(0.0, 0.0); mem_dim * sys_dim];
                amp[..sys_dim].copy_from_slice(&state);
                for t in 0..m {
                    for k in 0..n {
                        let q = k * m + t;
                        let letters = match branching {
                            Branching::Canonical => vec![0u16, 1],
                            Branching::Compressed => profile[k][m - 1 - t].iter().copied().collect(),
                        };
                        let a = 1.0 / (letters.len() as f64).sqrt();
                        let ctrl = [letters.contains(&0), letters.contains(&1)];
                        step(&mut amp, sys_dim, q, k, n, d, pe, lab, a, ctrl, &u_ext, &phi_in, &phi_out);
                    }
                }
                let mut out = vec![C64::new(0.0, 0.0); sys_dim];
                for (words, g) in p.terms() {
                    let mut j = 0usize;
                    for (k, w) in words.iter().enumerate() {
                        for t in 0..m {
                            if w.letters()[m - 1 - t] == 1 {
                                j |= 1 << (k * m + t);
                            }
                        }
                    }
                    for (o, x) in out.iter_mut().zip(&amp[j * sys_dim..(j + 1) * sys_dim]) {
                        *o += g * x;
                    }
                }
                state = out;
            }
        }
    }
    let nrm = vec_norm(&state);
    if nrm == 0.0 {
        return Ok(Outcome { prob: 0.0, log2_prob: f64::NEG_INFINITY, state: None, normalization_log2: norm_log2 });
    }
    // The memory amplitudes already carry the branching normalization.
    let prob = nrm * nrm;
    Ok(Outcome {
        prob,
        log2_prob: prob.log2(),
        state: Some(StateVector::new(state.iter().map(|x| x / nrm).collect())),
        normalization_log2: norm_log2,
    })
}

/// exp(−iH_ext Δt) on system ⊗ (probe levels + lab level), where the lab
/// level only sees H₀.
fn extended_propagator(model: &HamiltonianModel) -> Result<ComplexMatrix> {
    let (d, p) = (model.d, model.d_probe);
    let pe = p + 1;
    let hj = model.joint_hamiltonian();
    let mut h = ComplexMatrix::zeros(d * pe, d * pe);
    for i in 0..d {
        for j in 0..d {
            for a in 0..p {
                for b in 0..p {
                    h[(i * pe + a, j * pe + b)] = hj[(i * p + a, j * p + b)];
                }
            }
            h[(i * pe + p, j * pe + p)] = model.h0[(i, j)];
        }
    }
    expm(&h.scale(C64::new(0.0, -model.dt)))
}

/// One memory-controlled probe step on party k with memory qubit q.
#[allow(clippy::too_many_arguments)]
fn step(
    amp: &mut [C64],
    sys_dim: usize,
    q: usize,
    k: usize,
    n: usize,
    d: usize,
    pe: usize,
    lab: usize,
    a: f64,
    ctrl: [bool; 2],
    u_ext: &ComplexMatrix,
    phi_in: &[C64],
    phi_out: &[C64],
) {
    let mem_dim = amp.len() / sys_dim;
    let stride = d.pow((n - 1 - k) as u32);
    let outer = sys_dim / (stride * d);
    let bit = 1usize << q;
    for j0 in (0..mem_dim).filter(|j| j & bit == 0) {
        let base: Vec<C64> = amp[j0 * sys_dim..(j0 + 1) * sys_dim].to_vec();
        for b in 0..2 {
            let j = j0 | (b * bit);
            let dst = &mut amp[j * sys_dim..(j + 1) * sys_dim];
            if !ctrl[b] {
                dst.iter_mut().for_each(|x| *x = C64::new(0.0, 0.0));
                continue;
            }
            // Probe prepared in |lab⟩ (b = 0) or |φ⟩ (b = 1), then evolved
            // jointly with party k and returned.
            let probe_in: Vec<C64> = if b == 0 {
                (0..pe).map(|x| C64::new((x == lab) as u8 as f64, 0.0)).collect()
            } else {
                phi_in.to_vec()
            };
            let probe_out: Vec<C64> = if b == 0 {
                (0..pe).map(|x| C64::new((x == lab) as u8 as f64, 0.0)).collect()
            } else {
                phi_out.to_vec()
            };
            for o in 0..outer {
                for r in 0..stride {
                    let idx = |i: usize| (o * d + i) * stride + r;
                    let mut joint = vec![C64::new(0.0, 0.0); d * pe];
                    for i in 0..d {
                        for x in 0..pe {
                            joint[i * pe + x] = base[idx(i)] * probe_in[x] * a;
                        }
                    }
                    let evolved = u_ext.mul_vec(&joint);
                    for i in 0..d {
                        dst[idx(i)] = (0..pe).map(|x| probe_out[x].conj() * evolved[i * pe + x]).sum();
                    }
                }
            }
        }
    }
}
