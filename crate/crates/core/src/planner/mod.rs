//! Feasibility of time translations under a budget and constructive
//! schedules built from free evolution, time transfer and fast rewinding.
//!
//! A query asks for translations T_i of n systems of dimension d within
//! elapsed time T′. It is feasible iff Σ_{T>0} T + (d−1) Σ_{T<0} |T| ≤ nT′.
//! Systems are 0-based.

use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::constructions::{compose_fast_forward, compose_fast_rewind, Rewinder, SwapPolys};
use crate::error::{Error, Result};
use crate::ncpoly::{vw_names, PolyExpr};
use crate::numkit::{expm, proportionality_fit, ComplexMatrix};
use crate::protocol::{Branching, ProtocolProgram, Segment};

pub const FEASIBILITY_TOL: f64 = 1e-12;
pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeasibilityQuery {
    pub d: usize,
    pub n: usize,
    pub budget: f64,
    pub targets: Vec<f64>,
}

impl FeasibilityQuery {
    pub fn new(d: usize, budget: f64, targets: Vec<f64>) -> Self {
        Self { d, n: targets.len(), budget, targets }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::Invalid(format!("d must be at least 2, got {}", self.d)));
        }
        if self.n == 0 || self.targets.len() != self.n {
            return Err(Error::Invalid(format!("{} targets for n = {}", self.targets.len(), self.n)));
        }
        if !(self.budget >= 0.0 && self.budget.is_finite()) {
            return Err(Error::Invalid(format!("budget must be finite and non-negative, got {}", self.budget)));
        }
        if let Some(t) = self.targets.iter().find(|t| !t.is_finite()) {
            return Err(Error::Invalid(format!("non-finite target {t}")));
        }
        Ok(())
    }

    /// Σ_{T>0} T + (d−1) Σ_{T<0} |T|.
    pub fn cost(&self) -> f64 {
        let dm1 = (self.d - 1) as f64;
        self.targets.iter().map(|&t| if t > 0.0 { t } else { -t * dm1 }).sum()
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Feasibility {
    pub ok: bool,
    /// nT′ minus the cost.
    pub slack: f64,
}

pub fn feasible(q: &FeasibilityQuery) -> Feasibility {
    let slack = q.n as f64 * q.budget - q.cost();
    Feasibility { ok: slack >= -FEASIBILITY_TOL, slack }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Phase {
    Free { tau: BigRational },
    Transfer { system: usize, tau: BigRational },
    Rewind { system: usize, tau: BigRational },
}

impl Phase {
    pub fn tau(&self) -> &BigRational {
        match self {
            Phase::Free { tau } | Phase::Transfer { tau, .. } | Phase::Rewind { tau, .. } => tau,
        }
    }

    pub fn name(&self) -> String {
        let t = self.tau().to_f64().unwrap_or(f64::NAN);
        match self {
            Phase::Free { .. } => format!("free({t})"),
            Phase::Transfer { system, .. } => format!("transfer({system}, {t})"),
            Phase::Rewind { system, .. } => format!("rewind({system}, {t})"),
        }
    }

    /// Translation this phase gives each of n systems of dimension d.
    pub fn translation(&self, n: usize, d: usize) -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); n];
        let nr = BigRational::from_integer(BigInt::from(n));
        match self {
            Phase::Free { tau } => out.iter_mut().for_each(|x| *x = tau.clone()),
            Phase::Transfer { system, tau } => out[*system] = &nr * tau,
            Phase::Rewind { system, tau } => {
                out[*system] = -(&nr * tau) / BigRational::from_integer(BigInt::from(d - 1));
            }
        }
        out
    }
}

#[derive(Serialize)]
struct PhaseJson {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    system: Option<usize>,
    tau: f64,
    tau_exact: String,
}

impl Serialize for Phase {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (kind, system) = match self {
            Phase::Free { .. } => ("free", None),
            Phase::Transfer { system, .. } => ("transfer", Some(*system)),
            Phase::Rewind { system, .. } => ("rewind", Some(*system)),
        };
        PhaseJson { kind, system, tau: self.tau().to_f64().unwrap_or(f64::NAN), tau_exact: self.tau().to_string() }
            .serialize(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Schedule {
    pub d: usize,
    pub n: usize,
    pub budget: f64,
    pub targets: Vec<f64>,
    pub phases: Vec<Phase>,
    /// Predicted translation per system.
    pub totals: Vec<f64>,
}

impl Schedule {
    pub fn exact_totals(&self) -> Vec<BigRational> {
        let mut acc = vec![BigRational::zero(); self.n];
        for p in &self.phases {
            for (a, t) in acc.iter_mut().zip(p.translation(self.n, self.d)) {
                *a += t;
            }
        }
        acc
    }

    pub fn exact_duration(&self) -> BigRational {
        self.phases.iter().map(|p| p.tau().clone()).fold(BigRational::zero(), |a, b| a + b)
    }

    fn refresh_totals(&mut self) {
        self.totals = self.exact_totals().iter().map(|t| t.to_f64().unwrap_or(f64::NAN)).collect();
    }

    /// Whether a net-zero transfer/rewind pair is present; outside the
    /// padding no system receives both.
    pub fn has_padding(&self) -> bool {
        (0..self.n).any(|j| {
            let on = |f: fn(&Phase) -> Option<usize>| self.phases.iter().any(|p| f(p) == Some(j));
            on(|p| if let Phase::Transfer { system, .. } = p { Some(*system) } else { None })
                && on(|p| if let Phase::Rewind { system, .. } = p { Some(*system) } else { None })
        })
    }
}

fn exact(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Invalid(format!("{x} is not finite")))
}

/// Free evolution for the common positive part, a transfer for each
/// remaining positive target, a rewind for each negative one, and the
/// leftover budget L consumed by transfer(0, L/d) + rewind(0, (d−1)L/d).
/// Bookkeeping is exact on the binary values of the inputs.
pub fn plan(q: &FeasibilityQuery) -> Result<Schedule> {
    q.validate()?;
    let f = feasible(q);
    if !f.ok {
        return Err(Error::Infeasible(format!("cost exceeds n·T′ by {}", -f.slack)));
    }
    let n = BigRational::from_integer(BigInt::from(q.n));
    let dm1 = BigRational::from_integer(BigInt::from(q.d - 1));
    let d = BigRational::from_integer(BigInt::from(q.d));
    let budget = exact(q.budget)?;
    let targets = q.targets.iter().map(|&t| exact(t)).collect::<Result<Vec<_>>>()?;
    let mut phases = Vec::new();
    let common = targets.iter().min().cloned().filter(|m| m.is_positive()).unwrap_or_else(BigRational::zero);
    if common.is_positive() {
        phases.push(Phase::Free { tau: common.clone() });
    }
    for (j, t) in targets.iter().enumerate() {
        let rest = t - &common;
        if rest.is_positive() {
            phases.push(Phase::Transfer { system: j, tau: &rest / &n });
        }
    }
    for (j, t) in targets.iter().enumerate() {
        if t.is_negative() {
            phases.push(Phase::Rewind { system: j, tau: &dm1 * t.abs() / &n });
        }
    }
    let used = phases.iter().map(|p| p.tau().clone()).fold(BigRational::zero(), |a, b| a + b);
    let left = &budget - used;
    if left.is_negative() {
        return Err(Error::Infeasible(format!(
            "query passes the {FEASIBILITY_TOL:e} tolerance but overruns the budget by {} exactly",
            (-left).to_f64().unwrap_or(f64::NAN)
        )));
    }
    if left.is_positive() {
        phases.push(Phase::Transfer { system: 0, tau: &left / &d });
        phases.push(Phase::Rewind { system: 0, tau: &dm1 * &left / &d });
    }
    let mut s = Schedule { d: q.d, n: q.n, budget: q.budget, targets: q.targets.clone(), phases, totals: vec![] };
    s.refresh_totals();
    debug_assert_eq!(s.exact_duration(), budget);
    debug_assert_eq!(s.exact_totals(), targets);
    Ok(s)
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemCheck {
    pub system: usize,
    pub target: f64,
    pub relative_residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScheduleVerification {
    pub systems: Vec<SystemCheck>,
    /// Phases acting on failing systems.
    pub suspect_phases: Vec<String>,
    pub duration_matches_budget: bool,
    pub pass: bool,
}

fn evolve(h0: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    expm(&h0.scale(C64::new(0.0, -t)))
}

/// Composes each system's phase propagators and compares them with
/// exp(−iH₀T_i) by operator proportionality.
pub fn verify_schedule(s: &Schedule, h0: &ComplexMatrix) -> Result<ScheduleVerification> {
    if h0.shape() != (s.d, s.d) {
        return Err(Error::Shape(format!("H0 is {:?}, schedule has d = {}", h0.shape(), s.d)));
    }
    let n = s.n as f64;
    let dm1 = (s.d - 1) as f64;
    let mut systems = Vec::with_capacity(s.n);
    let mut suspects = Vec::new();
    for i in 0..s.n {
        let mut op = ComplexMatrix::identity(s.d);
        let mut touching = Vec::new();
        for p in &s.phases {
            let tau = p.tau().to_f64().unwrap_or(f64::NAN);
            let step = match p {
                Phase::Free { .. } => Some(evolve(h0, tau)?),
                Phase::Transfer { system, .. } if *system == i => Some(evolve(h0, n * tau)?),
                Phase::Rewind { system, .. } if *system == i => Some(evolve(h0, -n * tau / dm1)?),
                _ => None,
            };
            if let Some(u) = step {
                op = u.matmul(&op);
                touching.push(p.name());
            }
        }
        let target = evolve(h0, s.targets[i])?;
        let fit = proportionality_fit(&op, &target)?;
        let pass = fit.relative <= VERIFY_TOL;
        if !pass {
            suspects.extend(touching);
        }
        systems.push(SystemCheck { system: i, target: s.targets[i], relative_residual: fit.relative, pass });
    }
    let duration = s.exact_duration().to_f64().unwrap_or(f64::NAN);
    let duration_matches_budget = (duration - s.budget).abs() <= VERIFY_TOL * s.budget.abs().max(1.0);
    suspects.dedup();
    Ok(ScheduleVerification {
        pass: duration_matches_budget && systems.iter().all(|c| c.pass),
        systems,
        suspect_phases: suspects,
        duration_matches_budget,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PhaseCompilation {
    pub phase: String,
    /// Rounded step count s.
    pub steps: usize,
    /// Segment degree (time steps occupied).
    pub degree: usize,
    /// τ − (steps of useful evolution)·dt.
    pub rounding_error: f64,
    /// Steps beyond the useful evolution (O(1) in dt).
    pub overhead_steps: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompileReport {
    pub dt: f64,
    pub phases: Vec<PhaseCompilation>,
    pub total_steps: usize,
    pub overhead_steps: usize,
    /// Net V exponent each system receives.
    pub achieved_steps: Vec<i64>,
    /// achieved_steps·dt − target.
    pub translation_error: Vec<f64>,
    /// total_steps·dt − T′.
    pub duration_excess: f64,
}

#[derive(Clone, Debug)]
pub struct Compiled {
    pub program: ProtocolProgram,
    pub report: CompileReport,
}

/// Turns a schedule into a program with step dt. Transfers become E^j
/// segments with s = round(τ/dt), rewinds D^j segments whose rewinder
/// covers s = round(τ/((d−1)dt)) steps, free phases free segments.
/// Single-system schedules need no SWAP polynomials.
pub fn compile(s: &Schedule, dt: f64, swaps: Option<&SwapPolys>, rewinder: Rewinder) -> Result<Compiled> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Invalid(format!("dt must be positive, got {dt}")));
    }
    if rewinder.dim() != s.d {
        return Err(Error::Invalid(format!("rewinder is for d = {}, schedule has d = {}", rewinder.dim(), s.d)));
    }
    let n = s.n;
    let dm1 = s.d - 1;
    let mut names = swaps.map(|w| w.var_names().to_vec()).unwrap_or_else(vw_names);
    for v in vw_names() {
        if !names.contains(&v) {
            names.push(v);
        }
    }
    let swaps = swaps.map(|w| w.with_alphabet(&names)).transpose()?;
    let need_swaps = || {
        swaps.as_ref().ok_or_else(|| Error::Invalid(format!("a {n}-system transfer or rewind needs SWAP polynomials")))
    };
    let mut segments = Vec::new();
    let mut phases = Vec::new();
    let mut achieved = vec![0i64; n];
    for p in &s.phases {
        let tau = p.tau().to_f64().unwrap_or(f64::NAN);
        if tau < dt {
            return Err(Error::Invalid(format!("dt = {dt} exceeds the duration of {}", p.name())));
        }
        let (seg, steps, useful) = match p {
            Phase::Free { .. } => {
                let k = (tau / dt).round() as usize;
                achieved.iter_mut().for_each(|a| *a += k as i64);
                (Segment::Free { steps: k }, k, k)
            }
            Phase::Transfer { system, .. } if n == 1 => {
                let k = (tau / dt).round() as usize;
                achieved[*system] += k as i64;
                (Segment::Free { steps: k }, k, k)
            }
            Phase::Transfer { system, .. } => {
                let k = (tau / dt).round() as usize;
                let e = compose_fast_forward(n, *system, k, need_swaps()?)?;
                achieved[*system] += (n * k) as i64;
                (Segment::poly(e, Branching::Compressed), k, k)
            }
            Phase::Rewind { system, .. } => {
                let k = (tau / (dm1 as f64 * dt)).round() as usize;
                let r = rewinder.build(k)?;
                let e = if n == 1 {
                    PolyExpr::leaf(r.with_alphabet(&names)?)
                } else {
                    compose_fast_rewind(n, *system, need_swaps()?, &r)?.with_alphabet(&names)?
                };
                achieved[*system] -= (n * k) as i64;
                (Segment::poly(e, Branching::Compressed), k, k * dm1)
            }
        };
        let degree = seg.steps();
        phases.push(PhaseCompilation {
            phase: p.name(),
            steps,
            degree,
            rounding_error: tau - useful as f64 * dt,
            overhead_steps: degree - useful,
        });
        segments.push(seg);
    }
    let program = ProtocolProgram::new(n, names, segments)?.with_dt(dt);
    let total_steps = program.total_steps();
    let report = CompileReport {
        dt,
        overhead_steps: phases.iter().map(|p| p.overhead_steps).sum(),
        phases,
        total_steps,
        translation_error: achieved.iter().zip(&s.targets).map(|(&a, &t)| a as f64 * dt - t).collect(),
        achieved_steps: achieved,
        duration_excess: total_steps as f64 * dt - s.budget,
    };
    Ok(Compiled { program, report })
}
