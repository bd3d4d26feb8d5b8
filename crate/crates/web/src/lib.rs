//! Browser bindings: a plan explorer, rewinding success probability versus
//! the rewound step count, and a fast-forward correctness check. Every entry
//! point takes plain numbers and returns a JSON string; the pure-Rust cores
//! are public so they can be tested natively.

use serde::Serialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use tempoly::constructions::{commutator_step, compose_fast_forward, compose_fast_rewind, qubit_rewind, SwapPolys};
use tempoly::ncpoly::vw_names;
use tempoly::numkit::{
    ginibre, haar_unitary, inverse, kron_all, random_hermitian, random_state, vec_inner, vec_norm, ComplexMatrix,
    RngStream,
};
use tempoly::planner::{feasible, plan, verify_schedule, FeasibilityQuery};
use tempoly::protocol::{monte_carlo, Branching, MonteCarloOptions, ProtocolProgram, Sampler, Segment};

fn to_js(r: Result<Value, String>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e))
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Parses "1, -0.5, 2" into numbers.
pub fn parse_targets(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| format!("bad target {t:?}: {e}")))
        .collect()
}

/// Feasibility, schedule and schedule check for one query. Infeasible
/// queries are a normal result with `feasible: false`, not an error.
pub fn plan_query(d: usize, budget: f64, targets: &str, seed: u64) -> Result<Value, String> {
    let q = FeasibilityQuery::new(d, budget, parse_targets(targets)?);
    q.validate().map_err(err)?;
    let f = feasible(&q);
    let mut out = json!({
        "feasible": f.ok,
        "slack": f.slack,
        "cost": q.cost(),
        "min_budget": q.cost() / q.n as f64,
    });
    if f.ok {
        let s = plan(&q).map_err(err)?;
        let h0 = random_hermitian(d, 1.0, &mut RngStream::named(seed, "web-plan"));
        out["schedule"] = serde_json::to_value(&s).map_err(err)?;
        out["verification"] = serde_json::to_value(verify_schedule(&s, &h0).map_err(err)?).map_err(err)?;
    }
    Ok(out)
}

#[derive(Serialize)]
pub struct RewindPoint {
    pub s: usize,
    pub canonical: f64,
    pub canonical_stderr: f64,
    pub sequential: f64,
    pub sequential_stderr: f64,
}

/// Haar-averaged success probability of the canonical qubit rewinder and of
/// the sequential program [W,V]; free s; [W,V], for s = 0..=s_max.
pub fn rewind_curve(s_max: usize, trials: usize, seed: u64) -> Result<Vec<RewindPoint>, String> {
    let sampler = Sampler::Haar { d: 2 };
    let c = commutator_step();
    (0..=s_max)
        .map(|s| {
            let opts = MonteCarloOptions::new(trials, RngStream::new(seed, 0).child("rewind", s as u64).next_seed());
            let canon = ProtocolProgram::single(qubit_rewind(s).map_err(err)?, Branching::Canonical).map_err(err)?;
            let seq = ProtocolProgram::new(
                1,
                vw_names(),
                vec![
                    Segment::poly(c.clone(), Branching::Compressed),
                    Segment::Free { steps: s },
                    Segment::poly(c.clone(), Branching::Compressed),
                ],
            )
            .map_err(err)?;
            let a = monte_carlo(&canon, &sampler, &opts).map_err(err)?;
            let b = monte_carlo(&seq, &sampler, &opts).map_err(err)?;
            Ok(RewindPoint {
                s,
                canonical: a.mean,
                canonical_stderr: a.stderr,
                sequential: b.mean,
                sequential_stderr: b.stderr,
            })
        })
        .collect()
}

/// Checks E·ψ ∝ (V^{±ns} on system j)·ψ for the two- or three-system
/// composition built from the bundled qubit SWAP polynomial.
pub fn fast_forward_check(
    n: usize,
    j: usize,
    s: usize,
    forward: bool,
    draws: usize,
    seed: u64,
) -> Result<Value, String> {
    if !(2..=3).contains(&n) || j >= n {
        return Err(format!("need n in 2..=3 and j < n, got n={n}, j={j}"));
    }
    let omega = tempoly::fixtures::omega().map_err(err)?;
    let swaps = SwapPolys::uniform(2, omega).map_err(err)?;
    let e = if forward {
        compose_fast_forward(n, j, s, &swaps)
    } else {
        compose_fast_rewind(n, j, &swaps, &qubit_rewind(s).map_err(err)?)
    }
    .map_err(err)?;
    let mut rng = RngStream::named(seed, "web-fast-forward");
    let id = ComplexMatrix::identity(2);
    let mut residuals = Vec::with_capacity(draws);
    for i in 0..draws {
        let xs: Vec<ComplexMatrix> =
            (0..2).map(|_| if i % 2 == 0 { haar_unitary(2, &mut rng) } else { ginibre(2, 2, &mut rng) }).collect();
        let steps = n * s;
        let vj = if forward { xs[0].pow(steps) } else { inverse(&xs[0]).map_err(err)?.pow(steps) };
        let target = kron_all((0..n).map(|p| if p == j { &vj } else { &id }));
        let psi = random_state(1 << n, &mut rng);
        let got = e.evaluate(&xs).map_err(err)?.mul_vec(psi.amplitudes());
        let want = target.mul_vec(psi.amplitudes());
        let c = vec_inner(&want, &got) / vec_inner(&want, &want);
        let r = got.iter().zip(&want).map(|(g, w)| (g - c * w).norm_sqr()).sum::<f64>().sqrt()
            / vec_norm(&got).max(f64::MIN_POSITIVE);
        residuals.push(r);
    }
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    Ok(json!({
        "n": n,
        "j": j,
        "s": s,
        "forward": forward,
        "degree": e.degrees()[0],
        "steps": if forward { (n * s) as i64 } else { -((n * s) as i64) },
        "residuals": residuals,
        "worst": worst,
        "pass": worst <= 1e-8,
    }))
}

#[wasm_bindgen]
pub fn plan_explorer(d: usize, budget: f64, targets: &str, seed: u64) -> Result<String, JsError> {
    to_js(plan_query(d, budget, targets, seed))
}

#[wasm_bindgen]
pub fn rewind_probability(s_max: usize, trials: usize, seed: u64) -> Result<String, JsError> {
    to_js(rewind_curve(s_max, trials, seed).and_then(|v| serde_json::to_value(v).map_err(err)))
}

#[wasm_bindgen]
pub fn fast_forward(n: usize, j: usize, s: usize, forward: bool, draws: usize, seed: u64) -> Result<String, JsError> {
    to_js(fast_forward_check(n, j, s, forward, draws, seed))
}

#[wasm_bindgen]
pub fn version() -> String {
    tempoly::VERSION.to_string()
}
