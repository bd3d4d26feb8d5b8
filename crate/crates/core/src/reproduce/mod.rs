//! The acceptance checks as runnable criteria with a pass/fail table.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::Rng;
use serde::Serialize;

use crate::constructions::{
    check_bundle, check_bundle_extended, compose_fast_forward, compose_fast_rewind, qubit_rewind, rewind_poly,
    swap_poly_symbolic, SwapPolys,
};
use crate::error::{Error, Result};
use crate::fixtures::{load_swap_fixture, OMEGA_D2_M5_JSON};
use crate::ncpoly::{vw_names, TensorPoly, Word};
use crate::numkit::{
    complex_normal, gamma_conjugation_check, ginibre, haar_unitary, inverse, kron_all, proportionality_fit,
    random_diagonal, random_state, swap_matrix, vec_inner, ComplexMatrix, RngStream,
};
use crate::planner::{feasible, plan, verify_schedule, FeasibilityQuery};
use crate::protocol::{
    derive_vw, monte_carlo, reference_simulate, run_program, Branching, HamiltonianModel, MonteCarloOptions,
    ProtocolProgram, RandomModelSpec, Sampler, Segment,
};
use crate::search::{
    default_var_names, dim_bound, mps_inner, orthocomplement, perm_span_residual, search_dense, sparsify_quotient,
    DenseSearch, GeneratorConfig, MpsVector, SparsifyOptions,
};

pub const CRITERIA: u8 = 16;

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub pass: bool,
    pub measured: String,
    pub target: String,
    pub tolerance: String,
    pub seed: u64,
    pub runtime_s: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:>2} {}: measured {} | target {} | tol {} | seed {} | {:.2}s",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.target,
            self.tolerance,
            self.seed,
            self.runtime_s
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproduceSummary {
    pub version: &'static str,
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub all_pass: bool,
    pub runtime_s: f64,
}

#[derive(Clone, Debug)]
pub struct ReproduceOptions {
    pub seed: u64,
    /// Replaces the bundled SWAP fixture wherever it is used.
    pub fixture: Option<Vec<u8>>,
    /// Run only these criteria (all when empty).
    pub only: Vec<u8>,
}

impl ReproduceOptions {
    pub fn new(seed: u64) -> Self {
        Self { seed, fixture: None, only: Vec::new() }
    }
}

struct Outcome {
    pass: bool,
    measured: String,
    target: &'static str,
    tolerance: &'static str,
}

const NAMES: [&str; CRITERIA as usize] = [
    "quotient dimensions",
    "fixture validity",
    "rewinding probability",
    "compressed rewinding",
    "SWAP probability",
    "fast-forward probability",
    "fast-forward correctness",
    "rewinding construction",
    "oracle equivalence",
    "planner soundness",
    "MPS fast path",
    "projector pipeline",
    "quotient spans permutations",
    "dimension bound",
    "gamma identity",
    "sparsification",
];

pub fn criterion_name(id: u8) -> Option<&'static str> {
    NAMES.get(usize::from(id).wrapping_sub(1)).copied()
}

/// Runs one criterion; errors become failures with the message as the
/// measured value.
pub fn run_criterion(id: u8, opts: &ReproduceOptions) -> Result<CriterionResult> {
    let name = criterion_name(id).ok_or_else(|| Error::Invalid(format!("no criterion {id} (1..={CRITERIA})")))?;
    let seed = RngStream::new(opts.seed, 0).child("criterion", u64::from(id)).next_seed();
    let t = Instant::now();
    let r = match id {
        1 => c01_quotient_dims(opts.seed),
        2 => c02_fixture(opts, seed),
        3 => c03_rewind_probability(seed),
        4 => c04_compressed_rewind(seed),
        5 => c05_swap_probability(opts, seed),
        6 => c06_fast_forward_probability(opts, seed),
        7 => c07_fast_forward_correctness(opts, seed),
        8 => c08_rewind_construction(seed),
        9 => c09_oracle_equivalence(seed),
        10 => c10_planner(seed),
        11 => c11_mps(seed),
        12 => c12_bundle(seed),
        13 => c13_quotient_perm_span(opts.seed, seed),
        14 => c14_dim_bound(opts.seed),
        15 => c15_gamma(seed),
        _ => c16_sparsify(opts.seed, seed),
    };
    let r = r.unwrap_or_else(|e| Outcome { pass: false, measured: format!("error: {e}"), target: "", tolerance: "" });
    Ok(CriterionResult {
        id,
        name,
        pass: r.pass,
        measured: r.measured,
        target: r.target.into(),
        tolerance: r.tolerance.into(),
        seed,
        runtime_s: t.elapsed().as_secs_f64(),
    })
}

/// Runs the selected criteria in order, calling `progress` after each.
pub fn reproduce(opts: &ReproduceOptions, mut progress: impl FnMut(&CriterionResult)) -> Result<ReproduceSummary> {
    let t = Instant::now();
    let ids: Vec<u8> = if opts.only.is_empty() { (1..=CRITERIA).collect() } else { opts.only.clone() };
    let mut criteria = Vec::with_capacity(ids.len());
    for id in ids {
        let r = run_criterion(id, opts)?;
        progress(&r);
        criteria.push(r);
    }
    Ok(ReproduceSummary {
        version: crate::VERSION,
        seed: opts.seed,
        all_pass: criteria.iter().all(|c| c.pass),
        criteria,
        runtime_s: t.elapsed().as_secs_f64(),
    })
}

fn omega(opts: &ReproduceOptions) -> Result<TensorPoly> {
    let bytes = opts.fixture.as_deref().unwrap_or(OMEGA_D2_M5_JSON.as_bytes());
    Ok(load_swap_fixture(bytes)?.poly)
}

/// Dense m = 1..5 SWAP searches, shared by criteria 1, 13, 14, 16.
fn searches(seed: u64) -> Result<Arc<Vec<DenseSearch>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<DenseSearch>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(s) = cache.lock().expect("search cache").get(&seed) {
        return Ok(s.clone());
    }
    let all =
        (1..=5).map(|m| search_dense(&GeneratorConfig::swap(2, 2, m).with_seed(seed))).collect::<Result<Vec<_>>>()?;
    let all = Arc::new(all);
    cache.lock().expect("search cache").insert(seed, all.clone());
    Ok(all)
}

fn c01_quotient_dims(seed: u64) -> Result<Outcome> {
    let s = searches(seed)?;
    let dims: Vec<usize> = s.iter().map(|x| x.report.dims.quotient).collect();
    Ok(Outcome {
        pass: dims == [0, 0, 0, 0, 3],
        measured: format!("dim V/N for m=1..5: {dims:?}"),
        target: "[0, 0, 0, 0, 3]",
        tolerance: "exact",
    })
}

fn random_pair(d: usize, haar: bool, rng: &mut RngStream) -> Vec<ComplexMatrix> {
    (0..2).map(|_| if haar { haar_unitary(d, rng) } else { ginibre(d, d, rng) }).collect()
}

fn c02_fixture(opts: &ReproduceOptions, seed: u64) -> Result<Outcome> {
    let p = omega(opts)?;
    let mut rng = RngStream::new(seed, 0);
    let swap = swap_matrix(2);
    let (mut worst, mut nonzero, mut extended) = (0.0f64, 0, 0);
    for i in 0..200 {
        let xs = random_pair(2, i < 100, &mut rng);
        let mut val = p.evaluate(&xs)?;
        let mut fit = proportionality_fit(&val.matmul(&swap), &ComplexMatrix::identity(4))?;
        if fit.relative > 1e-9 {
            // f64 cancellation near a small scalar; re-evaluate in double-double.
            val = p.evaluate_extended(&xs)?.to_matrix();
            fit = proportionality_fit(&val.matmul(&swap), &ComplexMatrix::identity(4))?;
            extended += 1;
        }
        worst = worst.max(fit.relative);
        // Triangle-inequality scale Σ|g|·∏‖X‖ of the evaluation.
        let norms: Vec<f64> = xs.iter().map(|x| x.norm()).collect();
        let scale: f64 = p
            .terms()
            .map(|(ws, c)| c.norm() * ws.iter().flat_map(|w| w.letters()).map(|&l| norms[l as usize]).product::<f64>())
            .sum();
        if val.norm() > 1e-10 * scale {
            nonzero += 1;
        }
    }
    let shape_ok = p.term_count() == 40 && p.degrees() == [5, 5];
    Ok(Outcome {
        pass: shape_ok && worst <= 1e-9 && nonzero >= 198,
        measured: format!(
            "{} terms, degrees {:?}, worst residual {worst:.2e}, nonzero {nonzero}/200, {extended} draws re-evaluated in double-double",
            p.term_count(),
            p.degrees()
        ),
        target: "40 terms, (5,5), Ω·SWAP ∝ I, nonzero ≥ 99%",
        tolerance: "1e-9",
    })
}

fn mc(prog: &ProtocolProgram, trials: usize, seed: u64) -> Result<crate::protocol::SuccessEstimate> {
    monte_carlo(prog, &Sampler::Haar { d: 2 }, &MonteCarloOptions::new(trials, seed))
}

fn c03_rewind_probability(seed: u64) -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in 0..5usize {
        let prog = ProtocolProgram::single(qubit_rewind(s)?, Branching::Canonical)?;
        let e = mc(&prog, 100_000, seed.wrapping_add(s as u64))?;
        let target = 0.05 / f64::from(1u32 << s);
        pass &= (e.mean - target).abs() <= 0.25 * target;
        parts.push(format!("s={s}: {:.3e}", e.mean));
    }
    Ok(Outcome { pass, measured: parts.join(", "), target: "0.05·2^-s", tolerance: "±25%" })
}

fn c04_compressed_rewind(seed: u64) -> Result<Outcome> {
    let c = crate::constructions::commutator_step();
    let mut est = Vec::new();
    for (k, s) in [1usize, 8, 32].into_iter().enumerate() {
        let prog = ProtocolProgram::new(
            1,
            vw_names(),
            vec![
                Segment::poly(c.clone(), Branching::Compressed),
                Segment::Free { steps: s },
                Segment::poly(c.clone(), Branching::Compressed),
            ],
        )?;
        est.push((s, mc(&prog, 100_000, seed.wrapping_add(k as u64))?));
    }
    let in_band = est.iter().all(|(_, e)| (0.035..=0.065).contains(&e.mean));
    let mut consistent = true;
    for a in 0..est.len() {
        for b in a + 1..est.len() {
            let (ea, eb) = (&est[a].1, &est[b].1);
            consistent &= (ea.mean - eb.mean).abs() <= 3.0 * (ea.stderr.powi(2) + eb.stderr.powi(2)).sqrt();
        }
    }
    Ok(Outcome {
        pass: in_band && consistent,
        measured: est
            .iter()
            .map(|(s, e)| format!("s={s}: {:.4}±{:.1e}", e.mean, e.stderr))
            .collect::<Vec<_>>()
            .join(", "),
        target: "[0.035, 0.065], s-independent",
        tolerance: "3 combined stderr",
    })
}

fn c05_swap_probability(opts: &ReproduceOptions, seed: u64) -> Result<Outcome> {
    let prog = ProtocolProgram::single(omega(opts)?, Branching::Canonical)?;
    let e = mc(&prog, 100_000, seed)?;
    Ok(Outcome {
        pass: (0.005..=0.009).contains(&e.mean),
        measured: format!("{:.5}±{:.1e}", e.mean, e.stderr),
        target: "[0.005, 0.009]",
        tolerance: "band",
    })
}

fn c06_fast_forward_probability(opts: &ReproduceOptions, seed: u64) -> Result<Outcome> {
    let swaps = SwapPolys::uniform(2, omega(opts)?)?;
    let prog = ProtocolProgram::single(compose_fast_forward(2, 0, 4, &swaps)?, Branching::Compressed)?;
    let norm = prog.normalization_log2();
    let e = mc(&prog, 1_000_000, seed)?;
    Ok(Outcome {
        pass: norm == 20.0 && (1e-4..=4e-4).contains(&e.mean),
        measured: format!("{:.3e}±{:.1e} (normalization 2^{norm})", e.mean, e.stderr),
        target: "[1e-4, 4e-4], normalization 2^20",
        tolerance: "band",
    })
}

fn powers(v: &ComplexMatrix, k: i64) -> Result<ComplexMatrix> {
    Ok(if k >= 0 { v.pow(k as usize) } else { inverse(v)?.pow((-k) as usize) })
}

fn c07_fast_forward_correctness(opts: &ReproduceOptions, seed: u64) -> Result<Outcome> {
    let swaps = SwapPolys::uniform(2, omega(opts)?)?;
    let mut rng = RngStream::new(seed, 0);
    let mut worst = 0.0f64;
    let s = 2usize;
    // (n, j, forward?)
    let mut cases: Vec<(usize, usize, bool)> = vec![(2, 0, true), (2, 0, false)];
    for j in 0..3 {
        cases.push((3, j, true));
        cases.push((3, j, false));
    }
    for &(n, j, fwd) in &cases {
        let e = if fwd {
            compose_fast_forward(n, j, s, &swaps)?
        } else {
            compose_fast_rewind(n, j, &swaps, &qubit_rewind(s)?)?
        };
        let draws = if n == 2 { 50 } else { 10 };
        for i in 0..draws {
            let xs = random_pair(2, i % 2 == 0, &mut rng);
            let k = (n * s) as i64 * if fwd { 1 } else { -1 };
            let vj = powers(&xs[0], k)?;
            let id = ComplexMatrix::identity(2);
            let target = kron_all((0..n).map(|p| if p == j { &vj } else { &id }));
            let psi = random_state(1 << n, &mut rng);
            let got = e.evaluate(&xs)?.mul_vec(psi.amplitudes());
            let want = target.mul_vec(psi.amplitudes());
            let c = vec_inner(&want, &got) / vec_inner(&want, &want);
            let r: f64 = got.iter().zip(&want).map(|(g, w)| (g - c * w).norm_sqr()).sum::<f64>().sqrt()
                / crate::numkit::vec_norm(&got).max(f64::MIN_POSITIVE);
            worst = worst.max(r);
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-8,
        measured: format!("worst state residual {worst:.2e} over E/D for n=2 (50 draws) and E^j/D^j for n=3"),
        target: "E·ψ ∝ (V^{±ns} on j)·ψ",
        tolerance: "1e-8",
    })
}

fn c08_rewind_construction(seed: u64) -> Result<Outcome> {
    let mut rng = RngStream::new(seed, 0);
    let (mut worst, mut min_rate, mut degrees_ok) = (0.0f64, 1.0f64, true);
    for d in [2usize, 3] {
        for s in 0..=5usize {
            let r = rewind_poly(d, s)?;
            degrees_ok &= r.degrees()[0] == s * (d - 1) + d * d;
            let mut nonzero = 0;
            for _ in 0..50 {
                let xs: Vec<ComplexMatrix> = (0..r.n_vars()).map(|_| haar_unitary(d, &mut rng)).collect();
                let val = r.evaluate(&xs)?.matmul(&xs[0].pow(s));
                let fit = proportionality_fit(&val, &ComplexMatrix::identity(d))?;
                worst = worst.max(fit.relative);
                if fit.scalar.norm() > 1e-8 {
                    nonzero += 1;
                }
            }
            min_rate = min_rate.min(f64::from(nonzero) / 50.0);
        }
    }
    Ok(Outcome {
        pass: degrees_ok && worst <= 1e-8 && min_rate >= 0.95,
        measured: format!("degrees ok {degrees_ok}, worst residual {worst:.2e}, min nonzero rate {min_rate:.2}"),
        target: "deg s(d−1)+d², R·V^s ∝ I",
        tolerance: "1e-8, ≥95% nonzero",
    })
}

/// Every word of length m per party with i.i.d. complex normal coefficients.
fn full_random_poly(n: usize, m: usize, rng: &mut RngStream) -> Result<TensorPoly> {
    let terms = (0..1usize << (n * m)).map(|idx| {
        let words = (0..n).map(|k| Word::new((0..m).map(|i| ((idx >> (k * m + i)) & 1) as u16).collect())).collect();
        (complex_normal(rng), words)
    });
    let terms: Vec<_> = terms.collect();
    TensorPoly::from_terms(vw_names(), n, terms)
}

fn c09_oracle_equivalence(seed: u64) -> Result<Outcome> {
    let mut rng = RngStream::new(seed, 0);
    let (mut dp, mut df, mut cases) = (0.0f64, 0.0f64, 0);
    for _ in 0..50 {
        let model = HamiltonianModel::random(&RandomModelSpec::new(2, 2, rng.random_range(0.1..1.5)), &mut rng);
        let (v, w) = derive_vw(&model)?;
        for m in 1..=3 {
            for n in 1..=2 {
                let p = full_random_poly(n, m, &mut rng)?;
                let psi = random_state(1 << n, &mut rng);
                for b in [Branching::Canonical, Branching::Compressed] {
                    let prog = ProtocolProgram::single(p.clone(), b)?;
                    let fast = run_program(&prog, &[v.clone(), w.clone()], &psi)?;
                    let slow = reference_simulate(&prog, &model, &psi)?;
                    dp = dp.max((fast.prob - slow.prob).abs());
                    let f = match (&fast.state, &slow.state) {
                        (Some(a), Some(b)) => a.fidelity(b),
                        (None, None) => 1.0,
                        _ => 0.0,
                    };
                    df = df.max(1.0 - f);
                    cases += 1;
                }
            }
        }
    }
    Ok(Outcome {
        pass: dp <= 1e-10 && df <= 1e-10,
        measured: format!("{cases} cases: max |Δprob| {dp:.1e}, max 1−fidelity {df:.1e}"),
        target: "reference = shortcut",
        tolerance: "1e-10",
    })
}

fn c10_planner(seed: u64) -> Result<Outcome> {
    let mut rng = RngStream::new(seed, 0);
    let dy = |rng: &mut RngStream| f64::from(rng.random_range(-24i32..=24)) / 8.0;
    let cost = |d: usize, t: &[f64]| t.iter().map(|&x| if x >= 0.0 { x } else { (d - 1) as f64 * -x }).sum::<f64>();
    let (mut ok_feasible, mut ok_infeasible, mut ok_boundary) = (0, 0, 0);
    for i in 0..1000usize {
        let d = 2 + i % 3;
        let n = 1 + (i / 3) % 5;
        let targets: Vec<f64> = (0..n).map(|_| dy(&mut rng)).collect();
        let budget = (cost(d, &targets) / n as f64 * 64.0).ceil() / 64.0 + f64::from(rng.random_range(0..=8)) / 8.0;
        let q = FeasibilityQuery::new(d, budget, targets);
        let h0 = crate::numkit::random_hermitian(d, 1.0, &mut rng);
        if plan(&q).and_then(|s| verify_schedule(&s, &h0)).map(|v| v.pass).unwrap_or(false) {
            ok_feasible += 1;
        }
        let mut targets: Vec<f64> = (0..n).map(|_| dy(&mut rng)).collect();
        if targets.iter().all(|&t| t == 0.0) {
            targets[0] = 1.0;
        }
        let budget = cost(d, &targets) / n as f64 * rng.random_range(0.0..0.999);
        let q = FeasibilityQuery::new(d, budget, targets);
        if !feasible(&q).ok && plan(&q).is_err() {
            ok_infeasible += 1;
        }
    }
    for i in 0..100usize {
        let d = 2 + i % 3;
        let n = [1usize, 2, 4][i % 3];
        let targets: Vec<f64> = (0..n).map(|_| dy(&mut rng)).collect();
        let q = FeasibilityQuery::new(d, cost(d, &targets) / n as f64, targets);
        if plan(&q).map(|s| !s.has_padding()).unwrap_or(false) {
            ok_boundary += 1;
        }
    }
    Ok(Outcome {
        pass: ok_feasible == 1000 && ok_infeasible == 1000 && ok_boundary == 100,
        measured: format!(
            "feasible verified {ok_feasible}/1000, infeasible rejected {ok_infeasible}/1000, boundary unpadded {ok_boundary}/100"
        ),
        target: "all",
        tolerance: "1e-9",
    })
}

fn time_inner(a: &MpsVector, b: &MpsVector, reps: usize) -> Result<f64> {
    let mut best = f64::INFINITY;
    for _ in 0..5 {
        let t = Instant::now();
        let mut acc = C64::new(0.0, 0.0);
        for _ in 0..reps {
            acc += mps_inner(std::hint::black_box(a), std::hint::black_box(b))?;
        }
        std::hint::black_box(acc);
        best = best.min(t.elapsed().as_secs_f64() / reps as f64);
    }
    Ok(best)
}

fn c11_mps(seed: u64) -> Result<Outcome> {
    let mut worst = 0.0f64;
    for m in 1..=6 {
        let cfg = GeneratorConfig::swap(2, 2, m).with_seed(seed);
        let (a, b) = (MpsVector::sample(&cfg, 0)?, MpsVector::sample(&cfg, 1)?);
        let dense = vec_inner(&a.to_dense(), &b.to_dense());
        worst = worst.max((mps_inner(&a, &b)? - dense).norm() / dense.norm().max(f64::MIN_POSITIVE));
    }
    let ms = [10usize, 20, 30, 40];
    let mut times = Vec::new();
    for &m in &ms {
        let cfg = GeneratorConfig::swap(2, 2, m).with_seed(seed);
        let (a, b) = (MpsVector::sample(&cfg, 0)?, MpsVector::sample(&cfg, 1)?);
        times.push(time_inner(&a, &b, 200)?);
    }
    let xs: Vec<f64> = ms.iter().map(|&m| (m as f64).ln()).collect();
    let ys: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 4.0, ys.iter().sum::<f64>() / 4.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let t30 = times[2];
    Ok(Outcome {
        pass: worst <= 1e-9 && t30 <= 1.0 && (slope - 1.0).abs() <= 0.2,
        measured: format!("max rel diff {worst:.1e} (m≤6), m=30 inner {t30:.2e}s, scaling exponent {slope:.3}"),
        target: "dense agreement, ≤1 s at m=30, exponent 1",
        tolerance: "1e-9, ±0.2",
    })
}

fn c12_bundle(seed: u64) -> Result<Outcome> {
    let b = swap_poly_symbolic(2, seed)?;
    let mut rng = RngStream::new(seed, 1);
    let (mut worst, mut extended) = (0.0f64, 0);
    for i in 0..100 {
        let xs = b.random_assignment(&mut rng, i % 2 == 0);
        let mut c = check_bundle(&b, &xs)?;
        if c.worst() > 1e-8 {
            c = check_bundle_extended(&b, &xs)?;
            extended += 1;
        }
        worst = worst.max(c.worst());
    }
    Ok(Outcome {
        pass: worst <= 1e-8,
        measured: format!(
            "d=2 worst residual {worst:.2e} over 100 draws, {extended} re-evaluated in double-double (d=3 skipped by cost guard)"
        ),
        target: "G̃∝Π_S, H̃∝Π_A, S̃+Ã∝I, S̃−Ã∝SWAP",
        tolerance: "1e-8",
    })
}

fn c13_quotient_perm_span(search_seed: u64, seed: u64) -> Result<Outcome> {
    let s = searches(search_seed)?;
    let cfg = GeneratorConfig::swap(2, 2, 5).with_seed(search_seed);
    let polys = s[4].quotient_polys(&cfg)?;
    let mut rng = RngStream::new(seed, 0);
    let mut worst = 0.0f64;
    for p in &polys {
        for i in 0..20 {
            let xs = random_pair(2, i % 2 == 0, &mut rng);
            worst = worst.max(perm_span_residual(&p.evaluate(&xs)?, 2, 2)?);
        }
    }
    Ok(Outcome {
        pass: !polys.is_empty() && worst <= 1e-9,
        measured: format!("{} quotient polynomials, worst residual {worst:.2e}", polys.len()),
        target: "evaluations in span{I, SWAP}",
        tolerance: "1e-9",
    })
}

fn c14_dim_bound(seed: u64) -> Result<Outcome> {
    let s = searches(seed)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, x) in s.iter().enumerate() {
        let m = i + 1;
        let bound = dim_bound(m, 2, 2)?;
        let n = x.report.dims.nperp;
        ok &= (n as u128) <= bound && n <= x.report.ambient;
        parts.push(format!("m={m}: {n}≤{bound}"));
    }
    let b5 = dim_bound(5, 2, 2)?;
    Ok(Outcome {
        pass: ok && b5 == 77792,
        measured: format!("{}; bound(5,2,2)={b5}", parts.join(", ")),
        target: "dim N⊥ ≤ bound, bound(5,2,2)=77792",
        tolerance: "exact",
    })
}

fn c15_gamma(seed: u64) -> Result<Outcome> {
    let mut rng = RngStream::new(seed, 0);
    let mut ok = 0;
    for i in 0..1000 {
        let d = 2 + i % 5;
        if gamma_conjugation_check(d, &random_diagonal(d, &mut rng), 1e-10)? {
            ok += 1;
        }
    }
    Ok(Outcome { pass: ok == 1000, measured: format!("{ok}/1000"), target: "all hold", tolerance: "1e-10" })
}

fn c16_sparsify(search_seed: u64, seed: u64) -> Result<Outcome> {
    let s = searches(search_seed)?;
    let null = orthocomplement(&s[4].nperp, seed)?;
    let mut opts = SparsifyOptions::new(swap_matrix(2), 2, 2, 5, default_var_names(2));
    opts.seed = seed;
    let r = sparsify_quotient(&s[4].quotient, &null, &opts)?;
    Ok(Outcome {
        pass: r.terms <= 40 && r.verification.passed(),
        measured: format!("{} terms, verified {}/{} draws", r.terms, r.verification.passes, r.verification.draws),
        target: "≤ 40 terms, verified SWAP polynomial",
        tolerance: "1e-9",
    })
}

/// The compressed fast-forward program of criterion 6 (exposed for the CLI).
pub fn fast_forward_program(omega: &TensorPoly, s: usize) -> Result<ProtocolProgram> {
    let swaps = SwapPolys::uniform(2, omega.clone())?;
    ProtocolProgram::single(compose_fast_forward(2, 0, s, &swaps)?, Branching::Compressed)
}
