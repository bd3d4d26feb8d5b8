use num_complex::Complex64 as C64;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::Rng;
use tempoly::constructions::{Rewinder, SwapPolys};
use tempoly::numkit::{expm, haar_unitary, kron, proportionality_fit, random_hermitian, RngStream};
use tempoly::planner::*;

fn q(d: usize, budget: f64, targets: &[f64]) -> FeasibilityQuery {
    FeasibilityQuery::new(d, budget, targets.to_vec())
}

fn r(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap()
}

#[test]
fn feasibility_examples() {
    let a = feasible(&q(2, 1.0, &[-1.0]));
    assert!(a.ok && a.slack == 0.0);
    assert!(!feasible(&q(3, 1.0, &[-1.0])).ok);
    let c = feasible(&q(2, 1.0, &[2.0, 0.0]));
    assert!(c.ok && c.slack == 0.0);
}

#[test]
fn plan_mixed_targets() {
    let s = plan(&q(2, 1.0, &[1.0, -0.5])).unwrap();
    let expect = vec![
        Phase::Transfer { system: 0, tau: r(0.5) },
        Phase::Rewind { system: 1, tau: r(0.25) },
        Phase::Transfer { system: 0, tau: r(0.125) },
        Phase::Rewind { system: 0, tau: r(0.125) },
    ];
    assert_eq!(s.phases, expect);
    assert_eq!(s.totals, vec![1.0, -0.5]);
    assert_eq!(s.exact_duration(), r(1.0));
    assert!(s.has_padding());
}

#[test]
fn plan_trivial_cases() {
    let s = plan(&q(3, 1.0, &[0.0, 0.0])).unwrap();
    assert_eq!(s.phases.len(), 2);
    assert_eq!(s.exact_duration(), r(1.0));
    assert_eq!(s.phases[0], Phase::Transfer { system: 0, tau: BigRational::new(1.into(), 3.into()) });

    let s = plan(&q(2, 1.5, &[1.5, 1.5, 1.5])).unwrap();
    assert_eq!(s.phases, vec![Phase::Free { tau: r(1.5) }]);

    let s = plan(&q(2, 1.0, &[-1.0])).unwrap();
    assert!(!s.has_padding());

    assert_eq!(plan(&q(3, 1.0, &[-1.0])).unwrap_err().kind(), "infeasible");
}

fn dyadic(rng: &mut RngStream, lo: i64, hi: i64) -> f64 {
    rng.random_range(lo..=hi) as f64 / 8.0
}

/// Oracle cost, computed independently of the library.
fn cost(d: usize, t: &[f64]) -> f64 {
    t.iter().map(|&x| if x >= 0.0 { x } else { (d - 1) as f64 * -x }).sum()
}

#[test]
fn random_feasible_queries_verify() {
    let mut rng = RngStream::new(10, 0);
    for i in 0..1000 {
        let d = 2 + i % 3;
        let n = 1 + (i / 3) % 5;
        let targets: Vec<f64> = (0..n).map(|_| dyadic(&mut rng, -24, 24)).collect();
        let min_budget = ((cost(d, &targets) / n as f64) * 64.0).ceil() / 64.0;
        let budget = min_budget + dyadic(&mut rng, 0, 8);
        let query = q(d, budget, &targets);
        assert!(feasible(&query).ok);
        let s = plan(&query).unwrap();
        assert_eq!(s.exact_duration(), r(budget));
        assert_eq!(s.exact_totals(), targets.iter().map(|&t| r(t)).collect::<Vec<_>>());
        let h0 = random_hermitian(d, 1.0, &mut rng);
        let v = verify_schedule(&s, &h0).unwrap();
        assert!(v.pass, "query {query:?}: {v:?}");
    }
}

#[test]
fn random_infeasible_queries_rejected() {
    let mut rng = RngStream::new(11, 0);
    for i in 0..1000 {
        let d = 2 + i % 3;
        let n = 1 + (i / 3) % 5;
        let mut targets: Vec<f64> = (0..n).map(|_| dyadic(&mut rng, -24, 24)).collect();
        if targets.iter().all(|&t| t == 0.0) {
            targets[0] = 1.0;
        }
        let budget = cost(d, &targets) / n as f64 * rng.random_range(0.0..0.999);
        let query = q(d, budget, &targets);
        assert!(!feasible(&query).ok);
        assert_eq!(plan(&query).unwrap_err().kind(), "infeasible");
    }
}

#[test]
fn boundary_instances_have_no_padding() {
    let mut rng = RngStream::new(12, 0);
    for i in 0..200 {
        let d = 2 + i % 3;
        let n = [1usize, 2, 4][i % 3];
        let targets: Vec<f64> = (0..n).map(|_| dyadic(&mut rng, -24, 24)).collect();
        let budget = cost(d, &targets) / n as f64;
        let query = q(d, budget, &targets);
        assert!(feasible(&query).slack.abs() < 1e-12);
        let s = plan(&query).unwrap();
        assert!(!s.has_padding(), "{query:?}");
    }
}

#[test]
fn corrupted_phase_is_named() {
    let mut s = plan(&q(2, 1.0, &[1.0, -0.5])).unwrap();
    s.phases[1] = Phase::Rewind { system: 1, tau: r(0.3) };
    let h0 = random_hermitian(2, 1.0, &mut RngStream::new(1, 0));
    let v = verify_schedule(&s, &h0).unwrap();
    assert!(!v.pass);
    assert!(!v.systems[1].pass && v.systems[0].pass);
    assert!(v.suspect_phases.iter().any(|p| p == "rewind(1, 0.3)"));

    let empty = plan(&q(2, 0.0, &[0.0])).unwrap();
    assert!(empty.phases.is_empty());
    assert!(verify_schedule(&empty, &h0).unwrap().pass);
}

proptest! {
    #[test]
    fn feasibility_monotone_in_budget(
        targets in proptest::collection::vec(-5.0f64..5.0, 1..5),
        d in 2usize..5,
        b in 0.0f64..10.0,
        extra in 0.0f64..5.0,
    ) {
        let a = feasible(&FeasibilityQuery::new(d, b, targets.clone()));
        let c = feasible(&FeasibilityQuery::new(d, b + extra, targets));
        prop_assert!(!a.ok || c.ok);
    }
}

fn omega_swaps() -> SwapPolys {
    SwapPolys::uniform(2, tempoly::fixtures::omega().unwrap()).unwrap()
}

#[test]
fn compile_free_phase() {
    let s = plan(&q(2, 1.0, &[1.0])).unwrap();
    let c = compile(&s, 0.1, None, Rewinder::Qubit).unwrap();
    assert_eq!(c.report.total_steps, 10);
    assert_eq!(c.report.phases[0].rounding_error, 0.0);
    assert_eq!(c.report.overhead_steps, 0);
}

#[test]
fn compile_transfer_degree() {
    let s = plan(&q(2, 0.5, &[1.0, 0.0])).unwrap();
    assert_eq!(s.phases, vec![Phase::Transfer { system: 0, tau: r(0.5) }]);
    let c = compile(&s, 0.05, Some(&omega_swaps()), Rewinder::Qubit).unwrap();
    let p = &c.report.phases[0];
    assert_eq!((p.steps, p.degree, p.overhead_steps), (10, 20, 10));
    assert_eq!(c.report.achieved_steps, vec![20, 0]);
}

#[test]
fn compile_rejects_coarse_dt() {
    let s = plan(&q(2, 1.0, &[1.0, -0.5])).unwrap();
    assert!(compile(&s, 0.2, Some(&omega_swaps()), Rewinder::Qubit).is_err());
    assert!(compile(&s, 0.125, None, Rewinder::Qubit).is_err());
}

#[test]
fn compiled_program_realizes_translations() {
    let dt = 0.125;
    let s = plan(&q(2, 1.0, &[1.0, -0.5])).unwrap();
    let c = compile(&s, dt, Some(&omega_swaps()), Rewinder::Qubit).unwrap();
    assert_eq!(c.report.achieved_steps, vec![8, -4]);
    assert!(c.report.translation_error.iter().all(|e| e.abs() < 1e-15));
    let mut rng = RngStream::new(13, 0);
    let h0 = random_hermitian(2, 1.0, &mut rng);
    let v = expm(&h0.scale(C64::new(0.0, -dt))).unwrap();
    let w = haar_unitary(2, &mut rng);
    let op = tempoly::protocol::program_operator(&c.program, &[v.clone(), w]).unwrap().to_matrix();
    let vinv = expm(&h0.scale(C64::new(0.0, dt))).unwrap();
    let expect = kron(&v.pow(8), &vinv.pow(4));
    let fit = proportionality_fit(&op, &expect).unwrap();
    assert!(fit.relative < 1e-8, "{}", fit.relative);
}

#[test]
fn compiled_qutrit_rewind() {
    let s = plan(&q(3, 1.0, &[-0.5])).unwrap();
    let c = compile(&s, 0.25, None, Rewinder::Formanek { d: 3 }).unwrap();
    assert_eq!(c.report.achieved_steps, vec![-2]);
    assert_eq!(c.report.phases[0].degree, 2 * 2 + 9);
    let mut rng = RngStream::new(14, 0);
    let v = haar_unitary(3, &mut rng);
    let w = tempoly::numkit::ginibre(3, 3, &mut rng);
    let op = tempoly::protocol::program_operator(&c.program, &[v.clone(), w]).unwrap().to_matrix();
    let vinv = v.adjoint();
    let fit = proportionality_fit(&op, &vinv.pow(2)).unwrap();
    assert!(fit.relative < 1e-8);
}

#[test]
fn overhead_vanishes_linearly_in_dt() {
    let s = plan(&q(2, 1.0, &[1.0, -0.5])).unwrap();
    let swaps = omega_swaps();
    let ex: Vec<f64> = [0.125, 0.0625, 0.03125]
        .iter()
        .map(|&dt| compile(&s, dt, Some(&swaps), Rewinder::Qubit).unwrap().report.duration_excess)
        .collect();
    assert!(ex[0] > 0.0);
    assert!((ex[1] / ex[0] - 0.5).abs() < 1e-12 && (ex[2] / ex[1] - 0.5).abs() < 1e-12);
}
