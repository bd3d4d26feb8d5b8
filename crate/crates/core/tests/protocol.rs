use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::Rng;
use tempoly::constructions::qubit_rewind;
use tempoly::ncpoly::{vw_names, PolyExpr, TensorPoly, Word};
use tempoly::numkit::{
    complex_normal, haar_unitary, kron, kron_all, random_state, ComplexMatrix, RngStream, StateVector,
};
use tempoly::protocol::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn to_na(m: &ComplexMatrix) -> DMatrix<C64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// exp(−iHt) for Hermitian H by eigendecomposition.
fn unitary_by_eigen(h: &ComplexMatrix, t: f64) -> DMatrix<C64> {
    let eig = to_na(h).symmetric_eigen();
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(0.0, -l * t).exp()));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

fn model(seed: u64) -> HamiltonianModel {
    HamiltonianModel::random(&RandomModelSpec::new(2, 2, 0.7), &mut RngStream::new(seed, 0))
}

fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
    a.fidelity(b)
}

/// All words of length m over {V, W} per party, random coefficients, a
/// random subset of terms kept.
fn random_poly(n: usize, m: usize, rng: &mut RngStream) -> TensorPoly {
    let total = 1usize << (n * m);
    loop {
        let mut terms: Vec<(C64, Vec<Word>)> = Vec::new();
        for idx in 0..total {
            if rng.random_bool(0.6) {
                let words =
                    (0..n).map(|k| Word::new((0..m).map(|i| ((idx >> (k * m + i)) & 1) as u16).collect())).collect();
                terms.push((complex_normal(rng), words));
            }
        }
        if let Ok(p) = TensorPoly::from_terms(vw_names(), n, terms) {
            return p;
        }
    }
}

#[test]
fn derive_vw_trivial_cases() {
    let mut m = model(1);
    m.hi = ComplexMatrix::zeros(4, 4);
    m.hp = ComplexMatrix::zeros(2, 2);
    m.phi_out = m.phi_in.clone();
    let (v, w) = derive_vw(&m).unwrap();
    assert!((&v - &w).max_abs() < 1e-12);

    let mut m = model(2);
    m.hi = ComplexMatrix::zeros(4, 4);
    m.hp = ComplexMatrix::zeros(2, 2);
    m.phi_in = StateVector::basis(2, 0);
    m.phi_out = StateVector::basis(2, 1);
    let (_, w) = derive_vw(&m).unwrap();
    assert!(w.max_abs() < 1e-12);
}

#[test]
fn derive_vw_matches_full_space_contraction() {
    for seed in 0..10 {
        let m = model(seed);
        let (v, w) = derive_vw(&m).unwrap();
        let u = unitary_by_eigen(&m.joint_hamiltonian(), m.dt);
        // (I ⊗ ⟨φ̃|) U (I ⊗ |φ⟩) as explicit rectangular matrices.
        let bra = ComplexMatrix::from_fn(1, 2, |_, j| m.phi_out.amplitudes()[j].conj());
        let ket = ComplexMatrix::from_fn(2, 1, |i, _| m.phi_in.amplitudes()[i]);
        let left = to_na(&kron(&ComplexMatrix::identity(2), &bra));
        let right = to_na(&kron(&ComplexMatrix::identity(2), &ket));
        let oracle = left * u * right;
        let diff = (to_na(&w) - &oracle).norm();
        assert!(diff < 1e-10, "seed {seed}: {diff}");
        let sv = to_na(&w).singular_values();
        assert!(sv.max() <= 1.0 + 1e-12);
        let v_oracle = unitary_by_eigen(&m.h0, m.dt);
        assert!((to_na(&v) - v_oracle).norm() < 1e-10);
    }
}

#[test]
fn single_letter_probabilities() {
    let p = TensorPoly::from_strs(&["V", "W"], &[(1.0, "V")]).unwrap();
    let mut rng = RngStream::new(3, 0);
    let xs = vec![haar_unitary(2, &mut rng), haar_unitary(2, &mut rng)];
    let psi = random_state(2, &mut rng);
    let canon = success_probability(&p.clone().into(), &xs, &psi, Branching::Canonical).unwrap();
    let comp = success_probability(&p.into(), &xs, &psi, Branching::Compressed).unwrap();
    assert!((canon.prob - 0.5).abs() < 1e-12);
    assert!((comp.prob - 1.0).abs() < 1e-12);
    let expect = StateVector::new(xs[0].mul_vec(psi.amplitudes()));
    assert!(fidelity(comp.state.as_ref().unwrap(), &expect) > 1.0 - 1e-12);
}

#[test]
fn zero_state_is_flagged() {
    let p = TensorPoly::from_strs(&["V", "W"], &[(1.0, "W")]).unwrap();
    let xs = vec![ComplexMatrix::identity(2), ComplexMatrix::zeros(2, 2)];
    let o = success_probability(&p.into(), &xs, &StateVector::basis(2, 0), Branching::Canonical).unwrap();
    assert!(o.is_zero() && o.prob == 0.0);
}

fn shortcut_vs_reference(prog: &ProtocolProgram, m: &HamiltonianModel, psi: &StateVector) {
    let (v, w) = derive_vw(m).unwrap();
    let fast = run_program(prog, &[v, w], psi).unwrap();
    let slow = reference_simulate(prog, m, psi).unwrap();
    assert!((fast.prob - slow.prob).abs() <= 1e-10, "{} vs {}", fast.prob, slow.prob);
    match (&fast.state, &slow.state) {
        (Some(a), Some(b)) => assert!(fidelity(a, b) >= 1.0 - 1e-10),
        (None, None) => {}
        _ => panic!("one route annihilated the state"),
    }
}

#[test]
fn reference_matches_shortcut_small_cases() {
    let m = model(5);
    let psi = random_state(2, &mut RngStream::new(5, 1));
    let sum = TensorPoly::from_strs(&["V", "W"], &[(1.0, "V"), (1.0, "W")]).unwrap();
    let comm = TensorPoly::from_strs(&["V", "W"], &[(1.0, "WV"), (-1.0, "VW")]).unwrap();
    for p in [sum, comm] {
        for b in [Branching::Canonical, Branching::Compressed] {
            shortcut_vs_reference(&ProtocolProgram::single(p.clone(), b).unwrap(), &m, &psi);
        }
    }
}

#[test]
fn reference_matches_shortcut_random_polys() {
    let mut rng = RngStream::new(6, 0);
    for trial in 0..50u64 {
        let m = model(100 + trial);
        let (n, deg) = [(1, 1), (1, 2), (1, 3), (1, 4), (2, 1), (2, 2)][trial as usize % 6];
        let p = random_poly(n, deg, &mut rng);
        let psi = random_state(1 << n, &mut rng);
        let b = if trial % 2 == 0 { Branching::Canonical } else { Branching::Compressed };
        shortcut_vs_reference(&ProtocolProgram::single(p, b).unwrap(), &m, &psi);
    }
}

#[test]
fn reference_handles_sequential_programs() {
    let comm = TensorPoly::from_strs(&["V", "W"], &[(1.0, "WV"), (-1.0, "VW")]).unwrap();
    let prog = ProtocolProgram::new(
        1,
        vw_names(),
        vec![
            Segment::poly(comm.clone(), Branching::Compressed),
            Segment::Free { steps: 3 },
            Segment::poly(comm, Branching::Compressed),
        ],
    )
    .unwrap();
    for seed in 0..5 {
        shortcut_vs_reference(&prog, &model(200 + seed), &random_state(2, &mut RngStream::new(seed, 9)));
    }
}

#[test]
fn decoupled_probe_reduces_w_to_v() {
    let mut m = model(7);
    m.hi = ComplexMatrix::zeros(4, 4);
    m.hp = ComplexMatrix::zeros(2, 2);
    m.phi_out = m.phi_in.clone();
    let p = TensorPoly::from_strs(&["V", "W"], &[(1.0, "WVW"), (0.5, "VVW"), (-2.0, "WWV")]).unwrap();
    let psi = random_state(2, &mut RngStream::new(7, 0));
    let slow =
        reference_simulate(&ProtocolProgram::single(p.clone(), Branching::Canonical).unwrap(), &m, &psi).unwrap();
    let (v, _) = derive_vw(&m).unwrap();
    let fast = success_probability(&p.into(), &[v.clone(), v], &psi, Branching::Canonical).unwrap();
    assert!((fast.prob - slow.prob).abs() < 1e-10);
}

#[test]
fn reference_guard() {
    let w = Word::parse("VWVWVWVWVWVW", &vw_names()).unwrap();
    let p = TensorPoly::monomial(vw_names(), vec![w.clone(), w], c(1.0)).unwrap();
    let prog = ProtocolProgram::single(p, Branching::Canonical).unwrap();
    let e = reference_simulate(&prog, &model(1), &StateVector::basis(4, 0)).unwrap_err();
    assert_eq!(e.kind(), "guard");
}

#[test]
fn rewind_probability_independent_of_psi() {
    let p: PolyExpr = qubit_rewind(2).unwrap().into();
    let mut rng = RngStream::new(8, 0);
    let xs = vec![haar_unitary(2, &mut rng), haar_unitary(2, &mut rng)];
    let probs: Vec<f64> = (0..100)
        .map(|_| success_probability(&p, &xs, &random_state(2, &mut rng), Branching::Canonical).unwrap().prob)
        .collect();
    let (lo, hi) = probs.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(hi - lo <= 1e-10);
}

#[test]
fn program_of_free_segments() {
    let prog =
        ProtocolProgram::new(2, vw_names(), vec![Segment::Free { steps: 2 }, Segment::Free { steps: 3 }]).unwrap();
    let mut rng = RngStream::new(9, 0);
    let xs = vec![haar_unitary(2, &mut rng), haar_unitary(2, &mut rng)];
    let psi = random_state(4, &mut rng);
    let o = run_program(&prog, &xs, &psi).unwrap();
    assert!((o.prob - 1.0).abs() < 1e-12);
    let v5 = xs[0].pow(5);
    let expect = StateVector::new(kron(&v5, &v5).mul_vec(psi.amplitudes()));
    assert!(fidelity(o.state.as_ref().unwrap(), &expect) > 1.0 - 1e-12);
}

#[test]
fn program_equals_expanded_product() {
    let mut rng = RngStream::new(10, 0);
    let a = random_poly(2, 2, &mut rng);
    let b = random_poly(2, 1, &mut rng);
    let prog = ProtocolProgram::new(
        2,
        vw_names(),
        vec![Segment::poly(a.clone(), Branching::Canonical), Segment::poly(b.clone(), Branching::Canonical)],
    )
    .unwrap();
    let xs = vec![haar_unitary(2, &mut rng), haar_unitary(2, &mut rng)];
    let psi = random_state(4, &mut rng);
    // b acts after a, so it is the left factor.
    let product = b.mul(&a).unwrap();
    let one = run_program(&prog, &xs, &psi).unwrap();
    let two = success_probability(&product.into(), &xs, &psi, Branching::Canonical).unwrap();
    assert!((one.prob - two.prob).abs() <= 1e-12 * two.prob.max(1e-300));
}

#[test]
fn normalization_counts_from_profile() {
    // Hand count: VW − WV has both letters in both columns; WVVW + WWVW
    // branches only in the second column.
    let comm = TensorPoly::from_strs(&["V", "W"], &[(1.0, "VW"), (-1.0, "WV")]).unwrap();
    let q = TensorPoly::from_strs(&["V", "W"], &[(1.0, "WVVW"), (1.0, "WWVW")]).unwrap();
    assert_eq!(normalization_log2(&comm.column_profile(), 2, Branching::Canonical), 2.0);
    assert_eq!(normalization_log2(&comm.column_profile(), 2, Branching::Compressed), 2.0);
    assert_eq!(normalization_log2(&q.column_profile(), 2, Branching::Canonical), 4.0);
    assert_eq!(normalization_log2(&q.column_profile(), 2, Branching::Compressed), 1.0);
}

#[test]
fn monte_carlo_trivial_and_deterministic() {
    let p = TensorPoly::from_strs(&["V", "W"], &[(1.0, "V")]).unwrap();
    let prog = ProtocolProgram::single(p, Branching::Compressed).unwrap();
    let est = monte_carlo(&prog, &Sampler::Haar { d: 2 }, &MonteCarloOptions::new(50, 1)).unwrap();
    assert!((est.mean - 1.0).abs() < 1e-12 && est.stderr < 1e-12);

    let prog = ProtocolProgram::single(qubit_rewind(1).unwrap(), Branching::Canonical).unwrap();
    let opts = MonteCarloOptions::new(300, 4).keep_trials();
    let a = monte_carlo(&prog, &Sampler::Haar { d: 2 }, &opts).unwrap();
    let b = monte_carlo(&prog, &Sampler::Haar { d: 2 }, &opts).unwrap();
    assert_eq!(a.per_trial, b.per_trial);
    let trials = a.per_trial.unwrap();
    let mean = trials.iter().sum::<f64>() / trials.len() as f64;
    let sd = (trials.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (trials.len() - 1) as f64).sqrt();
    assert!((a.mean - mean).abs() < 1e-15);
    assert!((a.stderr - sd / (trials.len() as f64).sqrt()).abs() < 1e-15);
    assert!(trials.iter().all(|&x| (0.0..=1.0).contains(&x)));
}

#[test]
fn monte_carlo_model_sampler() {
    let comm = TensorPoly::from_strs(&["V", "W"], &[(1.0, "VW"), (-1.0, "WV")]).unwrap();
    let prog = ProtocolProgram::single(comm, Branching::Canonical).unwrap();
    let sampler = Sampler::Model(ModelSource::Random(RandomModelSpec::new(2, 2, 0.5)));
    let est = monte_carlo(&prog, &sampler, &MonteCarloOptions::new(64, 2)).unwrap();
    assert!(est.mean > 0.0 && est.mean <= 1.0);
}

#[test]
fn card_for_rewinder() {
    let card = experiment_card(&qubit_rewind(2).unwrap()).unwrap();
    assert_eq!(card.degree, 6);
    let actions: Vec<&str> = card.parties[0].steps.iter().map(|s| s.action).collect();
    assert_eq!(actions, ["branch", "branch", "free", "free", "branch", "branch"]);
    let total: f64 = card.post_selection.iter().map(|a| a.re * a.re + a.im * a.im).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(card.canonical_normalization_log2, 6.0);
    assert_eq!(card.compressed_normalization_log2, 4.0);

    let v = TensorPoly::from_strs(&["V", "W"], &[(1.0, "VV")]).unwrap();
    let card = experiment_card(&v).unwrap();
    assert!(card.free_evolution_only);
    assert_eq!(card.parties[0].summary, "free evolution only");
}

#[test]
fn card_memory_strings_are_chronological() {
    let p = TensorPoly::from_strs(&["V", "W"], &[(1.0, "VVW")]).unwrap();
    let card = experiment_card(&p).unwrap();
    // W acts first, so the first register holds letter 1.
    assert_eq!(card.post_selection[0].memory, "100");
}

#[test]
fn program_json_round_trip() {
    let comm = TensorPoly::from_strs(&["V", "W"], &[(1.0, "WV"), (-1.0, "VW")]).unwrap();
    let prog = ProtocolProgram::new(
        1,
        vw_names(),
        vec![
            Segment::poly(comm.clone(), Branching::Compressed),
            Segment::Free { steps: 4 },
            Segment::poly(PolyExpr::product(vec![comm.clone().into(), comm.into()]).unwrap(), Branching::Canonical),
        ],
    )
    .unwrap()
    .with_dt(0.1);
    let v = program_to_value(&prog, None);
    let (back, _) = program_from_value(v.clone()).unwrap();
    assert_eq!(program_to_value(&back, None), v);
    assert_eq!(back.total_steps(), 10);
    assert!((back.duration().unwrap() - 1.0).abs() < 1e-12);
    let mut rng = RngStream::new(11, 0);
    let xs = vec![haar_unitary(2, &mut rng), haar_unitary(2, &mut rng)];
    let psi = random_state(2, &mut rng);
    assert_eq!(run_program(&prog, &xs, &psi).unwrap().prob, run_program(&back, &xs, &psi).unwrap().prob);

    let bad =
        serde_json::json!({"format":"tempoly-program","n_parties":1,"var_names":["V","W"],"segments":[],"extra":1});
    assert!(program_from_value(bad).is_err());
}

#[test]
fn unequal_party_degrees_rejected() {
    let p = TensorPoly::from_terms(vw_names(), 2, [(c(1.0), vec![Word::new(vec![0]), Word::new(vec![0, 1])])]).unwrap();
    let e = ProtocolProgram::single(p, Branching::Canonical).unwrap_err();
    assert_eq!(e.kind(), "homogeneity");
}

#[test]
fn free_segment_matches_hamiltonian_evolution() {
    let m = model(12);
    let (v, _) = derive_vw(&m).unwrap();
    let prog = ProtocolProgram::new(2, vw_names(), vec![Segment::Free { steps: 3 }]).unwrap();
    let psi = random_state(4, &mut RngStream::new(12, 1));
    let slow = reference_simulate(&prog, &m, &psi).unwrap();
    let v3 = v.pow(3);
    let expect = StateVector::new(kron_all([&v3, &v3]).mul_vec(psi.amplitudes()));
    assert!(fidelity(slow.state.as_ref().unwrap(), &expect) > 1.0 - 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn compressed_dominates_canonical(seed in 0u64..10_000, n in 1usize..3, m in 1usize..4) {
        let mut rng = RngStream::new(seed, 0);
        let p: PolyExpr = random_poly(n, m, &mut rng).into();
        let xs = vec![haar_unitary(2, &mut rng), haar_unitary(2, &mut rng)];
        let psi = random_state(1 << n, &mut rng);
        let a = success_probability(&p, &xs, &psi, Branching::Canonical).unwrap();
        let b = success_probability(&p, &xs, &psi, Branching::Compressed).unwrap();
        prop_assert!(b.prob >= a.prob * (1.0 - 1e-12));
        // Cauchy–Schwarz over the 2^{nm} unitary words.
        prop_assert!(a.prob <= p.as_leaf().unwrap().coefficient_norm_sq() * (1.0 + 1e-12));
    }
}
