use num_complex::Complex64 as C64;
use proptest::prelude::*;
use rand::Rng;
use tempoly::ncpoly::*;
use tempoly::numkit::*;

fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn random_poly(n: usize, m: usize, n_vars: usize, rng: &mut RngStream) -> TensorPoly {
    let mut b = TensorPoly::builder(default_names(n_vars), n).with_degrees(vec![m; n]);
    for _ in 0..6 {
        let words =
            (0..n).map(|_| Word::new((0..m).map(|_| rng.random_range(0..n_vars) as Letter).collect())).collect();
        b.add(complex_normal(rng), words).unwrap();
    }
    b.finish().unwrap()
}

fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("X{i}")).collect()
}

/// Term-by-term oracle: Σ c · ⊗ₖ (product of letters of word k).
fn oracle_eval(p: &TensorPoly, xs: &[ComplexMatrix]) -> ComplexMatrix {
    let d = xs[0].rows();
    let dim = d.pow(p.n_parties() as u32);
    let mut acc = ComplexMatrix::zeros(dim, dim);
    for (words, c) in p.terms() {
        let parts: Vec<ComplexMatrix> = words
            .iter()
            .map(|w| w.letters().iter().fold(ComplexMatrix::identity(d), |m, &l| m.matmul(&xs[l as usize])))
            .collect();
        acc.axpy(*c, &kron_all(&parts));
    }
    acc
}

#[test]
fn evaluation_matches_term_oracle() {
    let mut rng = RngStream::new(20, 0);
    for n in 1..4 {
        for m in 0..4 {
            let p = random_poly(n, m, 3, &mut rng);
            let xs: Vec<_> = (0..3).map(|_| ginibre(2, 2, &mut rng)).collect();
            let want = oracle_eval(&p, &xs);
            assert!(max_diff(&p.evaluate(&xs).unwrap(), &want) < 1e-10 * (1.0 + want.norm()));
            assert!(
                max_diff(&PolyExpr::leaf(p.clone()).evaluate_scaled(&xs).unwrap().to_matrix(), &want)
                    < 1e-10 * (1.0 + want.norm())
            );
        }
    }
}

#[test]
fn product_and_tensor_are_homomorphic() {
    let mut rng = RngStream::new(21, 0);
    let a = random_poly(2, 2, 2, &mut rng);
    let b = random_poly(2, 3, 2, &mut rng);
    let xs: Vec<_> = (0..2).map(|_| ginibre(2, 2, &mut rng)).collect();
    let (ea, eb) = (a.evaluate(&xs).unwrap(), b.evaluate(&xs).unwrap());
    assert!(max_diff(&a.mul(&b).unwrap().evaluate(&xs).unwrap(), &ea.matmul(&eb)) < 1e-10);
    assert!(
        max_diff(
            &PolyExpr::product(vec![a.clone().into(), b.clone().into()]).unwrap().evaluate(&xs).unwrap(),
            &ea.matmul(&eb)
        ) < 1e-10
    );
    let one = random_poly(1, 2, 2, &mut rng);
    let t = a.tensor(&one).unwrap();
    assert_eq!(t.n_parties(), 3);
    assert!(max_diff(&t.evaluate(&xs).unwrap(), &kron(&ea, &one.evaluate(&xs).unwrap())) < 1e-10);
}

#[test]
fn unequal_degrees_rejected() {
    let mut b = TensorPoly::builder(default_names(2), 1);
    b.add(C64::new(1.0, 0.0), vec![Word::new(vec![0, 1])]).unwrap();
    assert!(b.add(C64::new(1.0, 0.0), vec![Word::new(vec![0])]).is_err());
}

#[test]
fn json_round_trip_is_exact() {
    let mut rng = RngStream::new(22, 0);
    let p = random_poly(2, 3, 2, &mut rng);
    let bytes = json::serialize_with(&p, Some(serde_json::json!({"note": "x"})));
    let doc = json::parse_document(&bytes).unwrap();
    assert_eq!(doc.poly, p);
    assert_eq!(doc.metadata.unwrap()["note"], "x");
    assert!(json::parse(b"{\"n_parties\": 1}").is_err());
}

#[test]
fn expression_documents_round_trip() {
    let mut rng = RngStream::new(23, 0);
    let a = random_poly(2, 2, 2, &mut rng);
    let b = random_poly(2, 1, 2, &mut rng);
    let e = PolyExpr::product(vec![a.into(), PolyExpr::scalar(C64::new(0.0, 2.0), b.into())]).unwrap();
    let v = expr_to_value(&e, None);
    assert!(is_expr_document(&v));
    let (back, _) = load_any(&serde_json::to_vec(&v).unwrap()).unwrap();
    let xs: Vec<_> = (0..2).map(|_| ginibre(2, 2, &mut rng)).collect();
    assert!(max_diff(&back.evaluate(&xs).unwrap(), &e.evaluate(&xs).unwrap()) < 1e-12);
    let flat = e.expand(EXPAND_LIMIT).unwrap();
    assert!(max_diff(&flat.evaluate(&xs).unwrap(), &e.evaluate(&xs).unwrap()) < 1e-10);
}

#[test]
fn extended_evaluation_resolves_cancellation() {
    // (V−W)² expanded, at W = V + δ: the f64 sum loses most digits of the
    // δ²-sized value while (V−W)·(V−W) computed directly keeps them.
    let p = TensorPoly::from_strs(&["V", "W"], &[(1.0, "VV"), (-1.0, "VW"), (-1.0, "WV"), (1.0, "WW")]).unwrap();
    let mut rng = RngStream::new(24, 0);
    let v = haar_unitary(2, &mut rng);
    let w = ComplexMatrix::from_fn(2, 2, |i, j| v[(i, j)] + complex_normal(&mut rng) * 1e-6);
    let mut diff = v.clone();
    diff.axpy(C64::new(-1.0, 0.0), &w);
    let want = diff.matmul(&diff);
    let rel = |m: &ComplexMatrix| max_diff(m, &want) / want.max_abs();
    let plain = p.evaluate(&[v.clone(), w.clone()]).unwrap();
    let ext = p.evaluate_extended(&[v.clone(), w.clone()]).unwrap().to_matrix();
    assert!(rel(&ext) < 1e-13, "{}", rel(&ext));
    assert!(rel(&plain) > 1e-8, "cancellation should be visible in f64: {}", rel(&plain));
    let via_expr = PolyExpr::leaf(p).evaluate_extended(&[v, w]).unwrap().to_matrix();
    assert!(rel(&via_expr) < 1e-13);
}

#[test]
fn scaled_evaluation_survives_overflow() {
    let big = ComplexMatrix::identity(2).scale_real(1e200);
    let p = TensorPoly::from_strs(&["V"], &[(1.0, "VVVV")]).unwrap();
    assert!(!p.evaluate(&[big.clone()]).unwrap().is_finite());
    let s = PolyExpr::leaf(p.clone()).evaluate_scaled(&[big.clone()]).unwrap();
    assert!((s.log2_norm() - (800.0 * 10f64.log2() + 0.5)).abs() < 1e-9);
    let e = PolyExpr::leaf(p).evaluate_extended(&[big]).unwrap();
    assert!((e.log2_norm() - s.log2_norm()).abs() < 1e-12);
}

proptest! {
    #[test]
    fn extended_agrees_with_f64(seed in any::<u64>(), n in 1usize..3, m in 1usize..4) {
        let mut rng = RngStream::new(seed, 0);
        let p = random_poly(n, m, 2, &mut rng);
        let xs: Vec<_> = (0..2).map(|_| ginibre(2, 2, &mut rng)).collect();
        let a = p.evaluate(&xs).unwrap();
        let b = p.evaluate_extended(&xs).unwrap().to_matrix();
        let scale: f64 = p.terms().map(|(_, c)| c.norm()).sum::<f64>() * xs.iter().map(|x| x.norm()).fold(1.0, f64::max).powi((m * n) as i32);
        prop_assert!(max_diff(&a, &b) <= 1e-13 * scale);
    }
}
