use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use tempoly::numkit::*;

fn to_na(m: &ComplexMatrix) -> DMatrix<C64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.data())
}

fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn expm_matches_nalgebra() {
    let mut rng = RngStream::new(1, 0);
    for d in 1..6 {
        for scale in [0.1, 1.0, 8.0] {
            let a = ginibre(d, d, &mut rng).scale_real(scale);
            let ours = expm(&a).unwrap();
            let oracle = to_na(&a).exp();
            let rel = (to_na(&ours) - &oracle).norm() / oracle.norm();
            assert!(rel < 1e-11, "d={d} scale={scale}: {rel}");
        }
    }
}

#[test]
fn haar_samples_are_unitary() {
    let mut rng = RngStream::new(2, 0);
    for d in 1..7 {
        let u = haar_unitary(d, &mut rng);
        assert!(max_diff(&u.adjoint().matmul(&u), &ComplexMatrix::identity(d)) < 1e-12);
    }
}

#[test]
fn kron_mixed_product() {
    let mut rng = RngStream::new(3, 0);
    let (a, b, c, e) =
        (ginibre(2, 2, &mut rng), ginibre(3, 3, &mut rng), ginibre(2, 2, &mut rng), ginibre(3, 3, &mut rng));
    let lhs = kron(&a, &b).matmul(&kron(&c, &e));
    let rhs = kron(&a.matmul(&c), &b.matmul(&e));
    assert!(max_diff(&lhs, &rhs) < 1e-12);
}

#[test]
fn projector_algebra() {
    for d in 2..5 {
        let s = symmetric_projector(d);
        let a = antisymmetric_projector(d);
        let id = ComplexMatrix::identity(d * d);
        let mut sum = s.clone();
        sum.axpy(C64::new(1.0, 0.0), &a);
        assert!(max_diff(&sum, &id) < 1e-14);
        let mut diff = s.clone();
        diff.axpy(C64::new(-1.0, 0.0), &a);
        assert!(max_diff(&diff, &swap_matrix(d)) < 1e-14);
        assert!((s.trace().re - (d * (d + 1) / 2) as f64).abs() < 1e-12);
        assert!((a.trace().re - (d * (d - 1) / 2) as f64).abs() < 1e-12);
        assert!(s.matmul(&a).norm() < 1e-14);
    }
}

#[test]
fn swap_exchanges_product_states() {
    let mut rng = RngStream::new(4, 0);
    let x = random_state(3, &mut rng);
    let y = random_state(3, &mut rng);
    let xy = kron(&col(&x), &col(&y));
    let yx = kron(&col(&y), &col(&x));
    assert!(max_diff(&swap_matrix(3).matmul(&xy), &yx) < 1e-14);
}

fn col(s: &StateVector) -> ComplexMatrix {
    ComplexMatrix::from_row_major(s.dim(), 1, s.amplitudes().to_vec()).unwrap()
}

#[test]
fn permutation_operators_compose() {
    let perms = [vec![1, 2, 0], vec![2, 0, 1], vec![0, 2, 1], vec![1, 0, 2]];
    for p in &perms {
        for q in &perms {
            let lhs = permutation_operator(3, 2, p).unwrap().matmul(&permutation_operator(3, 2, q).unwrap());
            let rhs = permutation_operator(3, 2, &compose_perm(p, q)).unwrap();
            assert!(max_diff(&lhs, &rhs) < 1e-15, "{p:?} {q:?}");
        }
    }
    assert!(permutation_operator(3, 2, &[0, 0, 1]).is_err());
}

#[test]
fn inverse_and_determinant() {
    let mut rng = RngStream::new(5, 0);
    let a = ginibre(4, 4, &mut rng);
    let inv = inverse(&a).unwrap();
    assert!(max_diff(&a.matmul(&inv), &ComplexMatrix::identity(4)) < 1e-10);
    let det = determinant(&a).unwrap();
    let oracle = to_na(&a).determinant();
    assert!((det - oracle).norm() < 1e-10 * oracle.norm());
    let singular = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
    assert_eq!(inverse(&singular).unwrap_err().kind(), "singular");
}

#[test]
fn proportionality_recovers_scalar() {
    let mut rng = RngStream::new(6, 0);
    let b = ginibre(3, 3, &mut rng);
    let c = C64::new(-2.0, 0.5);
    let fit = proportionality_fit(&b.scale(c), &b).unwrap();
    assert!((fit.scalar - c).norm() < 1e-14 && fit.relative < 1e-15);
    let other = ginibre(3, 3, &mut rng);
    assert!(proportionality(&other, &b, 1e-9).unwrap().is_none());
    let z = ComplexMatrix::zeros(3, 3);
    assert!(proportionality(&z, &z, 1e-9).unwrap().unwrap().degenerate);
}

#[test]
fn gamma_identity_and_errors() {
    let mut rng = RngStream::new(7, 0);
    for d in 2..7 {
        let y = random_diagonal(d, &mut rng);
        assert!(gamma_conjugation_check(d, &y, 1e-10).unwrap());
    }
    let y = ComplexMatrix::diag(&[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    assert_eq!(gamma_conjugation_check(2, &y, 1e-10).unwrap_err().kind(), "singular");
    let full = ginibre(2, 2, &mut rng);
    assert!(gamma_conjugation_check(2, &full, 1e-10).is_err());
}

#[test]
fn orthonormal_extend_rejects_span_members() {
    let mut rng = RngStream::new(8, 0);
    let a: Vec<C64> = (0..5).map(|_| complex_normal(&mut rng)).collect();
    let q = orthonormal_extend::<Vec<C64>>(&[], &a, 1e-9).unwrap().unwrap();
    assert!((vec_norm(&q) - 1.0).abs() < 1e-14);
    let twice: Vec<C64> = a.iter().map(|z| z * C64::new(0.0, 2.0)).collect();
    assert!(orthonormal_extend(&[q.clone()], &twice, 1e-9).unwrap().is_none());
    let b: Vec<C64> = (0..5).map(|_| complex_normal(&mut rng)).collect();
    let q2 = orthonormal_extend(&[q.clone()], &b, 1e-9).unwrap().unwrap();
    assert!(vec_inner(&q, &q2).norm() < 1e-14);
}

#[test]
fn rng_streams_are_reproducible_and_distinct() {
    use rand::Rng;
    let draw = |mut r: RngStream| (0..4).map(|_| r.random::<u64>()).collect::<Vec<_>>();
    assert_eq!(draw(RngStream::named(9, "a")), draw(RngStream::named(9, "a")));
    assert_ne!(draw(RngStream::named(9, "a")), draw(RngStream::named(9, "b")));
    let root = RngStream::new(9, 0);
    assert_ne!(draw(root.child("x", 0)), draw(root.child("x", 1)));
    let (mut a, mut b) = (root.child("x", 0), root.child("x", 1));
    assert_ne!(a.next_seed(), b.next_seed());
}

proptest! {
    #[test]
    fn expm_of_antihermitian_is_unitary(seed in any::<u64>(), d in 1usize..5, t in -4.0f64..4.0) {
        let h = random_hermitian(d, 1.0, &mut RngStream::new(seed, 0));
        let u = expm(&h.scale(C64::new(0.0, -t))).unwrap();
        prop_assert!(max_diff(&u.adjoint().matmul(&u), &ComplexMatrix::identity(d)) < 1e-11);
    }
}
