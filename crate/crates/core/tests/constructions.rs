use num_complex::Complex64 as C64;
use tempoly::constructions::*;
use tempoly::numkit::{
    haar_unitary, inverse, kron_all, permutation_operator, proportionality_fit, ComplexMatrix, RngStream,
};

fn haar(d: usize, n: usize, rng: &mut RngStream) -> Vec<ComplexMatrix> {
    (0..n).map(|_| haar_unitary(d, rng)).collect()
}

fn assert_prop(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) -> C64 {
    let fit = proportionality_fit(a, b).unwrap();
    assert!(fit.relative < tol, "relative residual {:.3e}", fit.relative);
    assert!(fit.scalar.norm() > 1e-10, "vanishing scalar");
    fit.scalar
}

#[test]
fn formanek_term_counts() {
    assert_eq!(formanek_central(2).unwrap().poly().term_count(), 8);
    assert_eq!(formanek_central(3).unwrap().poly().term_count(), 93);
    assert_eq!(formanek_central(4).unwrap().poly().term_count(), 1584);
    assert!(matches!(formanek_central(5), Err(tempoly::Error::Guard(_))));
}

#[test]
fn formanek_is_central_and_vanishes_below() {
    let mut rng = RngStream::new(11, 0);
    for d in 2..=4 {
        let c = formanek_central(d).unwrap();
        assert_eq!(c.degree(), d * d);
        let xs = haar(d, d + 1, &mut rng);
        assert_prop(&c.poly().evaluate(&xs).unwrap(), &ComplexMatrix::identity(d), 1e-10);
        let small = haar(d - 1, d + 1, &mut rng);
        assert!(c.poly().evaluate(&small).unwrap().norm() < 1e-9);
    }
}

#[test]
fn qubit_central_square_of_commutator() {
    let c = qubit_central().unwrap();
    let mut rng = RngStream::new(12, 0);
    let xs = haar(2, 2, &mut rng);
    let comm = xs[0].commutator(&xs[1]);
    let direct = comm.matmul(&comm);
    let poly = c.poly().evaluate(&xs).unwrap();
    assert!((&poly - &direct).norm() < 1e-12);
}

#[test]
fn padding_keeps_centrality() {
    let c = formanek_central(3).unwrap();
    let p = pad_central(&c, 5).unwrap();
    assert_eq!(p.degree(), 14);
}

#[test]
fn filler_has_requested_degree() {
    let names: Vec<String> = ["V", "W"].iter().map(|s| s.to_string()).collect();
    let f = central_filler(2, 9, &names, 0, 1).unwrap();
    assert_eq!(f.degrees(), &[9]);
    let mut rng = RngStream::new(13, 0);
    let xs = haar(2, 2, &mut rng);
    assert_prop(&f.evaluate(&xs).unwrap(), &ComplexMatrix::identity(2), 1e-10);
    assert!(central_filler(2, 3, &names, 0, 1).is_err());
}

#[test]
fn rewinders_invert_v_power() {
    let mut rng = RngStream::new(14, 0);
    for s in [0usize, 1, 3, 6] {
        let r = qubit_rewind(s).unwrap();
        assert_eq!(r.degrees(), &[4 + s]);
        let xs = haar(2, 2, &mut rng);
        let target = inverse(&xs[0].pow(s)).unwrap();
        assert_prop(&r.evaluate(&xs).unwrap(), &target, 1e-10);
    }
    for d in [2usize, 3] {
        for s in [1usize, 2] {
            let r = rewind_poly(d, s).unwrap();
            assert_eq!(r.degrees(), &[s * (d - 1) + d * d]);
            assert!((r.coefficient_norm_sq() - 1.0).abs() < 1e-12);
            let xs = haar(d, d + 1, &mut rng);
            let target = inverse(&xs[0].pow(s)).unwrap();
            assert_prop(&r.evaluate(&xs).unwrap(), &target, 1e-9);

            let rv = rewind_poly_vw(d, s).unwrap();
            let xs = haar(d, 2, &mut rng);
            assert_prop(&rv.evaluate(&xs).unwrap(), &inverse(&xs[0].pow(s)).unwrap(), 1e-9);
        }
    }
}

#[test]
fn rewinder_enum_degrees_match() {
    for (rw, s) in [(Rewinder::Qubit, 3), (Rewinder::Formanek { d: 2 }, 2), (Rewinder::Formanek { d: 3 }, 1)] {
        assert_eq!(rw.build(s).unwrap().degrees()[0], rw.degree(s));
    }
}

#[test]
fn transposition_chain_reconstructs_permutation() {
    let perms: [&[usize]; 4] = [&[1, 0], &[2, 0, 1], &[1, 2, 0], &[3, 1, 0, 2]];
    for perm in perms {
        let n = perm.len();
        let mut acc = permutation_operator(n, 2, &(0..n).collect::<Vec<_>>()).unwrap();
        for (k, a) in transposition_chain(perm) {
            let mut t: Vec<usize> = (0..n).collect();
            t.swap(k, a);
            acc = acc.matmul(&permutation_operator(n, 2, &t).unwrap());
        }
        let direct = permutation_operator(n, 2, perm).unwrap();
        assert!((&acc - &direct).norm() < 1e-12, "{perm:?}");
    }
}

#[test]
fn symbolic_swap_bundle_d2() {
    let b = swap_poly_symbolic(2, 7).unwrap();
    assert_eq!(b.degree, 368);
    assert_eq!(b.var_names().len(), 16);
    assert_eq!(b.g_tilde.degrees(), &[9, 9]);
    assert_eq!(b.h_tilde.degrees(), &[11, 11]);
    let mut rng = RngStream::new(15, 0);
    for haar in [true, false] {
        let xs = b.random_assignment(&mut rng, haar);
        let c = check_bundle(&b, &xs).unwrap();
        assert!(c.worst() < 1e-8, "{c:?}");
    }
    assert!(matches!(swap_poly_symbolic(3, 7), Err(tempoly::Error::Guard(_))));
}

#[test]
fn perm_poly_matches_operator_n3() {
    let b = swap_poly_symbolic(2, 7).unwrap();
    let mut rng = RngStream::new(16, 0);
    for perm in [[1usize, 2, 0], [0, 2, 1], [2, 1, 0]] {
        let p = perm_poly(3, 2, &perm, &b).unwrap();
        assert_eq!(p.degrees(), &[736, 736, 736]);
        let xs = b.random_assignment(&mut rng, true);
        let val = p.evaluate_scaled(&xs).unwrap();
        let fit = scaled_fit(&val, &permutation_operator(3, 2, &perm).unwrap()).unwrap();
        assert!(fit.relative < 1e-8, "{perm:?}: {}", fit.relative);
        assert!(fit.log2_abs.is_finite());
    }
}

#[test]
fn fast_forward_and_rewind_with_symbolic_swap() {
    let b = swap_poly_symbolic(2, 7).unwrap();
    let swaps = SwapPolys::uniform(2, b.swap.clone()).unwrap();
    let mut rng = RngStream::new(17, 0);
    for (n, j, s) in [(2usize, 0usize, 2usize), (3, 1, 1)] {
        let e = compose_fast_forward(n, j, s, &swaps).unwrap();
        let xs = b.random_assignment(&mut rng, true);
        let val = e.evaluate_scaled(&xs).unwrap();
        let mut blocks = vec![ComplexMatrix::identity(2); n];
        blocks[j] = xs[0].pow(n * s);
        let fit = scaled_fit(&val, &kron_all(&blocks)).unwrap();
        assert!(fit.relative < 1e-8, "n={n} j={j}: {}", fit.relative);
    }
    let rw = qubit_rewind(1).unwrap();
    let dj = compose_fast_rewind(2, 1, &swaps, &rw).unwrap();
    let names = dj.var_names().to_vec();
    assert_eq!(&names[16..], &["V".to_string(), "W".to_string()]);
    let xs = haar(2, 18, &mut rng);
    let val = dj.evaluate_scaled(&xs).unwrap();
    let target = kron_all(&[ComplexMatrix::identity(2), inverse(&xs[16].pow(2)).unwrap()]);
    assert!(scaled_fit(&val, &target).unwrap().relative < 1e-8);
}
