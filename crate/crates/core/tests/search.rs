use num_complex::Complex64 as C64;
use tempoly::numkit::{ginibre, kron, swap_matrix, vec_inner, ComplexMatrix, RngStream};
use tempoly::search::*;

fn word(s: &str) -> tempoly::ncpoly::Word {
    tempoly::ncpoly::Word::parse(s, &["V".to_string(), "W".to_string()]).unwrap()
}

#[test]
fn generator_trivial_case() {
    let cfg = GeneratorConfig::new(1, 1, 1, 1, ComplexMatrix::identity(1));
    let t = ComplexMatrix::identity(1);
    let one = C64::new(1.0, 0.0);
    let draw = GeneratorDraw::from_parts(&cfg, vec![ComplexMatrix::identity(1)], vec![one], vec![one], &t);
    assert_eq!(generator_vector(&cfg, &draw).unwrap(), vec![one]);
}

#[test]
fn generator_entry_matches_direct_bra_ket() {
    let cfg = GeneratorConfig::swap(2, 2, 2).with_seed(5);
    let mut rng = RngStream::new(1, 1);
    let draw = GeneratorDraw::sample(&cfg, &swap_matrix(2), &mut rng);
    let v = generator_vector(&cfg, &draw).unwrap();
    // Word pair (VW, WV) in product order.
    let words = [word("VW"), word("WV")];
    let idx = coefficient_index(&words, 2);
    let (x0, x1) = (&draw.xs[0], &draw.xs[1]);
    let op = kron(&x0.matmul(x1), &x1.matmul(x0));
    let swapped = swap_matrix(2).matmul(&op);
    let direct = vec_inner(&draw.left, &swapped.mul_vec(&draw.right));
    assert!((v[idx] - direct.conj()).norm() < 1e-12);
    assert_eq!(coefficient_words(idx, 2, 2, 2), words.to_vec());
}

#[test]
fn orthogonal_lr_constraint() {
    let cfg = GeneratorConfig::swap(2, 2, 1).with_orthogonal_lr(true);
    let mut rng = RngStream::new(2, 0);
    let draw = GeneratorDraw::sample(&cfg, &swap_matrix(2), &mut rng);
    assert!(vec_inner(&draw.left, &draw.right).norm() < 1e-12);
}

#[test]
fn mps_matches_dense() {
    for m in 1..=5 {
        let cfg = GeneratorConfig::swap(2, 2, m).with_seed(9);
        let a = MpsVector::sample(&cfg, 0).unwrap();
        let b = MpsVector::sample(&cfg, 1).unwrap();
        let da = sample_generator(&cfg, 0).unwrap();
        let db = sample_generator(&cfg, 1).unwrap();
        assert_eq!(a.to_dense().len(), da.len());
        let dense = vec_inner(&da, &db);
        let fast = mps_inner(&a, &b).unwrap();
        assert!((dense - fast).norm() <= 1e-9 * dense.norm().max(1e-300), "m={m}");
        let aa = mps_inner(&a, &a).unwrap();
        assert!(aa.im.abs() < 1e-9 * aa.re && aa.re > 0.0);
    }
}

/// Rank of a Gram matrix of 200 generator samples, by eigenvalue count.
fn gram_rank(cfg: &GeneratorConfig, samples: u64) -> usize {
    let vs: Vec<Vec<C64>> = (0..samples).map(|i| sample_generator(cfg, 1000 + i).unwrap()).collect();
    let n = vs.len();
    let g = nalgebra::DMatrix::from_fn(n, n, |i, j| vec_inner(&vs[i], &vs[j]));
    let eig = g.symmetric_eigen();
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    eig.eigenvalues.iter().filter(|&&l| l > 1e-10 * max).count()
}

#[test]
fn closure_dims_small_m() {
    // m = 1, 2 against an independent Gram-rank count.
    let expect = [(1usize, 4usize, 4usize), (2, 16, 16)];
    for (m, v, n) in expect {
        let cfg = GeneratorConfig::swap(2, 2, m).with_seed(3);
        let s = search_dense(&cfg).unwrap();
        assert_eq!((s.report.dims.vperp, s.report.dims.nperp, s.report.dims.quotient), (v, n, 0), "m={m}");
        assert_eq!(gram_rank(&cfg.clone().with_orthogonal_lr(false), 200), n);
        assert_eq!(gram_rank(&cfg.clone().with_orthogonal_lr(true), 200), v);
        assert!(s.nperp.orthonormality_error() < 1e-10);
    }
    let id = GeneratorConfig::new(2, 2, 1, 2, ComplexMatrix::identity(4)).with_seed(4);
    assert!(span_close(&id).unwrap().dim() <= 4);
}

#[test]
fn closure_is_deterministic() {
    let cfg = GeneratorConfig::swap(2, 2, 2).with_seed(77);
    let a = span_close(&cfg).unwrap();
    let b = span_close(&cfg).unwrap();
    assert_eq!(a.vectors, b.vectors);
    assert_eq!(a.closure_draws_used, b.closure_draws_used);
}

#[test]
fn mps_closure_agrees_with_dense() {
    for m in 1..=3 {
        let cfg = GeneratorConfig::swap(2, 2, m).with_seed(8);
        let dense = search_dense(&cfg).unwrap().report.dims;
        let mps = search_mps(&cfg, MPS_TOL).unwrap().dims;
        assert_eq!(dense, mps, "m={m}");
    }
}

#[test]
fn quotient_of_nested_spaces() {
    // nperp = span{e0,e1,e2}, vperp = span{e1} → quotient = span{e0,e2}.
    let e = |i: usize| {
        let mut v = vec![C64::new(0.0, 0.0); 4];
        v[i] = C64::new(1.0, 0.0);
        v
    };
    let n = SubspaceBasis { ambient_dim: 4, vectors: vec![e(0), e(1), e(2)], closure_draws_used: 0, tol: 1e-9 };
    let v = SubspaceBasis { ambient_dim: 4, vectors: vec![e(1)], closure_draws_used: 0, tol: 1e-9 };
    let q = quotient_swap_space(&n, &v).unwrap();
    assert_eq!(q.dim(), 2);
    for x in &q.vectors {
        assert!(x[1].norm() < 1e-12 && x[3].norm() < 1e-12);
    }
    let c = orthocomplement(&n, 1).unwrap();
    assert_eq!(c.dim(), 1);
    assert!((c.vectors[0][3].norm() - 1.0).abs() < 1e-12);
}

#[test]
fn coefficient_round_trip() {
    let mut rng = RngStream::new(4, 0);
    let g = ginibre(1, 16, &mut rng);
    let v: Vec<C64> = g.data().to_vec();
    let p = poly_from_coefficients(&v, default_var_names(2), 2, 2, 0.0).unwrap();
    assert_eq!(coefficients_from_poly(&p).unwrap(), v);
}

#[test]
fn sparsify_without_null_space_keeps_vector() {
    let fixture = tempoly::fixtures::omega().unwrap();
    let v = coefficients_from_poly(&fixture).unwrap();
    let empty = SubspaceBasis::empty(v.len(), 1e-9);
    let opts = SparsifyOptions::new(swap_matrix(2), 2, 2, 5, default_var_names(2));
    let r = sparsify(&v, &empty, &opts).unwrap();
    assert_eq!(r.poly, fixture);
    assert!(r.verification.passed());
}

#[test]
fn bound_is_respected_small_m() {
    for m in 1..=3 {
        let cfg = GeneratorConfig::swap(2, 2, m).with_seed(2);
        let n = span_close(&cfg).unwrap().dim() as u128;
        assert!(n <= dim_bound(m, 2, 2).unwrap());
        assert!(n <= 4u128.pow(m as u32));
    }
}
