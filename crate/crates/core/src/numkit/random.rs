use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::ComplexMatrix;
use super::state::StateVector;

/// Standard complex Gaussian: E z = 0, E|z|² = 1.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

/// Haar unitary from the QR factorization of a Ginibre matrix, with the
/// phases of R's diagonal moved into Q.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    assert!(d >= 1, "haar_unitary needs d >= 1");
    let g = ginibre(d, d, rng).to_nalgebra();
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let n = rjj.norm();
        let phase = if n == 0.0 { C64::new(1.0, 0.0) } else { rjj / n };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_nalgebra(&q)
}

pub fn random_state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
    loop {
        let v = StateVector::new((0..dim).map(|_| complex_normal(rng)).collect());
        if let Ok(n) = v.normalized() {
            return n;
        }
    }
}

/// (G + G†)/2 scaled; a GUE-type Hermitian matrix.
pub fn random_hermitian<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(d, d, rng);
    (&g + &g.adjoint()).scale_real(0.5 * scale)
}

pub fn random_diagonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::diag(&(0..d).map(|_| complex_normal(rng)).collect::<Vec<_>>())
}
