//! Matrix arithmetic shared by plain and scale-tracked evaluation.

use num_complex::Complex64 as C64;

use crate::numkit::{kron, ComplexMatrix};

/// Operations needed to evaluate a polynomial. Implemented by plain
/// matrices and by [`ScaledMatrix`], which keeps a separate binary exponent
/// so deep compositions do not overflow.
pub trait MatAlg: Clone + Send + Sync {
    fn identity(n: usize) -> Self;
    fn zeros(n: usize) -> Self;
    fn from_matrix(m: &ComplexMatrix) -> Self;
    fn dim(&self) -> usize;
    fn mul(&self, other: &Self) -> Self;
    fn kron(&self, other: &Self) -> Self;
    fn scaled(&self, c: C64) -> Self;
    fn add_assign(&mut self, other: &Self);
    fn is_finite(&self) -> bool;
}

impl MatAlg for ComplexMatrix {
    fn identity(n: usize) -> Self {
        ComplexMatrix::identity(n)
    }
    fn zeros(n: usize) -> Self {
        ComplexMatrix::zeros(n, n)
    }
    fn from_matrix(m: &ComplexMatrix) -> Self {
        m.clone()
    }
    fn dim(&self) -> usize {
        self.rows()
    }
    fn mul(&self, other: &Self) -> Self {
        self.matmul(other)
    }
    fn kron(&self, other: &Self) -> Self {
        kron(self, other)
    }
    fn scaled(&self, c: C64) -> Self {
        self.scale(c)
    }
    fn add_assign(&mut self, other: &Self) {
        self.axpy(C64::new(1.0, 0.0), other);
    }
    fn is_finite(&self) -> bool {
        ComplexMatrix::is_finite(self)
    }
}

/// A matrix stored as `mantissa · 2^exp` with the mantissa's largest entry
/// in [1, 2). The zero matrix has `exp = -∞`.
#[derive(Clone, Debug)]
pub struct ScaledMatrix {
    mantissa: ComplexMatrix,
    exp: f64,
}

impl ScaledMatrix {
    pub fn new(m: ComplexMatrix, exp: f64) -> Self {
        let mut s = Self { mantissa: m, exp };
        s.normalize();
        s
    }

    pub fn mantissa(&self) -> &ComplexMatrix {
        &self.mantissa
    }

    /// Binary exponent; `-∞` for the zero matrix.
    pub fn exponent(&self) -> f64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.exp == f64::NEG_INFINITY
    }

    /// log₂ of the Frobenius norm.
    pub fn log2_norm(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.exp + self.mantissa.norm().log2()
        }
    }

    /// Plain matrix; entries may overflow to ±∞ or underflow to 0.
    pub fn to_matrix(&self) -> ComplexMatrix {
        if self.is_zero() {
            return ComplexMatrix::zeros(self.mantissa.rows(), self.mantissa.cols());
        }
        self.mantissa.scale_real(pow2(self.exp))
    }

    fn normalize(&mut self) {
        let m = self.mantissa.max_abs();
        if m == 0.0 || !m.is_finite() {
            if m == 0.0 {
                self.exp = f64::NEG_INFINITY;
            }
            return;
        }
        let e = m.log2().floor();
        if e != 0.0 {
            self.mantissa = self.mantissa.scale_real(pow2(-e));
            self.exp += e;
        }
    }
}

fn pow2(e: f64) -> f64 {
    // powi saturates cleanly for the exponent ranges that reach this point.
    2f64.powi(e.clamp(-2000.0, 2000.0) as i32)
}

impl MatAlg for ScaledMatrix {
    fn identity(n: usize) -> Self {
        Self { mantissa: ComplexMatrix::identity(n), exp: 0.0 }
    }
    fn zeros(n: usize) -> Self {
        Self { mantissa: ComplexMatrix::zeros(n, n), exp: f64::NEG_INFINITY }
    }
    fn from_matrix(m: &ComplexMatrix) -> Self {
        Self::new(m.clone(), 0.0)
    }
    fn dim(&self) -> usize {
        self.mantissa.rows()
    }
    fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zeros(self.dim());
        }
        Self::new(self.mantissa.matmul(&other.mantissa), self.exp + other.exp)
    }
    fn kron(&self, other: &Self) -> Self {
        let n = self.dim() * other.dim();
        if self.is_zero() || other.is_zero() {
            return Self::zeros(n);
        }
        Self::new(kron(&self.mantissa, &other.mantissa), self.exp + other.exp)
    }
    fn scaled(&self, c: C64) -> Self {
        if c == C64::new(0.0, 0.0) {
            return Self::zeros(self.dim());
        }
        Self::new(self.mantissa.scale(c), self.exp)
    }
    fn add_assign(&mut self, other: &Self) {
        if other.is_zero() {
            return;
        }
        if self.is_zero() {
            *self = other.clone();
            return;
        }
        let top = self.exp.max(other.exp);
        let mut acc = self.mantissa.scale_real(pow2(self.exp - top));
        acc.axpy(C64::new(pow2(other.exp - top), 0.0), &other.mantissa);
        *self = Self::new(acc, top);
    }
    fn is_finite(&self) -> bool {
        self.mantissa.is_finite() && !self.exp.is_nan()
    }
}

/// Double-double real: `hi + lo` with |lo| ≤ ulp(hi)/2, about 106 bits.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

impl Dd {
    fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    fn scale_pow2(self, s: f64) -> Dd {
        Dd { hi: self.hi * s, lo: self.lo * s }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct CDd {
    re: Dd,
    im: Dd,
}

impl CDd {
    fn from_c64(z: C64) -> Self {
        CDd { re: Dd::new(z.re), im: Dd::new(z.im) }
    }

    fn add(self, o: CDd) -> CDd {
        CDd { re: self.re.add(o.re), im: self.im.add(o.im) }
    }

    fn mul(self, o: CDd) -> CDd {
        CDd { re: self.re.mul(o.re).add(self.im.mul(o.im).neg()), im: self.re.mul(o.im).add(self.im.mul(o.re)) }
    }

    fn scale_pow2(self, s: f64) -> CDd {
        CDd { re: self.re.scale_pow2(s), im: self.im.scale_pow2(s) }
    }

    fn abs_hi(&self) -> f64 {
        self.re.hi.abs().max(self.im.hi.abs())
    }

    fn round(&self) -> C64 {
        C64::new(self.re.hi + self.re.lo, self.im.hi + self.im.lo)
    }
}

/// Square matrix of double-double complex entries times `2^exp`, for
/// re-evaluating polynomials whose f64 value is dominated by cancellation.
/// Entry errors are about 2⁻¹⁰⁴ of the term scale instead of 2⁻⁵³.
#[derive(Clone, Debug)]
pub struct ExtendedMatrix {
    n: usize,
    data: Vec<CDd>,
    exp: f64,
}

impl ExtendedMatrix {
    fn is_zero(&self) -> bool {
        self.exp == f64::NEG_INFINITY
    }

    fn normalized(mut self) -> Self {
        let m = self.data.iter().map(CDd::abs_hi).fold(0.0, f64::max);
        if m == 0.0 {
            self.exp = f64::NEG_INFINITY;
            return self;
        }
        if !m.is_finite() {
            return self;
        }
        let e = m.log2().floor();
        if e != 0.0 {
            let s = pow2(-e);
            self.data.iter_mut().for_each(|z| *z = z.scale_pow2(s));
            self.exp += e;
        }
        self
    }

    /// Rounds to a scale-tracked f64 matrix.
    pub fn to_scaled(&self) -> ScaledMatrix {
        if self.is_zero() {
            return ScaledMatrix::zeros(self.n);
        }
        let m = ComplexMatrix::from_row_major(self.n, self.n, self.data.iter().map(CDd::round).collect())
            .expect("square data");
        ScaledMatrix::new(m, self.exp)
    }
}

impl MatAlg for ExtendedMatrix {
    fn identity(n: usize) -> Self {
        let mut data = vec![CDd::default(); n * n];
        (0..n).for_each(|i| data[i * n + i] = CDd::from_c64(C64::new(1.0, 0.0)));
        Self { n, data, exp: 0.0 }
    }
    fn zeros(n: usize) -> Self {
        Self { n, data: vec![CDd::default(); n * n], exp: f64::NEG_INFINITY }
    }
    fn from_matrix(m: &ComplexMatrix) -> Self {
        let n = m.rows();
        Self { n, data: m.data().iter().map(|&z| CDd::from_c64(z)).collect(), exp: 0.0 }.normalized()
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        if self.is_zero() || other.is_zero() {
            return Self::zeros(n);
        }
        let mut data = vec![CDd::default(); n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                for j in 0..n {
                    data[i * n + j] = data[i * n + j].add(a.mul(other.data[k * n + j]));
                }
            }
        }
        Self { n, data, exp: self.exp + other.exp }.normalized()
    }
    fn kron(&self, other: &Self) -> Self {
        let (p, q) = (self.n, other.n);
        let n = p * q;
        if self.is_zero() || other.is_zero() {
            return Self::zeros(n);
        }
        let mut data = vec![CDd::default(); n * n];
        for i in 0..p {
            for j in 0..p {
                let a = self.data[i * p + j];
                for k in 0..q {
                    for l in 0..q {
                        data[(i * q + k) * n + j * q + l] = a.mul(other.data[k * q + l]);
                    }
                }
            }
        }
        Self { n, data, exp: self.exp + other.exp }.normalized()
    }
    fn scaled(&self, c: C64) -> Self {
        if c == C64::new(0.0, 0.0) || self.is_zero() {
            return Self::zeros(self.n);
        }
        let c = CDd::from_c64(c);
        Self { n: self.n, data: self.data.iter().map(|z| z.mul(c)).collect(), exp: self.exp }.normalized()
    }
    fn add_assign(&mut self, other: &Self) {
        if other.is_zero() {
            return;
        }
        if self.is_zero() {
            *self = other.clone();
            return;
        }
        let top = self.exp.max(other.exp);
        let (sa, sb) = (pow2(self.exp - top), pow2(other.exp - top));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.scale_pow2(sa).add(b.scale_pow2(sb))).collect();
        *self = Self { n: self.n, data, exp: top }.normalized();
    }
    fn is_finite(&self) -> bool {
        !self.exp.is_nan() && self.data.iter().all(|z| z.re.hi.is_finite() && z.im.hi.is_finite())
    }
}
