use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds from nested rows of real numbers; handy in tests.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = *e;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[C64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest absolute row sum (the induced ∞-norm).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows).map(|r| self.row(r).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn norm_one(&self) -> f64 {
        (0..self.cols).map(|c| (0..self.rows).map(|r| self[(r, c)].norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    /// `self += s * other`.
    pub fn axpy(&mut self, s: C64, other: &Self) {
        assert_eq!(self.shape(), other.shape(), "axpy shape mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut out = vec![C64::new(0.0, 0.0); n * m];
        for i in 0..n {
            let out_row = &mut out[i * m..(i + 1) * m];
            for p in 0..k {
                let a = self.data[i * k + p];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let b_row = &other.data[p * m..(p + 1) * m];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Self { rows: n, cols: m, data: out }
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.matmul(other))
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows).map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn pow(&self, k: usize) -> Self {
        assert!(self.is_square(), "pow of a non-square matrix");
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.matmul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base);
            }
        }
        result
    }

    /// Hilbert–Schmidt inner product tr(self† other).
    pub fn inner(&self, other: &Self) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        self.is_square() && (0..self.rows).all(|r| (0..self.cols).all(|c| r == c || self[(r, c)].norm() <= tol))
    }

    /// Direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(r, c)] = self[(r, c)];
            }
        }
        for r in 0..other.rows {
            for c in 0..other.cols {
                out[(self.rows + r, self.cols + c)] = other[(r, c)];
            }
        }
        out
    }

    pub(crate) fn to_nalgebra(&self) -> nalgebra::DMatrix<C64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub(crate) fn from_nalgebra(m: &nalgebra::DMatrix<C64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.cols + c]
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        ComplexMatrix { rows: self.rows, cols: self.cols, data }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.axpy(C64::new(1.0, 0.0), rhs);
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let cells: Vec<String> = self.row(r).iter().map(|z| format!("{:+.4e}{:+.4e}i", z.re, z.im)).collect();
            writeln!(f, "  {}", cells.join(", "))?;
        }
        write!(f, "]")
    }
}

/// Kronecker product with the standard layout: block (i, j) is a[i, j]·b.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let cols = ca * cb;
    let mut data = vec![C64::new(0.0, 0.0); ra * rb * cols];
    for i in 0..ra {
        for j in 0..ca {
            let s = a[(i, j)];
            if s == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..rb {
                let row = (i * rb + k) * cols + j * cb;
                for (dst, src) in data[row..row + cb].iter_mut().zip(b.row(k)) {
                    *dst = s * src;
                }
            }
        }
    }
    ComplexMatrix { rows: ra * rb, cols, data }
}

/// Kronecker product of a list, left to right; the empty list gives the 1×1 identity.
pub fn kron_all<'a>(parts: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    let mut it = parts.into_iter();
    let Some(first) = it.next() else {
        return ComplexMatrix::identity(1);
    };
    it.fold(first.clone(), |acc, m| kron(&acc, m))
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            re: self.data.iter().map(|z| z.re).collect(),
            im: self.data.iter().map(|z| z.im).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let m = MatrixJson::deserialize(d)?;
        if m.re.len() != m.rows * m.cols || m.im.len() != m.re.len() {
            return Err(D::Error::custom(format!(
                "matrix {}x{} needs {} re/im entries, got {}/{}",
                m.rows,
                m.cols,
                m.rows * m.cols,
                m.re.len(),
                m.im.len()
            )));
        }
        if m.re.iter().chain(&m.im).any(|x| !x.is_finite()) {
            return Err(D::Error::custom("matrix entries must be finite"));
        }
        let data = m.re.iter().zip(&m.im).map(|(&re, &im)| C64::new(re, im)).collect();
        Ok(ComplexMatrix { rows: m.rows, cols: m.cols, data })
    }
}
