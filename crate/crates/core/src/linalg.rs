//! Minimal complex dense linear algebra with explicit operation counting.
//!
//! Everything in the detection hot paths goes through these helpers so the
//! complexity counters see every complex multiplication. Matrices are
//! row-major `Vec<Complex64>`, sized for desk-scale systems (dimensions up to
//! a few hundred).

use crate::counter::OpCounter;
use crate::error::NumericalError;

pub type Complex64 = num_complex::Complex<f64>;

pub const C_ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const C_ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C_ZERO; rows * cols],
        }
    }

    pub fn identity_scaled(n: usize, scale: f64) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(scale, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    #[inline(always)]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    #[inline(always)]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline(always)]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// y = A·x
    pub fn mul_vec(&self, x: &[Complex64], ops: &mut OpCounter) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        ops.add((self.rows * self.cols) as u64);
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(C_ZERO, |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// y = A^H·x
    pub fn herm_mul_vec(&self, x: &[Complex64], ops: &mut OpCounter) -> Vec<Complex64> {
        assert_eq!(x.len(), self.rows);
        ops.add((self.rows * self.cols) as u64);
        let mut y = vec![C_ZERO; self.cols];
        for i in 0..self.rows {
            let xi = x[i];
            for (j, a) in self.row(i).iter().enumerate() {
                y[j] += a.conj() * xi;
            }
        }
        y
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Hermitian inner product a^H·b.
pub fn cdot(a: &[Complex64], b: &[Complex64], ops: &mut OpCounter) -> Complex64 {
    assert_eq!(a.len(), b.len());
    ops.add(a.len() as u64);
    a.iter()
        .zip(b)
        .fold(C_ZERO, |acc, (x, y)| acc + x.conj() * y)
}

/// Plain (unconjugated) product sum Σ a_i·b_i.
pub fn dot_unconj(a: &[Complex64], b: &[Complex64], ops: &mut OpCounter) -> Complex64 {
    assert_eq!(a.len(), b.len());
    ops.add(a.len() as u64);
    a.iter().zip(b).fold(C_ZERO, |acc, (x, y)| acc + x * y)
}

pub fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64], ops: &mut OpCounter) {
    assert_eq!(x.len(), y.len());
    ops.add(x.len() as u64);
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm_sq(x: &[Complex64], ops: &mut OpCounter) -> f64 {
    ops.add(x.len() as u64);
    x.iter().map(|c| c.norm_sqr()).sum()
}

/// In-place Cholesky factorization of a Hermitian positive-definite matrix;
/// returns the lower factor packed in the lower triangle.
pub fn cholesky(a: &CMat, ops: &mut OpCounter) -> Result<CMat, NumericalError> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = a.get(j, j).re;
        for k in 0..j {
            d -= l.get(j, k).norm_sqr();
        }
        ops.add(j as u64);
        if !(d.is_finite() && d > 0.0) {
            return Err(NumericalError::new("cholesky pivot"));
        }
        let dj = d.sqrt();
        l.set(j, j, Complex64::new(dj, 0.0));
        for i in j + 1..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= l.get(i, k) * l.get(j, k).conj();
            }
            ops.add(j as u64 + 1);
            l.set(i, j, s / dj);
        }
    }
    Ok(l)
}

/// Solve A·x = b given the lower Cholesky factor of A.
pub fn cholesky_solve(l: &CMat, b: &[Complex64], ops: &mut OpCounter) -> Vec<Complex64> {
    let n = l.rows;
    assert_eq!(b.len(), n);
    let mut y = b.to_vec();
    for i in 0..n {
        for k in 0..i {
            let lik = l.get(i, k);
            y[i] = y[i] - lik * y[k];
        }
        ops.add(i as u64 + 1);
        y[i] /= l.get(i, i);
    }
    for i in (0..n).rev() {
        for k in i + 1..n {
            let lki = l.get(k, i).conj();
            y[i] = y[i] - lki * y[k];
        }
        ops.add((n - i) as u64);
        y[i] /= l.get(i, i);
    }
    y
}

/// Solve the Hermitian positive-definite system A·x = b.
pub fn herm_solve(
    a: &CMat,
    b: &[Complex64],
    ops: &mut OpCounter,
) -> Result<Vec<Complex64>, NumericalError> {
    let l = cholesky(a, ops)?;
    Ok(cholesky_solve(&l, b, ops))
}
