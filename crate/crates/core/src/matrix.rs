//! Small dense real matrices.
//!
//! Everything above this layer (group elements, algebra elements, linear
//! actions) is a [`SquareMatrix`]. Dimensions in practice are 2 or 3, so the
//! storage is a plain row-major buffer and every operation allocates a fresh
//! value.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};

const TAYLOR_ORDER: usize = 18;

#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    /// Builds an `dim × dim` matrix from row-major entries.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::InvalidShape { dim, len: data.len() });
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<const N: usize>(rows: [[f64; N]; N]) -> Result<Self> {
        Self::new(N, rows.iter().flatten().copied().collect())
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self::new(dim, data)
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Result<Self> {
        Self::from_fn(entries.len(), |i, j| if i == j { entries[i] } else { 0.0 })
    }

    /// Matrix unit `e_ij` (a single 1 at row `i`, column `j`).
    pub fn unit(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m.data[i * dim + j] = 1.0;
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[j * n + i] = self.data[i * n + j];
            }
        }
        Self { dim: n, data }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|v| v * s).collect() }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, s: f64, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        Self { dim: self.dim, data: self.data.iter().zip(&other.data).map(|(a, b)| a + s * b).collect() }
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        check_dims(self, rhs)?;
        Ok(self.mul_unchecked(rhs))
    }

    fn mul_unchecked(&self, rhs: &Self) -> Self {
        let n = self.dim;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        Self { dim: n, data }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.len() });
        }
        Ok((0..self.dim)
            .map(|i| self.data[i * self.dim..(i + 1) * self.dim].iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `AB − BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        check_dims(self, other)?;
        let ab = self.mul_unchecked(other);
        let ba = other.mul_unchecked(self);
        Ok(&ab - &ba)
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    /// Frobenius norm of `self − other`.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        libm::sqrt(self.data.iter().zip(&other.data).map(|(a, b)| (a - b) * (a - b)).sum())
    }

    /// Frobenius inner product `Σ a_ij b_ij`.
    pub fn dot(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn determinant(&self) -> f64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n).max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs())).unwrap_or(col);
            if a[pivot * n + col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                for j in 0..n {
                    a.swap(pivot * n + j, col * n + j);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for row in col + 1..n {
                let factor = a[row * n + col] / p;
                for j in col..n {
                    a[row * n + j] -= factor * a[col * n + j];
                }
            }
        }
        det
    }

    /// Matrix exponential by scaling and squaring around a degree-18 Taylor
    /// kernel, with `s = max(0, ⌈log₂‖A‖_F⌉ + 2)` squarings.
    pub fn exp(&self) -> Self {
        let norm = self.frobenius_norm();
        let squarings = if norm > 0.0 {
            let s = libm::ceil(libm::log2(norm)) as i64 + 2;
            s.max(0) as u32
        } else {
            0
        };
        let scaled = self.scale(libm::ldexp(1.0, -(squarings as i32)));
        let id = Self::identity(self.dim);

        // Horner: I + B(I + B/2 (I + B/3 (...)))
        let mut acc = id.clone();
        for k in (1..=TAYLOR_ORDER).rev() {
            acc = id.add_scaled(1.0 / k as f64, &scaled.mul_unchecked(&acc));
        }
        for _ in 0..squarings {
            acc = acc.mul_unchecked(&acc);
        }
        acc
    }
}

fn check_dims(a: &SquareMatrix, b: &SquareMatrix) -> Result<()> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch { expected: a.dim, found: b.dim });
    }
    Ok(())
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for row in self.data.chunks(self.dim) {
            list.entry(&row);
        }
        list.finish()
    }
}

impl Index<(usize, usize)> for SquareMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl Add for &SquareMatrix {
    type Output = SquareMatrix;

    fn add(self, rhs: &SquareMatrix) -> SquareMatrix {
        self.add_scaled(1.0, rhs)
    }
}

impl Sub for &SquareMatrix {
    type Output = SquareMatrix;

    fn sub(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        SquareMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

/// Panics on dimension mismatch; use [`SquareMatrix::try_mul`] for a fallible product.
impl Mul for &SquareMatrix {
    type Output = SquareMatrix;

    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        self.mul_unchecked(rhs)
    }
}

impl Mul<&SquareMatrix> for f64 {
    type Output = SquareMatrix;

    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        rhs.scale(self)
    }
}

impl Neg for &SquareMatrix {
    type Output = SquareMatrix;

    fn neg(self) -> SquareMatrix {
        self.scale(-1.0)
    }
}

/// Default finite-difference step for coefficient derivatives at time `t`.
pub fn default_fd_step(t: f64) -> f64 {
    f64::max(1e-4, 1e-4 * t.abs())
}

/// Central-difference estimates of `f'(t)` (fourth-order stencil) and `f''(t)`
/// (second-order stencil).
pub fn central_second_derivatives<F>(f: F, t: f64, step: f64) -> Result<(SquareMatrix, SquareMatrix)>
where
    F: Fn(f64) -> SquareMatrix,
{
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidInterval("finite-difference step must be positive"));
    }
    let samples = [f(t - 2.0 * step), f(t - step), f(t), f(t + step), f(t + 2.0 * step)];
    let dim = samples[2].dim();
    for s in &samples {
        check_dims(&samples[2], s)?;
        if !s.is_finite() {
            return Err(Error::NonFinite("finite-difference sample"));
        }
    }
    let first = SquareMatrix::from_fn(dim, |i, j| {
        let v = |k: usize| samples[k].get(i, j);
        (v(0) - 8.0 * v(1) + 8.0 * v(3) - v(4)) / (12.0 * step)
    })?;
    let second = SquareMatrix::from_fn(dim, |i, j| {
        let v = |k: usize| samples[k].get(i, j);
        (v(3) - 2.0 * v(2) + v(1)) / (step * step)
    })?;
    Ok((first, second))
}

/// Scalar counterpart of [`central_second_derivatives`].
pub fn central_derivatives_scalar<F>(f: F, t: f64, step: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidInterval("finite-difference step must be positive"));
    }
    let v = [f(t - 2.0 * step), f(t - step), f(t), f(t + step), f(t + 2.0 * step)];
    if !v.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("finite-difference sample"));
    }
    let first = (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * step);
    let second = (v[3] - 2.0 * v[2] + v[1]) / (step * step);
    Ok((first, second))
}
