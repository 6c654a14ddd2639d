//! Row-major dense matrices and the arithmetic the rest of the crate uses.

use rayon::prelude::*;

use crate::error::{AlsError, Result};
use crate::parallel;
use crate::scalar::{dot, dot_unconj, CompensatedSum, Scalar};

/// Column block width of the matmul kernels.
const NB: usize = 256;
/// Inner-dimension block depth of the matmul kernels.
const KB: usize = 128;

/// Dense `rows x cols` matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix<T: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    /// Validated constructor: positive dimensions, matching length, finite
    /// entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(AlsError::InvalidMatrix(format!(
                "dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(AlsError::InvalidMatrix(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(AlsError::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Build from nested rows. All rows must share a length.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(AlsError::InvalidMatrix("ragged rows".into()));
        }
        Self::from_vec(r, c, rows.concat())
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        DenseMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    /// Square diagonal matrix.
    pub fn from_diag(d: &[T]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, &x) in d.iter().enumerate() {
            m.data[i * n + i] = x;
        }
        m
    }

    /// Single-column matrix.
    pub fn column_vector(v: &[T]) -> Self {
        DenseMatrix { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize, x: T) {
        self.data[i * self.cols + j] = x;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub(crate) fn set_column(&mut self, j: usize, v: &[T]) {
        for (i, &x) in v.iter().enumerate() {
            self.set(i, j, x);
        }
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    /// The first `count` columns.
    pub fn leading_columns(&self, count: usize) -> Self {
        assert!(count <= self.cols);
        let mut data = Vec::with_capacity(self.rows * count);
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[..count]);
        }
        DenseMatrix { rows: self.rows, cols: count, data }
    }

    /// The first `count` rows.
    pub fn leading_rows(&self, count: usize) -> Self {
        assert!(count <= self.rows);
        DenseMatrix {
            rows: count,
            cols: self.cols,
            data: self.data[..count * self.cols].to_vec(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let (m, n) = self.shape();
        let mut out = Vec::with_capacity(m * n);
        for j in 0..n {
            for i in 0..m {
                out.push(self.data[i * n + j].conj());
            }
        }
        DenseMatrix { rows: n, cols: m, data: out }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| f(x)).collect() }
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|x| x * s)
    }

    /// `self * diag(d)`.
    pub fn scale_columns(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for (x, &s) in out.row_mut(i).iter_mut().zip(d) {
                *x *= s;
            }
        }
        out
    }

    /// `diag(d) * self`.
    pub fn scale_rows(&self, d: &[T]) -> Self {
        assert_eq!(d.len(), self.rows);
        let mut out = self.clone();
        for (i, &s) in d.iter().enumerate() {
            for x in out.row_mut(i) {
                *x *= s;
            }
        }
        out
    }

    fn check_same_shape(&self, other: &Self, op: &'static str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(AlsError::DimensionMismatch { op, lhs: self.shape(), rhs: other.shape() });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "add")?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a + b).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other, "sub")?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    /// Frobenius norm with compensated summation.
    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = CompensatedSum::<f64>::new();
        for &x in &self.data {
            acc.add(x.abs_sq());
        }
        acc.value().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    /// `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(AlsError::DimensionMismatch { op: "matmul", lhs: self.shape(), rhs: other.shape() });
        }
        let (m, r, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![T::zero(); m * n];
        if parallel::use_threads(m * r * n) && m > 1 {
            let chunk = m.div_ceil(rayon::current_num_threads() * 4).max(1);
            out.par_chunks_mut(chunk * n).enumerate().for_each(|(ci, c)| {
                let rows = c.len() / n;
                let a = &self.data[ci * chunk * r..(ci * chunk + rows) * r];
                gemm_acc(a, &other.data, c, rows, r, n);
            });
        } else {
            gemm_acc(&self.data, &other.data, &mut out, m, r, n);
        }
        Ok(Self::from_raw(m, n, out))
    }

    /// `self* * other` without materializing the adjoint.
    pub fn adjoint_matmul(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(AlsError::DimensionMismatch {
                op: "adjoint_matmul",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let (m, p, n) = (self.rows, self.cols, other.cols);
        let mut out = vec![T::zero(); p * n];
        let kernel = |c: &mut [T], l0: usize| {
            let lrows = c.len() / n;
            for jb in (0..n).step_by(NB) {
                let je = (jb + NB).min(n);
                for i in 0..m {
                    let brow = &other.data[i * n + jb..i * n + je];
                    let arow = &self.data[i * p + l0..i * p + l0 + lrows];
                    for (l, &a) in arow.iter().enumerate() {
                        if a == T::zero() {
                            continue;
                        }
                        let a = a.conj();
                        let crow = &mut c[l * n + jb..l * n + je];
                        for (cv, &bv) in crow.iter_mut().zip(brow) {
                            *cv += a * bv;
                        }
                    }
                }
            }
        };
        if parallel::use_threads(m * p * n) && p > 1 {
            let chunk = p.div_ceil(rayon::current_num_threads()).max(1);
            out.par_chunks_mut(chunk * n).enumerate().for_each(|(ci, c)| kernel(c, ci * chunk));
        } else {
            kernel(&mut out, 0);
        }
        Ok(Self::from_raw(p, n, out))
    }

    /// `self * other*`, each entry a compensated dot product of two rows.
    pub fn matmul_adjoint(&self, other: &Self) -> Result<Self> {
        if self.cols != other.cols {
            return Err(AlsError::DimensionMismatch {
                op: "matmul_adjoint",
                lhs: self.shape(),
                rhs: other.shape(),
            });
        }
        let (m, n) = (self.rows, other.rows);
        let mut out = vec![T::zero(); m * n];
        let fill = |i: usize, c: &mut [T]| {
            let arow = self.row(i);
            for (j, cv) in c.iter_mut().enumerate() {
                *cv = dot(other.row(j), arow);
            }
        };
        if parallel::use_threads(m * n * self.cols) {
            out.par_chunks_mut(n).enumerate().for_each(|(i, c)| fill(i, c));
        } else {
            out.chunks_mut(n).enumerate().for_each(|(i, c)| fill(i, c));
        }
        Ok(Self::from_raw(m, n, out))
    }

    /// `self * x`.
    pub fn matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(AlsError::DimensionMismatch { op: "matvec", lhs: self.shape(), rhs: (x.len(), 1) });
        }
        let rows = 0..self.rows;
        if parallel::use_threads(self.data.len()) {
            Ok(rows.into_par_iter().map(|i| dot_unconj(self.row(i), x)).collect())
        } else {
            Ok(rows.map(|i| dot_unconj(self.row(i), x)).collect())
        }
    }

    /// `self* * x`, compensated per output entry.
    pub fn adjoint_matvec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.rows {
            return Err(AlsError::DimensionMismatch {
                op: "adjoint_matvec",
                lhs: self.shape(),
                rhs: (x.len(), 1),
            });
        }
        let n = self.cols;
        let kernel = |j0: usize, y: &mut [T]| {
            let mut carry = vec![T::zero(); y.len()];
            for (i, &xi) in x.iter().enumerate() {
                if xi == T::zero() {
                    continue;
                }
                let arow = &self.data[i * n + j0..i * n + j0 + y.len()];
                for ((s, c), &a) in y.iter_mut().zip(carry.iter_mut()).zip(arow) {
                    let term = a.conj() * xi - *c;
                    let t = *s + term;
                    *c = (t - *s) - term;
                    *s = t;
                }
            }
        };
        let mut y = vec![T::zero(); n];
        if parallel::use_threads(self.data.len()) && n >= 2 * NB {
            y.par_chunks_mut(NB).enumerate().for_each(|(b, c)| kernel(b * NB, c));
        } else {
            kernel(0, &mut y);
        }
        Ok(y)
    }

    /// Relative Frobenius distance `||self - other||_F / ||other||_F`
    /// (absolute when `other` is zero).
    pub fn relative_distance(&self, other: &Self) -> Result<f64> {
        let d = self.sub(other)?.frobenius_norm();
        let base = other.frobenius_norm();
        Ok(if base > 0.0 { d / base } else { d })
    }
}

/// `c += a * b` for row-major `a: m x r`, `b: r x n`, blocked so a panel of
/// `b` stays in cache across all rows of `a`. Each output entry accumulates
/// over the inner index in increasing order.
fn gemm_acc<T: Scalar>(a: &[T], b: &[T], c: &mut [T], m: usize, r: usize, n: usize) {
    for jb in (0..n).step_by(NB) {
        let je = (jb + NB).min(n);
        for kb in (0..r).step_by(KB) {
            let ke = (kb + KB).min(r);
            for i in 0..m {
                let crow = &mut c[i * n + jb..i * n + je];
                let arow = &a[i * r..(i + 1) * r];
                for k in kb..ke {
                    let aik = arow[k];
                    if aik == T::zero() {
                        continue;
                    }
                    let brow = &b[k * n + jb..k * n + je];
                    for (cv, &bv) in crow.iter_mut().zip(brow) {
                        *cv += aik * bv;
                    }
                }
            }
        }
    }
}
