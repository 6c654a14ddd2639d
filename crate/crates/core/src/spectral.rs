//! Spectral-norm estimation by the power method.

use crate::error::{AlsError, Result};
use crate::matrix::DenseMatrix;
use crate::random::GaussianStream;
use crate::scalar::{dot, norm2, Scalar};

/// Default number of power iterations for error measurement.
pub const DEFAULT_POWER_ITERATIONS: usize = 100;

/// Default start-vector seed, independent of any factorization seed.
pub const DEFAULT_POWER_SEED: u64 = 0x9e37_79b9_7f4a_7c15;

/// A matrix known only through its action and the action of its adjoint.
pub trait LinearOperator<T: Scalar>: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `y = op * v`, `v` of length `cols`.
    fn apply(&self, v: &[T]) -> Vec<T>;
    /// `x = op* * w`, `w` of length `rows`.
    fn apply_adjoint(&self, w: &[T]) -> Vec<T>;
}

impl<T: Scalar> LinearOperator<T> for DenseMatrix<T> {
    fn rows(&self) -> usize {
        DenseMatrix::rows(self)
    }

    fn cols(&self) -> usize {
        DenseMatrix::cols(self)
    }

    fn apply(&self, v: &[T]) -> Vec<T> {
        self.matvec(v).expect("operator length")
    }

    fn apply_adjoint(&self, w: &[T]) -> Vec<T> {
        self.adjoint_matvec(w).expect("operator length")
    }
}

/// `E = A - S T`, never materialized.
pub struct ResidualOperator<'a, T: Scalar> {
    a: &'a DenseMatrix<T>,
    s: &'a DenseMatrix<T>,
    t: &'a DenseMatrix<T>,
}

impl<'a, T: Scalar> ResidualOperator<'a, T> {
    pub fn new(a: &'a DenseMatrix<T>, s: &'a DenseMatrix<T>, t: &'a DenseMatrix<T>) -> Result<Self> {
        if s.rows() != a.rows() || t.cols() != a.cols() || s.cols() != t.rows() {
            return Err(AlsError::DimensionMismatch {
                op: "residual operator",
                lhs: (s.rows(), t.cols()),
                rhs: a.shape(),
            });
        }
        Ok(ResidualOperator { a, s, t })
    }
}

impl<T: Scalar> LinearOperator<T> for ResidualOperator<'_, T> {
    fn rows(&self) -> usize {
        self.a.rows()
    }

    fn cols(&self) -> usize {
        self.a.cols()
    }

    fn apply(&self, v: &[T]) -> Vec<T> {
        let mut y = self.a.matvec(v).expect("operator length");
        let tv = self.t.matvec(v).expect("operator length");
        let stv = self.s.matvec(&tv).expect("operator length");
        for (a, b) in y.iter_mut().zip(stv) {
            *a -= b;
        }
        y
    }

    fn apply_adjoint(&self, w: &[T]) -> Vec<T> {
        let mut x = self.a.adjoint_matvec(w).expect("operator length");
        let sw = self.s.adjoint_matvec(w).expect("operator length");
        let tsw = self.t.adjoint_matvec(&sw).expect("operator length");
        for (a, b) in x.iter_mut().zip(tsw) {
            *a -= b;
        }
        x
    }
}

/// Power method on `op* op` from a normalized Gaussian start: `n_iters`
/// normalized steps, then `||op v||` for the final unit `v`. The result is a
/// lower bound on `||op||_2` up to rounding.
pub fn power_method_norm<T: Scalar, O: LinearOperator<T> + ?Sized>(op: &O, n_iters: usize, seed: u64) -> Result<f64> {
    if n_iters == 0 {
        return Err(AlsError::config("power method needs at least one iteration"));
    }
    let mut v: Vec<T> = GaussianStream::new(seed).vector(op.cols());
    if !normalize(&mut v) {
        return Ok(0.0);
    }
    for _ in 0..n_iters {
        let mut w = op.apply_adjoint(&op.apply(&v));
        if !normalize(&mut w) {
            return Ok(0.0);
        }
        v = w;
    }
    Ok(norm2(&op.apply(&v)))
}

fn normalize<T: Scalar>(v: &mut [T]) -> bool {
    let n = norm2(v);
    if !(n > f64::MIN_POSITIVE) || !n.is_finite() {
        return false;
    }
    let inv = 1.0 / n;
    for x in v.iter_mut() {
        *x = x.scale(inv);
    }
    true
}

/// `|<op v, w> - <v, op* w>|` for the given vectors.
pub fn adjoint_consistency<T: Scalar, O: LinearOperator<T> + ?Sized>(op: &O, v: &[T], w: &[T]) -> f64 {
    let lhs = dot(&op.apply(v), w);
    let rhs = dot(v, &op.apply_adjoint(w));
    (lhs - rhs).modulus()
}
