//! Least-squares solves for the two half-steps of alternating least squares.
//!
//! `lstsq_solve(s, a)` returns `T = (S*S)^{-1} S* A` and `lstsq_solve_right(t, a)`
//! returns `S = A T* (T T*)^{-1}`, both through Householder QR so the
//! condition number is never squared. Each minimizes the residual in the
//! spectral and the Frobenius norm at once.
//!
//! The `pinv_*` variants use an SVD pseudoinverse instead and accept
//! rank-deficient operands; callers opt into them explicitly.

use crate::error::{AlsError, Result};
use crate::matrix::DenseMatrix;
use crate::qr::{householder_qr, rank_tolerance, solve_upper};
use crate::scalar::Scalar;
use crate::svd::small_svd;

/// Minimizer `T` of `||S T - A||` for `s: m x k` with full column rank.
pub fn lstsq_solve<T: Scalar>(s: &DenseMatrix<T>, a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if s.rows() != a.rows() {
        return Err(AlsError::DimensionMismatch { op: "lstsq_solve", lhs: s.shape(), rhs: a.shape() });
    }
    if s.rows() < s.cols() {
        return Err(AlsError::RankDeficient { rows: s.rows(), cols: s.cols(), rank: s.rows() });
    }
    let qr = householder_qr(s)?;
    if qr.rank_estimate < s.cols() {
        return Err(AlsError::RankDeficient { rows: s.rows(), cols: s.cols(), rank: qr.rank_estimate });
    }
    let rhs = qr.q.adjoint_matmul(a)?;
    solve_upper(&qr.r, &rhs)
}

/// Minimizer `S` of `||S T - A||` for `t: k x n` with full row rank. This is
/// the adjoint of [`lstsq_solve`] on `(t*, a*)`, evaluated without forming
/// `a*`: with `t* = Q R`, `S = (A Q) R^{-*}`.
pub fn lstsq_solve_right<T: Scalar>(t: &DenseMatrix<T>, a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if t.cols() != a.cols() {
        return Err(AlsError::DimensionMismatch {
            op: "lstsq_solve_right",
            lhs: t.shape(),
            rhs: a.shape(),
        });
    }
    if t.cols() < t.rows() {
        return Err(AlsError::RankDeficient { rows: t.rows(), cols: t.cols(), rank: t.cols() });
    }
    let qr = householder_qr(&t.adjoint())?;
    if qr.rank_estimate < t.rows() {
        return Err(AlsError::RankDeficient { rows: t.rows(), cols: t.cols(), rank: qr.rank_estimate });
    }
    let aq = a.matmul(&qr.q)?;
    Ok(solve_upper(&qr.r, &aq.adjoint())?.adjoint())
}

/// Reciprocals of the singular values above `max(p, q) * eps * sigma_max`,
/// zero for the rest.
fn inverted_spectrum(sigma: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let smax = sigma.first().copied().unwrap_or(0.0);
    let cutoff = rank_tolerance(rows, cols, smax);
    sigma.iter().map(|&s| if s > cutoff && s > 0.0 { 1.0 / s } else { 0.0 }).collect()
}

/// `pinv(s) * a` with the SVD cutoff `max(p, q) * eps * sigma_max`.
pub fn pinv_solve<T: Scalar>(s: &DenseMatrix<T>, a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if s.rows() != a.rows() {
        return Err(AlsError::DimensionMismatch { op: "pinv_solve", lhs: s.shape(), rhs: a.shape() });
    }
    let svd = small_svd(s);
    let inv: Vec<T> = inverted_spectrum(&svd.sigma, s.rows(), s.cols()).into_iter().map(T::from_real).collect();
    let w = svd.u.adjoint_matmul(a)?.scale_rows(&inv);
    svd.v.matmul(&w)
}

/// `a * pinv(t)` with the same cutoff as [`pinv_solve`].
pub fn pinv_solve_right<T: Scalar>(t: &DenseMatrix<T>, a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if t.cols() != a.cols() {
        return Err(AlsError::DimensionMismatch {
            op: "pinv_solve_right",
            lhs: t.shape(),
            rhs: a.shape(),
        });
    }
    let svd = small_svd(t);
    let inv: Vec<T> = inverted_spectrum(&svd.sigma, t.rows(), t.cols()).into_iter().map(T::from_real).collect();
    let av = a.matmul(&svd.v)?.scale_columns(&inv);
    av.matmul_adjoint(&svd.u)
}

/// Moore–Penrose pseudoinverse.
pub fn pseudoinverse<T: Scalar>(m: &DenseMatrix<T>) -> DenseMatrix<T> {
    pinv_solve(m, &DenseMatrix::identity(m.rows())).expect("identity has matching rows")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qr::householder_qr;
    use crate::random::gaussian_matrix;
    use crate::scalar::c64;

    /// Gauss–Jordan inverse with partial pivoting; test oracle only.
    pub(crate) fn invert<T: Scalar>(m: &DenseMatrix<T>) -> DenseMatrix<T> {
        let n = m.rows();
        let mut a: Vec<Vec<T>> = (0..n).map(|i| m.row(i).to_vec()).collect();
        let mut inv: Vec<Vec<T>> =
            (0..n).map(|i| (0..n).map(|j| if i == j { T::one() } else { T::zero() }).collect()).collect();
        for c in 0..n {
            let p = (c..n).max_by(|&x, &y| a[x][c].modulus().total_cmp(&a[y][c].modulus())).unwrap();
            a.swap(c, p);
            inv.swap(c, p);
            let d = T::one() / a[c][c];
            for j in 0..n {
                a[c][j] *= d;
                inv[c][j] *= d;
            }
            for i in 0..n {
                if i != c {
                    let f = a[i][c];
                    for j in 0..n {
                        let (x, y) = (a[c][j], inv[c][j]);
                        a[i][j] -= f * x;
                        inv[i][j] -= f * y;
                    }
                }
            }
        }
        DenseMatrix::from_rows(&inv).unwrap()
    }

    #[test]
    fn orthonormal_s_gives_adjoint_product() {
        let q = householder_qr(&gaussian_matrix::<c64>(7, 3, 1)).unwrap().q;
        let a = gaussian_matrix::<c64>(7, 4, 2);
        let t = lstsq_solve(&q, &a).unwrap();
        let want = q.adjoint_matmul(&a).unwrap();
        assert!(t.relative_distance(&want).unwrap() < 1e-13);
    }

    #[test]
    fn column_of_ones_gives_mean() {
        let s = DenseMatrix::from_vec(2, 1, vec![1.0, 1.0]).unwrap();
        let a = DenseMatrix::from_vec(2, 1, vec![1.0, 3.0]).unwrap();
        let t = lstsq_solve(&s, &a).unwrap();
        assert!((t.get(0, 0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn row_of_ones_gives_mean() {
        let t = DenseMatrix::from_vec(1, 2, vec![1.0, 1.0]).unwrap();
        let a = DenseMatrix::from_vec(1, 2, vec![1.0, 3.0]).unwrap();
        let s = lstsq_solve_right(&t, &a).unwrap();
        assert!((s.get(0, 0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_rows_give_adjoint_product() {
        let t = householder_qr(&gaussian_matrix::<f64>(6, 2, 3)).unwrap().q.adjoint();
        let a = gaussian_matrix::<f64>(4, 6, 4);
        let s = lstsq_solve_right(&t, &a).unwrap();
        let want = a.matmul_adjoint(&t).unwrap();
        assert!(s.relative_distance(&want).unwrap() < 1e-13);
    }

    #[test]
    fn matches_normal_equations_left() {
        let s = gaussian_matrix::<f64>(5, 2, 11);
        let a = gaussian_matrix::<f64>(5, 3, 111);
        let oracle = invert(&s.adjoint_matmul(&s).unwrap()).matmul(&s.adjoint_matmul(&a).unwrap()).unwrap();
        let t = lstsq_solve(&s, &a).unwrap();
        assert!(t.sub(&oracle).unwrap().max_abs() <= 1e-12 * oracle.max_abs().max(1.0));
    }

    #[test]
    fn matches_normal_equations_right() {
        let t = gaussian_matrix::<f64>(2, 5, 12);
        let a = gaussian_matrix::<f64>(3, 5, 112);
        let oracle = a.matmul_adjoint(&t).unwrap().matmul(&invert(&t.matmul_adjoint(&t).unwrap())).unwrap();
        let s = lstsq_solve_right(&t, &a).unwrap();
        assert!(s.sub(&oracle).unwrap().max_abs() <= 1e-12 * oracle.max_abs().max(1.0));
    }

    #[test]
    fn complex_normal_equations() {
        let s = gaussian_matrix::<c64>(8, 3, 13);
        let a = gaussian_matrix::<c64>(8, 4, 113);
        let oracle = invert(&s.adjoint_matmul(&s).unwrap()).matmul(&s.adjoint_matmul(&a).unwrap()).unwrap();
        assert!(lstsq_solve(&s, &a).unwrap().relative_distance(&oracle).unwrap() <= 1e-12);
        let t = s.adjoint();
        let b = a.adjoint();
        let oracle = b.matmul_adjoint(&t).unwrap().matmul(&invert(&t.matmul_adjoint(&t).unwrap())).unwrap();
        assert!(lstsq_solve_right(&t, &b).unwrap().relative_distance(&oracle).unwrap() <= 1e-12);
    }

    #[test]
    fn rank_deficient_operand_is_an_error() {
        let s = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
        let a = gaussian_matrix::<f64>(3, 2, 1);
        assert!(matches!(lstsq_solve(&s, &a), Err(AlsError::RankDeficient { rank: 1, .. })));
        assert!(matches!(lstsq_solve_right(&s.adjoint(), &a.adjoint()), Err(AlsError::RankDeficient { .. })));
        assert!(lstsq_solve(&s, &gaussian_matrix::<f64>(4, 2, 1)).is_err());
    }

    #[test]
    fn pinv_handles_rank_deficiency() {
        let s = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
        let a = DenseMatrix::from_rows(&[vec![1.0], vec![0.0], vec![2.0]]).unwrap();
        let t = pinv_solve(&s, &a).unwrap();
        // Minimum-norm solution lies along (1, 2).
        assert!((t.get(1, 0) - 2.0 * t.get(0, 0)).abs() < 1e-14);
        let resid = s.matmul(&t).unwrap().sub(&a).unwrap();
        // Residual orthogonal to col(s) = span{(1, 2, 3)}.
        let along: f64 = (0..3).map(|i| resid.get(i, 0) * (i + 1) as f64).sum();
        assert!(along.abs() < 1e-14);

        let sr = pinv_solve_right(&s.adjoint(), &a.adjoint()).unwrap();
        assert!(sr.sub(&t.adjoint()).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn pinv_of_full_rank_equals_qr_route() {
        let s = gaussian_matrix::<c64>(6, 3, 5);
        let a = gaussian_matrix::<c64>(6, 2, 6);
        let x = pinv_solve(&s, &a).unwrap();
        let y = lstsq_solve(&s, &a).unwrap();
        assert!(x.relative_distance(&y).unwrap() < 1e-12);
        let p = pseudoinverse(&s);
        assert!(p.matmul(&s).unwrap().sub(&DenseMatrix::identity(3)).unwrap().frobenius_norm() < 1e-12);
    }
}
