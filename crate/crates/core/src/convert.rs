//! Rank-k factorization to SVD form.

use crate::matrix::DenseMatrix;
use crate::qr::householder_qr;
use crate::scalar::Scalar;
use crate::svd::{small_svd, SvdTriplet};

/// SVD of `s * t` for `s: m x k`, `t: k x n`, without forming the `m x n`
/// product: `s = Q R`, `R t = U' diag(sigma) V*`, `U = Q U'`. Cost is
/// `O((m + n) k^2 + k^3)`.
///
/// Each column pair is rotated so the largest-magnitude entry of the `U`
/// column is real and positive. A rank-deficient `s` just yields trailing
/// singular values near zero.
pub fn factorization_to_svd<T: Scalar>(s: &DenseMatrix<T>, t: &DenseMatrix<T>) -> SvdTriplet<T> {
    assert_eq!(s.cols(), t.rows(), "inner dimensions of s and t differ");
    assert!(s.cols() <= s.rows().min(t.cols()), "k must not exceed min(m, n)");
    let qr = householder_qr(s).expect("s is tall");
    let core = qr.r.matmul(t).expect("k x k times k x n");
    let inner = small_svd(&core);
    let u = qr.q.matmul(&inner.u).expect("m x k times k x k");
    let mut out = SvdTriplet { u, sigma: inner.sigma, v: inner.v };
    out.canonicalize();
    out
}
