//! Householder QR, with and without column pivoting, plus the column-space
//! utilities built on it (orthonormal bases, projectors, numerical rank).

use crate::error::{AlsError, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::{norm2, Scalar};

/// Thin QR factorization `m = q * r`.
#[derive(Debug, Clone)]
pub struct QrResult<T: Scalar> {
    /// `rows x cols`, orthonormal columns.
    pub q: DenseMatrix<T>,
    /// `cols x cols`, upper triangular with real nonnegative diagonal.
    pub r: DenseMatrix<T>,
    /// Numerical rank, read off a column-pivoted QR of `r`. The unpivoted
    /// diagonal alone can miss deficiency when a leading column is small.
    pub rank_estimate: usize,
}

/// Rank tolerance shared by every rank decision in the crate:
/// `max(rows, cols) * eps * scale`.
pub fn rank_tolerance(rows: usize, cols: usize, scale: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * scale
}

struct Reflector<T> {
    /// Householder vector for rows `start..`.
    v: Vec<T>,
    /// `2 / ||v||^2`, zero for the identity.
    beta: f64,
    start: usize,
}

impl<T: Scalar> Reflector<T> {
    /// Reflector mapping `x` to `alpha * e1` with `alpha = -phase(x0) ||x||`.
    /// Returns the reflector and `alpha`.
    fn annihilating(x: &[T], start: usize) -> (Self, T) {
        let norm = norm2(x);
        if norm == 0.0 {
            return (Reflector { v: vec![T::zero(); x.len()], beta: 0.0, start }, T::zero());
        }
        let alpha = -(x[0].phase().scale(norm));
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vnorm_sq = v.iter().map(|z| z.abs_sq()).sum::<f64>();
        let beta = if vnorm_sq > 0.0 { 2.0 / vnorm_sq } else { 0.0 };
        (Reflector { v, beta, start }, alpha)
    }

    /// Apply `I - beta v v*` to rows `start..` of `w`, columns `c0..`.
    fn apply_left(&self, w: &mut DenseMatrix<T>, c0: usize) {
        if self.beta == 0.0 {
            return;
        }
        let n = w.cols();
        if c0 >= n {
            return;
        }
        let mut acc = vec![T::zero(); n - c0];
        for (off, &vi) in self.v.iter().enumerate() {
            let vc = vi.conj();
            let row = &w.row(self.start + off)[c0..];
            for (a, &x) in acc.iter_mut().zip(row) {
                *a += vc * x;
            }
        }
        for a in &mut acc {
            *a = a.scale(self.beta);
        }
        for (off, &vi) in self.v.iter().enumerate() {
            let row = &mut w.row_mut(self.start + off)[c0..];
            for (x, &a) in row.iter_mut().zip(&acc) {
                *x -= vi * a;
            }
        }
    }
}

/// Rotate column phases so every diagonal entry of `r` is real and
/// nonnegative; `q` absorbs the inverse phases.
fn canonicalize_diagonal<T: Scalar>(q: &mut DenseMatrix<T>, r: &mut DenseMatrix<T>) {
    for k in 0..r.rows().min(r.cols()) {
        let d = r.get(k, k).phase();
        if d == T::one() {
            continue;
        }
        let dc = d.conj();
        let rkk = r.get(k, k).modulus();
        for x in r.row_mut(k) {
            *x *= dc;
        }
        r.set(k, k, T::from_real(rkk));
        for i in 0..q.rows() {
            let v = q.get(i, k) * d;
            q.set(i, k, v);
        }
    }
}

fn accumulate_q<T: Scalar>(reflectors: &[Reflector<T>], rows: usize, cols: usize) -> DenseMatrix<T> {
    let mut q = DenseMatrix::zeros(rows, cols);
    for k in 0..cols {
        q.set(k, k, T::one());
    }
    for h in reflectors.iter().rev() {
        h.apply_left(&mut q, 0);
    }
    q
}

fn count_rank<T: Scalar>(r: &DenseMatrix<T>, rows: usize, cols: usize) -> usize {
    let steps = r.rows().min(r.cols());
    let diag: Vec<f64> = (0..steps).map(|k| r.get(k, k).modulus()).collect();
    let scale = diag.iter().cloned().fold(0.0, f64::max);
    if scale == 0.0 {
        return 0;
    }
    let tol = rank_tolerance(rows, cols, scale);
    diag.iter().filter(|&&d| d > tol).count()
}

/// Thin Householder QR of a matrix with `rows >= cols`.
///
/// Rank deficiency is reported through `rank_estimate < cols`, never as an
/// error; `q` keeps orthonormal columns regardless.
pub fn householder_qr<T: Scalar>(m: &DenseMatrix<T>) -> Result<QrResult<T>> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(AlsError::InvalidMatrix(format!(
            "householder_qr needs rows >= cols, got {rows}x{cols}"
        )));
    }
    let mut w = m.clone();
    let mut reflectors = Vec::with_capacity(cols);
    for k in 0..cols {
        let x: Vec<T> = (k..rows).map(|i| w.get(i, k)).collect();
        let (h, alpha) = Reflector::annihilating(&x, k);
        if h.beta != 0.0 {
            h.apply_left(&mut w, k + 1);
            w.set(k, k, alpha);
            for i in k + 1..rows {
                w.set(i, k, T::zero());
            }
        }
        reflectors.push(h);
    }
    let mut q = accumulate_q(&reflectors, rows, cols);
    let mut r = w.leading_rows(cols);
    canonicalize_diagonal(&mut q, &mut r);
    let rank_estimate = count_rank(&pivoted_qr(&r).r, rows, cols);
    Ok(QrResult { q, r, rank_estimate })
}

/// Column-pivoted QR `m[:, perm] = q * r` for any shape.
#[derive(Debug, Clone)]
pub struct PivotedQr<T: Scalar> {
    /// `rows x min(rows, cols)`, orthonormal columns.
    pub q: DenseMatrix<T>,
    /// `min(rows, cols) x cols`, upper trapezoidal.
    pub r: DenseMatrix<T>,
    pub perm: Vec<usize>,
    pub rank: usize,
}

/// Householder QR with greedy column pivoting (largest remaining column
/// norm first), which makes the leading `rank` columns of `q` a basis of
/// the column space.
pub fn pivoted_qr<T: Scalar>(m: &DenseMatrix<T>) -> PivotedQr<T> {
    let (rows, cols) = m.shape();
    let steps = rows.min(cols);
    let mut w = m.clone();
    let mut perm: Vec<usize> = (0..cols).collect();
    let mut reflectors = Vec::with_capacity(steps);
    for k in 0..steps {
        // Remaining norms are recomputed, not downdated.
        let mut best = k;
        let mut best_norm = -1.0;
        for j in k..cols {
            let nrm: f64 = (k..rows).map(|i| w.get(i, j).abs_sq()).sum();
            if nrm > best_norm {
                best_norm = nrm;
                best = j;
            }
        }
        if best != k {
            perm.swap(k, best);
            for i in 0..rows {
                let row = w.row_mut(i);
                row.swap(k, best);
            }
        }
        let x: Vec<T> = (k..rows).map(|i| w.get(i, k)).collect();
        let (h, alpha) = Reflector::annihilating(&x, k);
        if h.beta != 0.0 {
            h.apply_left(&mut w, k + 1);
            w.set(k, k, alpha);
            for i in k + 1..rows {
                w.set(i, k, T::zero());
            }
        }
        reflectors.push(h);
    }
    let mut q = accumulate_q(&reflectors, rows, steps);
    let mut r = w.leading_rows(steps);
    canonicalize_diagonal(&mut q, &mut r);
    let rank = count_rank(&r, rows, cols);
    PivotedQr { q, r, perm, rank }
}

/// Numerical rank from pivoted QR.
pub fn rank_estimate<T: Scalar>(m: &DenseMatrix<T>) -> usize {
    pivoted_qr(m).rank
}

/// Orthonormal basis of `col(m)`, `rows x rank`. `None` for a zero matrix.
pub fn orthonormal_basis<T: Scalar>(m: &DenseMatrix<T>) -> Option<DenseMatrix<T>> {
    let f = pivoted_qr(m);
    (f.rank > 0).then(|| f.q.leading_columns(f.rank))
}

/// Orthogonal projector onto `col(m)`. A zero matrix gives the zero
/// projector.
pub fn projector<T: Scalar>(m: &DenseMatrix<T>) -> DenseMatrix<T> {
    match orthonormal_basis(m) {
        Some(q) => q.matmul_adjoint(&q).expect("basis shapes agree"),
        None => DenseMatrix::zeros(m.rows(), m.rows()),
    }
}

/// Solve `r * x = b` for upper-triangular `r` by back substitution.
pub fn solve_upper<T: Scalar>(r: &DenseMatrix<T>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let k = r.rows();
    if r.cols() != k || b.rows() != k {
        return Err(AlsError::DimensionMismatch { op: "solve_upper", lhs: r.shape(), rhs: b.shape() });
    }
    let n = b.cols();
    let mut x = b.clone();
    for i in (0..k).rev() {
        let d = r.get(i, i);
        if d == T::zero() {
            return Err(AlsError::RankDeficient { rows: k, cols: k, rank: i });
        }
        let mut acc = x.row(i).to_vec();
        for l in i + 1..k {
            let ril = r.get(i, l);
            if ril == T::zero() {
                continue;
            }
            for (a, &xl) in acc.iter_mut().zip(x.row(l)) {
                *a -= ril * xl;
            }
        }
        let inv = T::one() / d;
        let row = x.row_mut(i);
        for j in 0..n {
            row[j] = acc[j] * inv;
        }
    }
    Ok(x)
}
