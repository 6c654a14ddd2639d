//! Dense SVD by Householder QR followed by one-sided (Hestenes) Jacobi on the
//! triangular factor.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{AlsError, Result};
use crate::io::{load_matrix, save_matrix, AnyMatrix};
use crate::matrix::DenseMatrix;
use crate::qr::householder_qr;
use crate::scalar::{c64, dot, norm2, Scalar};

/// Largest `rows * cols` the crate will hand to [`small_svd`] on its own
/// initiative (exact error measurement, oracles).
pub const DENSE_SVD_BUDGET: usize = 4096 * 4096;

const MAX_SWEEPS: usize = 80;

/// `m = u * diag(sigma) * v*` with `r = min(rows, cols)` triplets.
#[derive(Debug, Clone)]
pub struct SvdTriplet<T: Scalar> {
    pub u: DenseMatrix<T>,
    /// Nonnegative, descending.
    pub sigma: Vec<f64>,
    pub v: DenseMatrix<T>,
}

impl<T: Scalar> SvdTriplet<T> {
    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// `u * diag(sigma) * v*`.
    pub fn reconstruct(&self) -> DenseMatrix<T> {
        let s: Vec<T> = self.sigma.iter().map(|&x| T::from_real(x)).collect();
        self.u.scale_columns(&s).matmul_adjoint(&self.v).expect("triplet shapes agree")
    }

    /// Keep the leading `k` triplets.
    pub fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.len());
        SvdTriplet {
            u: self.u.leading_columns(k),
            sigma: self.sigma[..k].to_vec(),
            v: self.v.leading_columns(k),
        }
    }

    /// Rotate each column pair so the largest-magnitude entry of the `u`
    /// column is real and positive. Ties go to the lowest row index.
    pub fn canonicalize(&mut self) {
        for j in 0..self.len() {
            let mut best = 0;
            let mut best_abs = -1.0;
            for i in 0..self.u.rows() {
                let a = self.u.get(i, j).modulus();
                if a > best_abs {
                    best_abs = a;
                    best = i;
                }
            }
            let d = self.u.get(best, j).phase().conj();
            if d == T::one() {
                continue;
            }
            for i in 0..self.u.rows() {
                let x = self.u.get(i, j) * d;
                self.u.set(i, j, x);
            }
            for i in 0..self.v.rows() {
                let x = self.v.get(i, j) * d;
                self.v.set(i, j, x);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SvdSidecar {
    rank: usize,
    sigma: Vec<f64>,
}

impl<T: Scalar> SvdTriplet<T> {
    /// Write `<stem>.u.alsm`, `<stem>.sigma.alsm` (an `r x 1` real matrix),
    /// `<stem>.v.alsm` and a `<stem>.json` sidecar holding sigma.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        save_matrix(&self.u, dir.join(format!("{stem}.u.alsm")))?;
        save_matrix(&self.v, dir.join(format!("{stem}.v.alsm")))?;
        let sigma = DenseMatrix::from_vec(self.len(), 1, self.sigma.clone())?;
        save_matrix(&sigma, dir.join(format!("{stem}.sigma.alsm")))?;
        let meta = SvdSidecar { rank: self.len(), sigma: self.sigma.clone() };
        fs::write(dir.join(format!("{stem}.json")), serde_json::to_string_pretty(&meta)?)?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum AnySvd {
    Real(SvdTriplet<f64>),
    Complex(SvdTriplet<c64>),
}

/// Load a triplet written by [`SvdTriplet::save`].
pub fn load_svd(dir: &Path, stem: &str) -> Result<AnySvd> {
    let meta: SvdSidecar = serde_json::from_str(&fs::read_to_string(dir.join(format!("{stem}.json")))?)?;
    let u = load_matrix(dir.join(format!("{stem}.u.alsm")))?;
    let v = load_matrix(dir.join(format!("{stem}.v.alsm")))?;
    let sigma = match load_matrix(dir.join(format!("{stem}.sigma.alsm")))? {
        AnyMatrix::Real(s) => s.into_vec(),
        AnyMatrix::Complex(_) => return Err(AlsError::Format("sigma must be real".into())),
    };
    if sigma != meta.sigma || sigma.len() != meta.rank {
        return Err(AlsError::Format("sigma file disagrees with sidecar".into()));
    }
    let check = |ucols: usize, vcols: usize| -> Result<()> {
        if ucols != meta.rank || vcols != meta.rank {
            return Err(AlsError::Format("u/v column counts disagree with rank".into()));
        }
        Ok(())
    };
    match (u, v) {
        (AnyMatrix::Real(u), AnyMatrix::Real(v)) => {
            check(u.cols(), v.cols())?;
            Ok(AnySvd::Real(SvdTriplet { u, sigma, v }))
        }
        (AnyMatrix::Complex(u), AnyMatrix::Complex(v)) => {
            check(u.cols(), v.cols())?;
            Ok(AnySvd::Complex(SvdTriplet { u, sigma, v }))
        }
        _ => Err(AlsError::Format("u and v fields differ".into())),
    }
}

/// Full thin SVD of a dense matrix. Singular values are accurate to about
/// `eps * ||m||_2`.
pub fn small_svd<T: Scalar>(m: &DenseMatrix<T>) -> SvdTriplet<T> {
    if m.rows() >= m.cols() {
        tall_svd(m)
    } else {
        let t = tall_svd(&m.adjoint());
        let mut out = SvdTriplet { u: t.v, sigma: t.sigma, v: t.u };
        out.canonicalize();
        out
    }
}

/// Singular values only.
pub fn singular_values<T: Scalar>(m: &DenseMatrix<T>) -> Vec<f64> {
    small_svd(m).sigma
}

fn tall_svd<T: Scalar>(m: &DenseMatrix<T>) -> SvdTriplet<T> {
    let q = m.cols();
    let qr = householder_qr(m).expect("rows >= cols");

    let mut cols: Vec<Vec<T>> = (0..q).map(|j| qr.r.column(j)).collect();
    let mut vcols: Vec<Vec<T>> = (0..q)
        .map(|j| (0..q).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..q {
            for r in p + 1..q {
                let alpha = dot(&cols[p], &cols[p]).re();
                let beta = dot(&cols[r], &cols[r]).re();
                let gamma = dot(&cols[p], &cols[r]);
                let g = gamma.modulus();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let ph = gamma.phase().conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, r, ph, c, s);
                rotate(&mut vcols, p, r, ph, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = cols.iter().map(|c| norm2(c)).collect();
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let mut ur = DenseMatrix::<T>::zeros(q, q);
    let mut v = DenseMatrix::<T>::zeros(q, q);
    let mut sigma = Vec::with_capacity(q);
    let mut missing = Vec::new();
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        sigma.push(s);
        v.set_column(dst, &vcols[src]);
        if s > f64::MIN_POSITIVE {
            let inv = 1.0 / s;
            let u: Vec<T> = cols[src].iter().map(|x| x.scale(inv)).collect();
            ur.set_column(dst, &u);
        } else {
            missing.push(dst);
        }
    }
    complete_orthonormal(&mut ur, &missing);

    let u = qr.q.matmul(&ur).expect("q is rows x cols");
    let mut out = SvdTriplet { u, sigma, v };
    out.canonicalize();
    out
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], p: usize, r: usize, ph: T, c: f64, s: f64) {
    let (lo, hi) = cols.split_at_mut(r);
    let a = &mut lo[p];
    let b = &mut hi[0];
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let yb = *y * ph;
        let nx = x.scale(c) - yb.scale(s);
        let ny = x.scale(s) + yb.scale(c);
        *x = nx;
        *y = ny;
    }
}

/// Fill the listed (zero) columns of a square matrix with unit vectors
/// orthogonal to all other columns, by Gram–Schmidt on the standard basis.
fn complete_orthonormal<T: Scalar>(u: &mut DenseMatrix<T>, missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let n = u.rows();
    let mut filled: Vec<usize> = (0..u.cols()).filter(|j| !missing.contains(j)).collect();
    let mut candidate = 0;
    for &slot in missing {
        while candidate < n {
            let mut v = vec![T::zero(); n];
            v[candidate] = T::one();
            candidate += 1;
            for _ in 0..2 {
                for &j in &filled {
                    let col = u.column(j);
                    let proj = dot(&col, &v);
                    for (x, &c) in v.iter_mut().zip(&col) {
                        *x -= c * proj;
                    }
                }
            }
            let nv = norm2(&v);
            if nv > 0.5 {
                let v: Vec<T> = v.iter().map(|x| x.scale(1.0 / nv)).collect();
                u.set_column(slot, &v);
                filled.push(slot);
                break;
            }
        }
    }
}
