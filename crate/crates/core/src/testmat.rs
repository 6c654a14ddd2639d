//! Synthetic benchmark matrices `A = F Σ G` with a prescribed spectrum.
//!
//! `F` and `G` are unitary DFTs (or seeded real orthogonal matrices) and
//! `Σ` is `m x n` diagonal with, for 1-based `i`,
//!
//! ```text
//! Σ_ii = δ^(floor(i/2) / (k/2))                 for i = 1..=k
//! Σ_ii = δ (min(m,n) - i) / (min(m,n) - k - 1)   for i = k+1..=min(m,n)
//! ```
//!
//! so `||A||_2 = 1` and the best rank-k spectral error is `σ_{k+1} = δ`.

use std::f64::consts::TAU;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{AlsError, Result};
use crate::io::AnyMatrix;
use crate::matrix::DenseMatrix;
use crate::qr::householder_qr;
use crate::random::gaussian_matrix;
use crate::scalar::{c64, Scalar};

/// Default cap on the working set of [`build_test_matrix`].
pub const DEFAULT_MEMORY_BUDGET: u64 = 3 << 30;

/// Seed offset separating the right orthogonal factor from the left one.
const RIGHT_FACTOR_SALT: u64 = 0x5851_f42d_4c95_7f2d;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    Dft,
    RealOrthogonal,
}

impl Transform {
    pub fn as_str(self) -> &'static str {
        match self {
            Transform::Dft => "dft",
            Transform::RealOrthogonal => "real_orthogonal",
        }
    }
}

impl std::fmt::Display for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Transform {
    type Err = AlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dft" => Ok(Transform::Dft),
            "real" | "real_orthogonal" => Ok(Transform::RealOrthogonal),
            other => Err(AlsError::config(format!("unknown transform {other:?} (expected dft or real)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestMatrixSpec {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub transform: Transform,
    /// Only used by [`Transform::RealOrthogonal`].
    pub seed: u64,
}

impl TestMatrixSpec {
    pub fn new(m: usize, n: usize, k: usize, delta: f64, transform: Transform) -> Self {
        TestMatrixSpec { m, n, k, delta, transform, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn min_dim(&self) -> usize {
        self.m.min(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(AlsError::config("m and n must be positive"));
        }
        if self.k == 0 || self.k % 2 != 0 {
            return Err(AlsError::config(format!("k must be positive and even, got {}", self.k)));
        }
        if self.k + 1 >= self.min_dim() {
            return Err(AlsError::config(format!(
                "k must be below min(m, n) - 1, got k = {} for {}x{}",
                self.k, self.m, self.n
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(AlsError::config(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        Ok(())
    }

    fn scalar_bytes(&self) -> u64 {
        match self.transform {
            Transform::Dft => 16,
            Transform::RealOrthogonal => 8,
        }
    }

    /// Peak bytes held while building the matrix.
    pub fn required_bytes(&self) -> u64 {
        let (m, n, r) = (self.m as u64, self.n as u64, self.min_dim() as u64);
        let words = match self.transform {
            Transform::Dft => m * n + m * r + r * n,
            // Gaussian draw plus Q for each side, then the two thin factors.
            Transform::RealOrthogonal => m * n + 2 * m * m.max(n) + m * r + r * n,
        };
        words * self.scalar_bytes()
    }
}

/// Diagonal of `Σ`, length `min(m, n)`.
pub fn sigma_spectrum(spec: &TestMatrixSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let (k, r) = (spec.k, spec.min_dim());
    let half = (k / 2) as f64;
    let tail_den = (r - k - 1) as f64;
    Ok((1..=r)
        .map(|i| {
            if i <= k {
                spec.delta.powf((i / 2) as f64 / half)
            } else {
                spec.delta * (r - i) as f64 / tail_den
            }
        })
        .collect())
}

/// Unitary DFT, entry `(p, q)` (0-based) equal to `exp(-2 pi i p q / n) / sqrt(n)`.
pub fn dft_matrix(n: usize) -> DenseMatrix<c64> {
    dft_block(n, n, n)
}

/// Leading `rows x cols` block of the `n x n` unitary DFT.
fn dft_block(n: usize, rows: usize, cols: usize) -> DenseMatrix<c64> {
    let scale = 1.0 / (n as f64).sqrt();
    DenseMatrix::from_fn(rows, cols, |p, q| {
        // Reduce p*q mod n first so the angle stays accurate for large n.
        let idx = ((p as u128 * q as u128) % n as u128) as f64;
        let (s, c) = (-TAU * idx / n as f64).sin_cos();
        c64::new(c * scale, s * scale)
    })
}

/// Haar-distributed orthogonal (real) or unitary (complex) matrix: the `Q`
/// of a seeded Gaussian, with `R`'s diagonal made positive.
pub fn random_unitary<T: Scalar>(n: usize, seed: u64) -> DenseMatrix<T> {
    householder_qr(&gaussian_matrix::<T>(n, n, seed)).expect("square").q
}

/// Seeded real orthogonal matrix.
pub fn real_orthogonal_matrix(n: usize, seed: u64) -> DenseMatrix<f64> {
    random_unitary(n, seed)
}

/// `U diag(sigma) V*` with random unitary `U: m x m`, `V: n x n`; the
/// property-test workhorse for matrices with known spectra.
pub fn matrix_with_spectrum<T: Scalar>(m: usize, n: usize, sigma: &[f64], seed: u64) -> DenseMatrix<T> {
    assert!(sigma.len() <= m.min(n));
    let r = sigma.len();
    let u = random_unitary::<T>(m, seed).leading_columns(r);
    let v = random_unitary::<T>(n, seed ^ RIGHT_FACTOR_SALT).leading_columns(r);
    let s: Vec<T> = sigma.iter().map(|&x| T::from_real(x)).collect();
    u.scale_columns(&s).matmul_adjoint(&v).expect("shapes agree")
}

/// Dense `A = F Σ G` within [`DEFAULT_MEMORY_BUDGET`].
pub fn build_test_matrix(spec: &TestMatrixSpec) -> Result<AnyMatrix> {
    build_test_matrix_with_budget(spec, DEFAULT_MEMORY_BUDGET)
}

/// Dense `A = F Σ G`, plain matrix products throughout.
pub fn build_test_matrix_with_budget(spec: &TestMatrixSpec, budget: u64) -> Result<AnyMatrix> {
    let sigma = sigma_spectrum(spec)?;
    let required = spec.required_bytes();
    if required > budget {
        return Err(AlsError::BudgetExceeded { required, budget });
    }
    let (m, n, r) = (spec.m, spec.n, spec.min_dim());
    Ok(match spec.transform {
        Transform::Dft => {
            let f = dft_block(m, m, r);
            let g = dft_block(n, r, n);
            AnyMatrix::Complex(assemble(&f, &sigma, &g))
        }
        Transform::RealOrthogonal => {
            let f = real_orthogonal_matrix(m, spec.seed).leading_columns(r);
            let g = real_orthogonal_matrix(n, spec.seed ^ RIGHT_FACTOR_SALT).leading_rows(r);
            AnyMatrix::Real(assemble(&f, &sigma, &g))
        }
    })
}

fn assemble<T: Scalar>(f: &DenseMatrix<T>, sigma: &[f64], g: &DenseMatrix<T>) -> DenseMatrix<T> {
    let s: Vec<T> = sigma.iter().map(|&x| T::from_real(x)).collect();
    f.scale_columns(&s).matmul(g).expect("F is m x r, G is r x n")
}
