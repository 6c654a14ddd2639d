//! Seeded Gaussian sampling.
//!
//! The bit source is ChaCha20 (`rand_chacha`), keyed through
//! `SeedableRng::seed_from_u64`. Uniforms take the top 53 bits of each
//! `next_u64` word, and normals come from the Box–Muller transform, both
//! outputs of a pair used in order. Matrices are filled row-major; a complex
//! entry consumes two normals (real part first), each scaled by `1/sqrt(2)`
//! so the entry has unit variance.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::matrix::DenseMatrix;
use crate::scalar::{Field, Scalar};

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

/// Stream of standard normal variates.
pub struct GaussianStream {
    rng: ChaCha20Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        GaussianStream { rng: ChaCha20Rng::seed_from_u64(seed), spare: None }
    }

    /// Uniform on `(0, 1]`.
    fn open_uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * TWO_POW_M53
    }

    /// Uniform on `[0, 1)`.
    fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * TWO_POW_M53
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let r = (-2.0 * self.open_uniform().ln()).sqrt();
        let theta = std::f64::consts::TAU * self.uniform();
        let (s, c) = theta.sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    /// Unit-variance scalar: `N(0, 1)` for reals, `N(0, 1/2) + i N(0, 1/2)`
    /// for complex.
    pub fn next_scalar<T: Scalar>(&mut self) -> T {
        match T::FIELD {
            Field::Real => T::from_real(self.next_normal()),
            Field::Complex => {
                let re = self.next_normal() * std::f64::consts::FRAC_1_SQRT_2;
                let im = self.next_normal() * std::f64::consts::FRAC_1_SQRT_2;
                T::from_parts(re, im)
            }
        }
    }

    pub fn vector<T: Scalar>(&mut self, len: usize) -> Vec<T> {
        (0..len).map(|_| self.next_scalar()).collect()
    }
}

/// `rows x cols` matrix of i.i.d. unit-variance Gaussians over `T`'s field.
/// Identical `(rows, cols, seed, field)` always gives identical bits.
pub fn gaussian_matrix<T: Scalar>(rows: usize, cols: usize, seed: u64) -> DenseMatrix<T> {
    assert!(rows >= 1 && cols >= 1, "gaussian_matrix needs positive dimensions");
    let mut g = GaussianStream::new(seed);
    DenseMatrix::from_raw(rows, cols, g.vector(rows * cols))
}
