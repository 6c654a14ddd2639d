//! Low-rank approximation by randomized-start alternating least squares.
//!
//! A few rounds of alternating least squares from a Gaussian start give
//! nearly optimal rank-k approximations in both the spectral and Frobenius
//! norms; no convergence test is involved. This crate provides:
//!
//! - dense real/complex kernels: products, Householder QR, one-sided Jacobi
//!   SVD, least-squares and pseudoinverse solves ([`matrix`], [`qr`], [`svd`],
//!   [`lstsq`]);
//! - the iteration itself ([`als`]) and conversion of its output to SVD form
//!   ([`convert`]);
//! - power-method spectral-norm estimation ([`spectral`]);
//! - synthetic test matrices with prescribed spectra ([`testmat`]) and the
//!   benchmark/verification harness behind the `als-bench` binary
//!   ([`bench`], [`verify`]).

pub mod als;
pub mod bench;
pub mod convert;
pub mod error;
pub mod io;
pub mod lstsq;
pub mod matrix;
pub mod parallel;
pub mod qr;
pub mod random;
pub mod scalar;
pub mod spectral;
pub mod svd;
pub mod testmat;
pub mod verify;

pub use als::{als_init, als_run, approximation_error, AlsConfig, AlsMode, AlsStart, AlsState, ErrorNorm, Factorization};
pub use convert::factorization_to_svd;
pub use error::{AlsError, Result};
pub use io::AnyMatrix;
pub use lstsq::{lstsq_solve, lstsq_solve_right};
pub use matrix::DenseMatrix;
pub use qr::{householder_qr, projector, QrResult};
pub use random::gaussian_matrix;
pub use scalar::{c64, Field, Scalar};
pub use spectral::{power_method_norm, LinearOperator, ResidualOperator};
pub use svd::{small_svd, SvdTriplet};
pub use testmat::{build_test_matrix, sigma_spectrum, TestMatrixSpec, Transform};
