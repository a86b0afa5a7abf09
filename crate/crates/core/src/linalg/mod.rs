//! Dense linear algebra used by every solver and certificate checker.
//!
//! Storage is row-major and dense throughout. Vectors are plain `Vec<f64>` /
//! `&[f64]`; the helpers in [`vector`] provide the Hadamard-style operations
//! the squared-variable formulations lean on.

mod eigen;
mod factor;
mod matrix;
mod qr;
pub mod vector;

pub use eigen::{sym_eig_max, sym_eig_min, sym_eigenvalues};
pub use factor::{solve_augmented, AugmentedSolve, Cholesky, Ldlt, SolvePath};
pub use matrix::{DenseMatrix, DiagonalMatrix};
pub use qr::{nullspace_basis, HouseholderQr};
pub use vector::hadamard_pow;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },
    #[error("singular system: pivot {pivot:e} at index {index} below threshold {threshold:e}")]
    SingularSystem { index: usize, pivot: f64, threshold: f64 },
    #[error("matrix is not symmetric (relative asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("rank deficient: pivot {pivot:e} at column {index} below {threshold:e}")]
    RankDeficient { index: usize, pivot: f64, threshold: f64 },
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

impl LinalgError {
    pub(crate) fn dims(expected: impl Into<String>, got: impl Into<String>) -> Self {
        LinalgError::DimensionMismatch {
            expected: expected.into(),
            got: got.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, LinalgError>;
