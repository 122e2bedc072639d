//! Quantum and classical correlation norms of random matrices.
//!
//! The crate computes the factorization norm `γ₂` (which bounds quantum
//! correlations), the projective norm `‖·‖_{ℓ∞⊗πℓ∞}` (classical
//! correlations) and the injective norm `‖·‖_{∞→1}` for real square
//! matrices, and certifies gaps between them. Alongside the norms it provides
//! seeded samplers for Gaussian, Haar and bi-invariant ensembles, the limiting
//! singular-value law of products of Gaussian matrices, and a reproducible
//! Monte Carlo harness.
//!
//! ```
//! use qcorr::matrix::Matrix;
//! use qcorr::norms::{classical_lower_bound, classical_upper_bound, BellFunctional};
//!
//! let chsh = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, -1.0]]).unwrap();
//! let lower = classical_lower_bound(&chsh, &BellFunctional::exact(chsh.clone()).unwrap()).unwrap();
//! let upper = classical_upper_bound(&chsh, 16, 1e-9).unwrap();
//! assert!((lower - 2.0).abs() < 1e-9);
//! assert!((upper.decomposition.weight_sum() - 2.0).abs() < 1e-6);
//! ```
//!
//! Numerical results that matter come with a [`norms::Certificate`], which
//! re-evaluates from its own data and can be checked independently of the
//! code that produced it.

pub mod experiments;
pub mod matrix;
pub mod norms;
pub mod sample;
pub mod spectral;

use thiserror::Error;

pub use matrix::{Matrix, MatrixError};
pub use sample::SeedSpec;

/// Any error from the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Sample(#[from] sample::SampleError),
    #[error(transparent)]
    Norm(#[from] norms::NormError),
    #[error(transparent)]
    Certificate(#[from] norms::CertificateError),
    #[error(transparent)]
    Spectral(#[from] spectral::SpectralError),
    #[error(transparent)]
    Experiment(#[from] experiments::ExperimentError),
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/matrices.md")]
    mod matrices {}
    #[doc = include_str!("../../../book/src/norms.md")]
    mod norms {}
    #[doc = include_str!("../../../book/src/certificates.md")]
    mod certificates {}
    #[doc = include_str!("../../../book/src/spectral.md")]
    mod spectral {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
