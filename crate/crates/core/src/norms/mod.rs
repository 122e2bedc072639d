//! Norms of correlation matrices.
//!
//! * [`signs`]: the injective norm `‖A‖_{∞→1}`, exactly by enumeration or from
//!   below by alternating ascent.
//! * [`gamma2`]: the factorization norm `γ₂` (the quantum norm), bracketed from
//!   the SVD, and a small interior-point oracle.
//! * [`classical`]: the projective norm `‖·‖_{ℓ∞⊗πℓ∞}` (the classical norm),
//!   bounded below by Bell functionals and above by sign-matrix decompositions.
//! * [`gap`]: certified ratios of the two and the Gaussian approximation bound
//!   for unit-vector correlations.
//! * [`certificate`]: serializable witnesses that re-evaluate independently.

pub mod certificate;
pub mod classical;
pub mod gamma2;
pub mod gap;
pub mod signs;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::MatrixError;
pub use certificate::{Certificate, CertificateError};
pub use classical::{
    bell_certificate, bell_functional_from_svd, bell_functional_with, classical_lower_bound, classical_upper_bound,
    BellFunctional, BellOptions, ClassicalUpper, ConvexDecomposition, EpsNormKind,
    GrothendieckConstants, KG,
};
pub use gamma2::{
    gamma2_bracket, gamma2_bracket_with, gamma2_oracle, gamma2_oracle_interval,
    gamma2_star_orthogonal, Gamma2Bracket, Gamma2Options,
};
pub use gap::{
    quantum_classical_gap, quantum_classical_gap_with, tau_gap_bound, tau_gap_from, GapEstimate,
    TauGap,
};
pub use signs::{infty_to_one_exact, infty_to_one_heuristic, SignPair, EXACT_CAP};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("dimension {n} exceeds the exact enumeration cap {cap}; use the heuristic")]
    ExceedsExactCap { n: usize, cap: usize },
    #[error("matrix is not orthogonal: ‖OOᵗ − I‖_F = {residual:e}")]
    NotOrthogonal { residual: f64 },
    #[error("norm undefined for the zero matrix")]
    ZeroMatrix,
    #[error("Bell functional has non-positive norm {0}")]
    ZeroFunctionalNorm(f64),
    #[error("gamma2 oracle did not converge; value lies in [{lower}, {upper}]")]
    Gamma2NotConverged { lower: f64, upper: f64 },
    #[error("gamma2 oracle is limited to n <= {cap}, got {n}")]
    OracleTooLarge { n: usize, cap: usize },
    #[error(
        "atom budget of {budget} exhausted; best decomposition has weight {} and dual bound {lower}",
        best.weight_sum()
    )]
    AtomBudget {
        budget: usize,
        best: Box<ConvexDecomposition>,
        lower: f64,
    },
    #[error("decomposition residual {residual:e} exceeds tolerance {tol:e}")]
    Reconstruction { residual: f64, tol: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Two-sided estimate of a norm with the witnesses for each side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormBracket {
    pub lower: f64,
    pub upper: f64,
    pub lower_certificate: Certificate,
    pub upper_certificate: Certificate,
}

impl NormBracket {
    pub fn ratio(&self) -> f64 {
        self.upper / self.lower
    }
}
