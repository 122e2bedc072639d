//! Witnesses for norm bounds. Each one stores what it claims together with the
//! data needed to recompute that claim from scratch, so a third party can check
//! a report without re-sampling anything.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::classical::EpsNormKind;
use super::signs::{infty_to_one_exact, SignPair};
use crate::matrix::{operator_norm, Matrix};

/// Agreement required between a claimed and a recomputed value.
pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{kind} certificate: {reason} (claimed {claimed}, recomputed {recomputed})")]
pub struct CertificateError {
    pub kind: &'static str,
    pub reason: String,
    pub claimed: f64,
    pub recomputed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Certificate {
    /// `value = Σ a_ij α_i β_j`, a lower bound on `‖matrix‖_{∞→1}`.
    SignPairValue {
        matrix: Matrix,
        pair: SignPair,
        value: f64,
    },
    /// `value = ⟨target, dual⟩ / n` with `dual` orthogonal, so `γ₂*(dual) = n`;
    /// a lower bound on `γ₂(target)`.
    Gamma2Dual {
        target: Matrix,
        dual: Matrix,
        value: f64,
    },
    /// `target = x·y` and `value = max_i ‖row_i(x)‖ · max_j ‖col_j(y)‖`, an
    /// upper bound on `γ₂(target)`.
    Factorization {
        target: Matrix,
        x: Matrix,
        y: Matrix,
        value: f64,
    },
    /// `value = ⟨target, functional⟩ / eps_norm` with `eps_norm ≥ ‖functional‖_{∞→1}`;
    /// a lower bound on the classical norm of `target`.
    BellBound {
        target: Matrix,
        functional: Matrix,
        eps_norm: f64,
        eps_kind: EpsNormKind,
        value: f64,
    },
    /// `target = Σ weights_k α_k β_kᵗ` up to `residual` entrywise; `value = Σ weights`
    /// is an upper bound on the classical norm.
    Decomposition {
        target: Matrix,
        weights: Vec<f64>,
        atoms: Vec<SignPair>,
        residual: f64,
        value: f64,
    },
    /// `value = lower.value / upper.value`.
    GapBound {
        lower: Box<Certificate>,
        upper: Box<Certificate>,
        value: f64,
    },
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= VERIFY_TOL * a.abs().max(b.abs()).max(1.0)
}

impl Certificate {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::SignPairValue { .. } => "sign_pair_value",
            Self::Gamma2Dual { .. } => "gamma2_dual",
            Self::Factorization { .. } => "factorization",
            Self::BellBound { .. } => "bell_bound",
            Self::Decomposition { .. } => "decomposition",
            Self::GapBound { .. } => "gap_bound",
        }
    }

    /// The claimed bound.
    pub fn value(&self) -> f64 {
        match self {
            Self::SignPairValue { value, .. }
            | Self::Gamma2Dual { value, .. }
            | Self::Factorization { value, .. }
            | Self::BellBound { value, .. }
            | Self::Decomposition { value, .. }
            | Self::GapBound { value, .. } => *value,
        }
    }

    /// Recomputes the bound from the stored data and returns it, or explains
    /// why the certificate does not hold.
    pub fn verify(&self) -> Result<f64, CertificateError> {
        let kind = self.kind();
        let fail = |reason: String, recomputed: f64| CertificateError {
            kind,
            reason,
            claimed: self.value(),
            recomputed,
        };
        let recomputed = match self {
            Self::SignPairValue { matrix, pair, .. } => {
                if (pair.alpha.len(), pair.beta.len()) != (matrix.rows(), matrix.cols()) {
                    return Err(fail("sign vectors do not match the matrix shape".into(), f64::NAN));
                }
                pair.value(matrix)
            }
            Self::Gamma2Dual { target, dual, .. } => {
                if !same_shape(target, dual) || !dual.is_square() {
                    return Err(fail("dual has the wrong shape".into(), f64::NAN));
                }
                let residual = dual.orthogonality_residual();
                if residual > VERIFY_TOL {
                    return Err(fail(format!("dual is not orthogonal ({residual:e})"), f64::NAN));
                }
                target.inner(dual) / dual.rows() as f64
            }
            Self::Factorization { target, x, y, .. } => {
                if x.cols() != y.rows() || x.rows() != target.rows() || y.cols() != target.cols() {
                    return Err(fail("factor shapes do not compose".into(), f64::NAN));
                }
                let err = x.matmul(y).sub(target).max_abs();
                if err > VERIFY_TOL * target.max_abs().max(1.0) {
                    return Err(fail(format!("x·y misses the target by {err:e}"), f64::NAN));
                }
                let rows = x.row_norms().into_iter().fold(0.0, f64::max);
                let cols = y.col_norms().into_iter().fold(0.0, f64::max);
                rows * cols
            }
            Self::BellBound {
                target,
                functional,
                eps_norm,
                eps_kind,
                ..
            } => {
                if !same_shape(target, functional) {
                    return Err(fail("functional has the wrong shape".into(), f64::NAN));
                }
                let norm = match eps_kind {
                    EpsNormKind::Exact => infty_to_one_exact(functional)
                        .map_err(|e| fail(e.to_string(), f64::NAN))?
                        .0,
                    EpsNormKind::OperatorBound => {
                        let op = operator_norm(functional).map_err(|e| fail(e.to_string(), f64::NAN))?;
                        super::classical::operator_eps_bound(functional.rows(), op)
                    }
                    EpsNormKind::Heuristic => {
                        return Err(fail(
                            "a heuristic functional norm is a lower bound and certifies nothing".into(),
                            f64::NAN,
                        ))
                    }
                };
                if !close(norm, *eps_norm) && norm > *eps_norm {
                    return Err(fail(
                        format!("stated functional norm {eps_norm} is below the recomputed {norm}"),
                        f64::NAN,
                    ));
                }
                if *eps_norm <= 0.0 {
                    return Err(fail("functional norm must be positive".into(), f64::NAN));
                }
                target.inner(functional) / eps_norm
            }
            Self::Decomposition {
                target,
                weights,
                atoms,
                residual,
                ..
            } => {
                if weights.len() != atoms.len() {
                    return Err(fail("weights and atoms differ in length".into(), f64::NAN));
                }
                if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                    return Err(fail(format!("weight {w} is not a non-negative number"), f64::NAN));
                }
                let mut sum = Matrix::zeros(target.rows(), target.cols());
                for (w, atom) in weights.iter().zip(atoms) {
                    if (atom.alpha.len(), atom.beta.len()) != (target.rows(), target.cols()) {
                        return Err(fail("atom has the wrong shape".into(), f64::NAN));
                    }
                    sum = sum.add(&atom.to_matrix().scale(*w));
                }
                let err = sum.sub(target).max_abs();
                if err > residual + VERIFY_TOL {
                    return Err(fail(
                        format!("reconstruction error {err:e} exceeds stated residual {residual:e}"),
                        weights.iter().sum(),
                    ));
                }
                weights.iter().sum()
            }
            Self::GapBound { lower, upper, .. } => {
                let l = lower.verify()?;
                let u = upper.verify()?;
                if u <= 0.0 {
                    return Err(fail("upper bound must be positive".into(), f64::NAN));
                }
                l / u
            }
        };
        if close(recomputed, self.value()) {
            Ok(recomputed)
        } else {
            Err(fail("value mismatch".into(), recomputed))
        }
    }
}

fn same_shape(a: &Matrix, b: &Matrix) -> bool {
    (a.rows(), a.cols()) == (b.rows(), b.cols())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_sign_pair() {
        let c = Certificate::SignPairValue {
            matrix: Matrix::identity(5),
            pair: SignPair::ones(5, 5),
            value: 5.0,
        };
        assert_eq!(c.verify().unwrap(), 5.0);
    }

    #[test]
    fn tampered_decomposition_fails() {
        let half = 0.5;
        let plus = SignPair::ones(2, 2);
        let minus = SignPair {
            alpha: vec![1, -1],
            beta: vec![1, -1],
        };
        let mut c = Certificate::Decomposition {
            target: Matrix::identity(2),
            weights: vec![half, half],
            atoms: vec![plus, minus],
            residual: 0.0,
            value: 1.0,
        };
        assert_eq!(c.verify().unwrap(), 1.0);
        if let Certificate::Decomposition { weights, .. } = &mut c {
            weights[0] = 0.4;
        }
        assert!(c.verify().is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = Certificate::Gamma2Dual {
            target: Matrix::identity(3),
            dual: Matrix::identity(3),
            value: 1.0,
        };
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains("\"type\":\"gamma2_dual\""));
        let back: Certificate = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.verify().unwrap(), 1.0);
    }

    #[test]
    fn heuristic_bell_bound_is_rejected() {
        let c = Certificate::BellBound {
            target: Matrix::identity(2),
            functional: Matrix::identity(2),
            eps_norm: 2.0,
            eps_kind: EpsNormKind::Heuristic,
            value: 1.0,
        };
        assert!(c.verify().is_err());
    }
}
