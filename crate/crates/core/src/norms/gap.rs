//! Certified quantum/classical ratios and the Gaussian approximation bound for
//! unit-vector correlations.

use serde::{Deserialize, Serialize};

use super::certificate::Certificate;
use super::classical::{
    bell_certificate, bell_functional_with, classical_lower_bound, BellFunctional, BellOptions, KG,
};
use super::gamma2::{gamma2_bracket_with, Gamma2Options};
use super::NormError;
use crate::matrix::{norm2, Matrix};
use crate::sample::{coupled_gaussians, SeedSpec};

/// Lower estimate of `‖t‖_π / γ₂(t)` and its ingredients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    /// `classical_lower / gamma2_upper`.
    pub value: f64,
    pub classical_lower: f64,
    pub gamma2_lower: f64,
    pub gamma2_upper: f64,
    pub bell: BellFunctional,
    /// True when the functional norm is exact or a proven upper bound.
    pub certified: bool,
    /// `⟨t, A⟩ / heuristic‖A‖_{∞→1} / gamma2_upper`, only when the norm was not exact.
    /// Uses a lower bound on the functional norm, so it may overstate the gap.
    pub heuristic_value: Option<f64>,
}

impl GapEstimate {
    pub fn certificate(&self, t: &Matrix, gamma2_upper: Certificate) -> Option<Certificate> {
        Some(Certificate::GapBound {
            lower: Box::new(bell_certificate(t, &self.bell)?),
            upper: Box::new(gamma2_upper),
            value: self.value,
        })
    }
}

/// `classical_lower_bound(t, UVᵗ) / γ₂-upper(t)`; above one it certifies that
/// `t / γ₂(t)` is a quantum correlation outside the classical set.
pub fn quantum_classical_gap(t: &Matrix) -> Result<f64, NormError> {
    Ok(quantum_classical_gap_with(t, BellOptions::default(), Gamma2Options::default())?.0.value)
}

/// Also returns the factorization certificate of the `γ₂` upper bound.
pub fn quantum_classical_gap_with(
    t: &Matrix,
    bell: BellOptions,
    g2: Gamma2Options,
) -> Result<(GapEstimate, Certificate), NormError> {
    let bracket = gamma2_bracket_with(t, g2)?;
    let bf = bell_functional_with(t, bell)?;
    let classical_lower = classical_lower_bound(t, &bf)?;
    let upper = bracket.bracket.upper;
    let heuristic_value = bf
        .heuristic_norm
        .filter(|h| *h > 0.0)
        .map(|h| t.inner(&bf.a) / h / upper);
    let estimate = GapEstimate {
        value: classical_lower / upper,
        classical_lower,
        gamma2_lower: bracket.bracket.lower,
        gamma2_upper: upper,
        certified: bf.is_certified(),
        bell: bf,
        heuristic_value,
    };
    Ok((estimate, bracket.bracket.upper_certificate))
}

/// The three-term bound on `‖τ − GHᵗ/m‖_π` for one coupled draw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauGap {
    pub bound: f64,
    pub max_eps: f64,
    pub max_delta: f64,
    pub max_g: f64,
    pub max_h: f64,
}

/// Bound on `‖τ − GHᵗ/m‖_π` for the `τ`, `G`, `H` drawn under `seed`.
pub fn tau_gap_bound(n: usize, m: usize, seed: SeedSpec) -> f64 {
    let (g, h) = coupled_gaussians(n, m, seed);
    tau_gap_from(&g, &h).bound
}

/// With `ε_i = g_i/‖g_i‖ − g_i/√m` and `δ_j` likewise for `h_j`,
/// `τ − GHᵗ/m = (⟨ε_i, h_j⟩)/√m + (⟨g_i, δ_j⟩)/√m + (⟨ε_i, δ_j⟩)`, and each
/// Gram matrix has classical norm at most `K_G · max‖x_i‖ · max‖y_j‖`.
pub fn tau_gap_from(g: &Matrix, h: &Matrix) -> TauGap {
    let m = g.cols() as f64;
    let root = m.sqrt();
    let stats = |a: &Matrix| -> (f64, f64) {
        let mut max_row: f64 = 0.0;
        let mut max_dev: f64 = 0.0;
        for i in 0..a.rows() {
            let r = a.row(i);
            let norm = norm2(r);
            max_row = max_row.max(norm);
            // ‖r/‖r‖ − r/√m‖ = |1 − ‖r‖/√m|
            let dev = if norm > 1e-300 { (1.0 - norm / root).abs() } else { 1.0 };
            max_dev = max_dev.max(dev);
        }
        (max_row, max_dev)
    };
    let (max_g, max_eps) = stats(g);
    let (max_h, max_delta) = stats(h);
    let bound = KG.kg_upper * (max_eps * max_h / root + max_g * max_delta / root + max_eps * max_delta);
    TauGap {
        bound,
        max_eps,
        max_delta,
        max_g,
        max_h,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ones_is_classical() {
        let g = quantum_classical_gap(&Matrix::filled(6, 6, 1.0)).unwrap();
        assert!(g <= 1.0 + 1e-12, "{g}");
    }

    #[test]
    fn tau_bound_is_deterministic_and_small_for_large_m() {
        let s = SeedSpec::new(5, 1);
        assert_eq!(tau_gap_bound(50, 4000, s), tau_gap_bound(50, 4000, s));
        assert!(tau_gap_bound(50, 4000, s) < 0.2);
    }

    #[test]
    fn closed_form_deviation() {
        let g = crate::sample::gaussian(3, 7, SeedSpec::new(1, 0));
        let tg = tau_gap_from(&g, &g);
        let direct = (0..3)
            .map(|i| {
                let r = g.row(i);
                let nr = norm2(r);
                let e: Vec<f64> = r.iter().map(|x| x / nr - x / 7f64.sqrt()).collect();
                norm2(&e)
            })
            .fold(0.0, f64::max);
        assert!((tg.max_eps - direct).abs() < 1e-12);
    }
}
