use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::ExperimentError;

/// Largest `n` for which reports embed certificates.
pub const CERTIFICATE_MAX_N: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    OrthogonalNormBand,
    QuantumNormConvergence,
    QcGap,
    NonlocalitySweep,
    MeanWidth,
    LevyTails,
    GaussianRowConcentration,
    TauApproximation,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Self::OrthogonalNormBand,
        Self::QuantumNormConvergence,
        Self::QcGap,
        Self::NonlocalitySweep,
        Self::MeanWidth,
        Self::LevyTails,
        Self::GaussianRowConcentration,
        Self::TauApproximation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::OrthogonalNormBand => "orthogonal_norm_band",
            Self::QuantumNormConvergence => "quantum_norm_convergence",
            Self::QcGap => "qc_gap",
            Self::NonlocalitySweep => "nonlocality_sweep",
            Self::MeanWidth => "mean_width",
            Self::LevyTails => "levy_tails",
            Self::GaussianRowConcentration => "gaussian_row_concentration",
            Self::TauApproximation => "tau_approximation",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Default thresholds; also the set of names a config may override.
    pub fn default_thresholds(self) -> BTreeMap<String, f64> {
        let pairs: &[(&str, f64)] = match self {
            Self::OrthogonalNormBand => &[("slack", 0.05), ("band_freq", 0.95)],
            Self::QuantumNormConvergence => &[("ratio_slack", 0.05), ("max_flatness", 10.0)],
            Self::QcGap => &[("freq", 0.9)],
            Self::NonlocalitySweep => &[
                ("margin", 1e-9),
                ("deep_alpha", 0.1),
                ("deep_freq", 0.8),
                ("control_alpha", 4.0),
                ("control_freq", 0.1),
            ],
            Self::MeanWidth => &[("width_tol", 0.02), ("ratio_min", 1.02)],
            Self::LevyTails | Self::GaussianRowConcentration => &[("se_mult", 3.0)],
            Self::TauApproximation => &[("gap_cap", 0.2)],
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    pub fn default_sizes(self) -> Vec<GridPoint> {
        match self {
            Self::OrthogonalNormBand => [8, 16, 20].map(GridPoint::n).to_vec(),
            Self::QuantumNormConvergence => [50, 100, 200, 400].map(GridPoint::n).to_vec(),
            Self::QcGap => vec![GridPoint::n(20)],
            Self::NonlocalitySweep => [0.1, 0.2, 0.5, 1.0, 2.0, 4.0]
                .map(|alpha| GridPoint {
                    alpha: Some(alpha),
                    ..GridPoint::n(20)
                })
                .to_vec(),
            Self::MeanWidth => vec![GridPoint::n(200)],
            Self::LevyTails => {
                let mut v = Vec::new();
                for n in [10, 50] {
                    for theta in [PI / 6.0, PI / 4.0, PI / 3.0, 5.0 * PI / 12.0, PI / 2.0] {
                        v.push(GridPoint {
                            theta: Some(theta),
                            ..GridPoint::n(n)
                        });
                    }
                }
                v
            }
            Self::GaussianRowConcentration => {
                let mut v = Vec::new();
                for (m, eps) in [(400, [0.1, 0.2, 0.3]), (100, [0.3, 0.5, 0.9])] {
                    for e in eps {
                        v.push(GridPoint {
                            m: Some(m),
                            epsilon: Some(e),
                            ..GridPoint::n(10)
                        });
                    }
                }
                v
            }
            Self::TauApproximation => [500, 1000, 2000, 4000]
                .map(|m| GridPoint {
                    m: Some(m),
                    ..GridPoint::n(50)
                })
                .to_vec(),
        }
    }

    /// Trials per grid point; for the tail scenarios, draws per grid point.
    pub fn default_trials(self) -> usize {
        match self {
            Self::OrthogonalNormBand | Self::QcGap => 200,
            Self::QuantumNormConvergence | Self::MeanWidth | Self::NonlocalitySweep => 50,
            Self::LevyTails | Self::GaussianRowConcentration => 100_000,
            Self::TauApproximation => 20,
        }
    }
}

/// One grid point of a scenario. Which fields apply depends on the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPoint {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl GridPoint {
    pub const fn n(n: usize) -> Self {
        Self {
            n,
            m: None,
            alpha: None,
            theta: None,
            epsilon: None,
        }
    }

    /// `m`, or `max(1, round(α·n))` when only `α` is given.
    pub fn resolved_m(&self) -> Option<usize> {
        self.m
            .or_else(|| self.alpha.map(|a| ((a * self.n as f64).round() as usize).max(1)))
    }
}

/// Random matrices fed to `quantum_norm_convergence`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleKind {
    /// `G/√n`.
    Gaussian,
    HaarOrthogonal,
    /// `diag(1, 0, …, 0)`: a negative control with flatness `n`.
    Spiky,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub sizes: Vec<GridPoint>,
    pub trials: usize,
    pub master_seed: u64,
    pub thresholds: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleKind>,
    /// Certificates embedded per grid point (only for `n ≤ CERTIFICATE_MAX_N`).
    pub max_certificates: usize,
    /// Record wall-clock time. Off by default so reports are byte-reproducible.
    #[serde(default)]
    pub timing: bool,
}

/// A config file or flag set where every field except the scenario is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub scenario: Option<Scenario>,
    pub sizes: Option<Vec<GridPoint>>,
    pub trials: Option<usize>,
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub thresholds: BTreeMap<String, f64>,
    pub ensemble: Option<EnsembleKind>,
    pub max_certificates: Option<usize>,
    pub timing: Option<bool>,
}

impl ExperimentConfig {
    pub fn default_for(scenario: Scenario) -> Self {
        Self {
            scenario,
            sizes: scenario.default_sizes(),
            trials: scenario.default_trials(),
            master_seed: 0,
            thresholds: scenario.default_thresholds(),
            ensemble: (scenario == Scenario::QuantumNormConvergence).then_some(EnsembleKind::Gaussian),
            max_certificates: 5,
            timing: false,
        }
    }

    /// Fills unset fields from the scenario defaults, then validates.
    pub fn resolve(partial: PartialConfig) -> Result<Self, ExperimentError> {
        let scenario = partial
            .scenario
            .ok_or_else(|| ExperimentError::Config("scenario is required".into()))?;
        let mut cfg = Self::default_for(scenario);
        if let Some(s) = partial.sizes {
            cfg.sizes = s;
        }
        if let Some(t) = partial.trials {
            cfg.trials = t;
        }
        if let Some(s) = partial.master_seed {
            cfg.master_seed = s;
        }
        for (k, v) in partial.thresholds {
            cfg.thresholds.insert(k, v);
        }
        if partial.ensemble.is_some() {
            cfg.ensemble = partial.ensemble;
        }
        if let Some(c) = partial.max_certificates {
            cfg.max_certificates = c;
        }
        if let Some(t) = partial.timing {
            cfg.timing = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn threshold(&self, name: &str) -> f64 {
        self.thresholds
            .get(name)
            .copied()
            .or_else(|| self.scenario.default_thresholds().get(name).copied())
            .unwrap_or_else(|| panic!("unknown threshold {name}"))
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Config(msg));
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.sizes.is_empty() {
            return bad("sizes must be non-empty".into());
        }
        let known = self.scenario.default_thresholds();
        for (k, v) in &self.thresholds {
            if !known.contains_key(k) {
                return bad(format!(
                    "unknown threshold {k:?} for {}; expected one of {:?}",
                    self.scenario.name(),
                    known.keys().collect::<Vec<_>>()
                ));
            }
            if !v.is_finite() {
                return bad(format!("threshold {k} must be finite"));
            }
        }
        if self.ensemble.is_some() && self.scenario != Scenario::QuantumNormConvergence {
            return bad("ensemble applies only to quantum_norm_convergence".into());
        }
        for p in &self.sizes {
            if p.n == 0 {
                return bad("n must be positive".into());
            }
            let need = |field: &str, present: bool| -> Result<(), ExperimentError> {
                if present {
                    Ok(())
                } else {
                    Err(ExperimentError::Config(format!(
                        "{} needs `{field}` at every size",
                        self.scenario.name()
                    )))
                }
            };
            match self.scenario {
                Scenario::NonlocalitySweep => need("alpha", p.alpha.is_some_and(|a| a > 0.0))?,
                Scenario::LevyTails => need("theta", p.theta.is_some_and(|t| t > 0.0 && t <= PI / 2.0))?,
                Scenario::GaussianRowConcentration => {
                    need("m", p.m.is_some_and(|m| m > 0))?;
                    need("epsilon", p.epsilon.is_some_and(|e| e > 0.0 && e < 1.0))?;
                }
                Scenario::TauApproximation => need("m", p.m.is_some_and(|m| m > 0))?,
                Scenario::OrthogonalNormBand if p.n > crate::norms::EXACT_CAP => {
                    return bad(format!(
                        "orthogonal_norm_band enumerates exactly; n = {} exceeds {}",
                        p.n,
                        crate::norms::EXACT_CAP
                    ));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        for s in Scenario::ALL {
            ExperimentConfig::default_for(s).validate().unwrap();
            assert_eq!(Scenario::parse(s.name()), Some(s));
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = r#"{"scenario":"qc_gap","trails":3}"#;
        assert!(serde_json::from_str::<PartialConfig>(text).is_err());
        let partial = PartialConfig {
            scenario: Some(Scenario::QcGap),
            thresholds: [("frequency".to_string(), 0.5)].into(),
            ..PartialConfig::default()
        };
        assert!(ExperimentConfig::resolve(partial).is_err());
    }

    #[test]
    fn missing_parameters_rejected() {
        let mut cfg = ExperimentConfig::default_for(Scenario::TauApproximation);
        cfg.sizes = vec![GridPoint::n(5)];
        assert!(cfg.validate().is_err());
        cfg.sizes = vec![];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn m_from_alpha() {
        let p = GridPoint {
            alpha: Some(0.05),
            ..GridPoint::n(20)
        };
        assert_eq!(p.resolved_m(), Some(1));
    }
}
