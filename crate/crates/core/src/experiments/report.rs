use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, GridPoint, Scenario};
use super::stats;
use crate::matrix::MatrixError;
use crate::norms::{Certificate, CertificateError};

pub const SCHEMA_VERSION: &str = "1";

/// Measurements from one trial (or one batch of draws for the tail scenarios).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    /// The derived stream seed, for reference; it is a function of
    /// `(master_seed, trial_index)`.
    pub seed: u64,
    pub size_index: usize,
    pub point: GridPoint,
    pub values: BTreeMap<String, f64>,
    /// Whether the scenario's target event occurred, when it has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub size_index: usize,
    pub point: GridPoint,
    pub metric: String,
    pub count: usize,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
    pub q05: f64,
    pub q95: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_frequency: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    /// Not evaluated because a precondition failed.
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Verdict {
    pub fn check(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            status: if passed { Status::Pass } else { Status::Fail },
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    /// The trial the certificate belongs to; `None` for built-in controls.
    pub trial_index: Option<u64>,
    pub label: String,
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub scenario: Scenario,
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub summaries: Vec<Summary>,
    pub preconditions: Vec<Verdict>,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
    pub certificates: Vec<CertificateEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl ExperimentReport {
    pub(crate) fn new(config: &ExperimentConfig, mut records: Vec<TrialRecord>) -> Self {
        records.sort_by_key(|r| (r.trial_index, r.size_index));
        let summaries = recompute_summaries(&records);
        Self {
            schema: SCHEMA_VERSION.to_string(),
            scenario: config.scenario,
            config: config.clone(),
            records,
            summaries,
            preconditions: Vec::new(),
            verdicts: Vec::new(),
            notes: Vec::new(),
            certificates: Vec::new(),
            wall_clock_seconds: None,
        }
    }

    /// True when no verdict failed.
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.status != Status::Fail)
    }

    pub fn summary(&self, size_index: usize, metric: &str) -> Option<&Summary> {
        self.summaries
            .iter()
            .find(|s| s.size_index == size_index && s.metric == metric)
    }

    pub fn records_at(&self, size_index: usize) -> impl Iterator<Item = &TrialRecord> {
        self.records.iter().filter(move |r| r.size_index == size_index)
    }

    /// Re-evaluates every embedded certificate; returns the failures with labels.
    pub fn verify_certificates(&self) -> Vec<(String, CertificateError)> {
        self.certificates
            .iter()
            .filter_map(|c| c.certificate.verify().err().map(|e| (c.label.clone(), e)))
            .collect()
    }

    /// One row per record: identifiers, grid point, then every metric.
    pub fn write_csv(&self, writer: impl Write) -> Result<(), MatrixError> {
        let metrics: BTreeSet<&str> = self
            .records
            .iter()
            .flat_map(|r| r.values.keys().map(String::as_str))
            .collect();
        let err = |e: csv::Error| MatrixError::Csv(e.to_string());
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["trial_index", "seed", "size_index", "n", "m", "alpha", "theta", "epsilon", "event"];
        header.extend(metrics.iter().copied());
        w.write_record(&header).map_err(err)?;
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.records {
            let mut row = vec![
                r.trial_index.to_string(),
                r.seed.to_string(),
                r.size_index.to_string(),
                r.point.n.to_string(),
                opt(r.point.resolved_m().map(|m| m.to_string())),
                opt(r.point.alpha.map(|x| x.to_string())),
                opt(r.point.theta.map(|x| x.to_string())),
                opt(r.point.epsilon.map(|x| x.to_string())),
                opt(r.event.map(|e| e.to_string())),
            ];
            for m in &metrics {
                row.push(opt(r.values.get(*m).map(|x| x.to_string())));
            }
            w.write_record(&row).map_err(err)?;
        }
        w.flush().map_err(|e| MatrixError::Csv(e.to_string()))
    }
}

/// Summary statistics for every (grid point, metric) pair, computed from the
/// records alone.
pub fn recompute_summaries(records: &[TrialRecord]) -> Vec<Summary> {
    let mut groups: BTreeMap<(usize, String), (GridPoint, Vec<f64>)> = BTreeMap::new();
    let mut events: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for r in records {
        for (k, v) in &r.values {
            groups
                .entry((r.size_index, k.clone()))
                .or_insert_with(|| (r.point, Vec::new()))
                .1
                .push(*v);
        }
        if let Some(e) = r.event {
            let slot = events.entry(r.size_index).or_default();
            slot.0 += usize::from(e);
            slot.1 += 1;
        }
    }
    groups
        .into_iter()
        .map(|((size_index, metric), (point, values))| {
            let mut sorted = values.clone();
            sorted.sort_by(f64::total_cmp);
            Summary {
                size_index,
                point,
                metric,
                count: values.len(),
                mean: stats::mean(&values),
                std: stats::std_dev(&values),
                median: stats::quantile_sorted(&sorted, 0.5),
                q05: stats::quantile_sorted(&sorted, 0.05),
                q95: stats::quantile_sorted(&sorted, 0.95),
                event_frequency: events
                    .get(&size_index)
                    .map(|(hit, total)| *hit as f64 / *total as f64),
            }
        })
        .collect()
}
