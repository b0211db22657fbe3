//! JSON reports written next to the CSV artifacts.

use std::path::Path;

use gcae::metrics::ClusteringScores;
use gcae::LossBreakdown;
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub acc: f64,
    pub nmi: f64,
    pub purity: f64,
    pub fscore: f64,
    pub precision: f64,
    pub ari: f64,
}

impl Metrics {
    /// Scores plus a warning for every 0/0 that was reported as zero.
    pub fn from_scores(s: &ClusteringScores) -> (Self, Vec<String>) {
        let mut warnings = Vec::new();
        if s.precision_undefined {
            warnings.push("precision undefined (no pair shares a predicted cluster); reported as 0".to_string());
        }
        if s.fscore_undefined {
            warnings.push("F-score undefined (precision and recall both 0); reported as 0".to_string());
        }
        let m = Metrics {
            acc: s.acc,
            nmi: s.nmi,
            purity: s.purity,
            fscore: s.fscore,
            precision: s.precision,
            ari: s.ari,
        };
        (m, warnings)
    }

    /// `key=value` lines in a fixed order.
    pub fn key_values(&self) -> String {
        [
            ("ACC", self.acc),
            ("NMI", self.nmi),
            ("Purity", self.purity),
            ("F-score", self.fscore),
            ("Precision", self.precision),
            ("ARI", self.ari),
        ]
        .iter()
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub total: f64,
    pub graph: f64,
    pub autoencoder: f64,
    pub cluster: f64,
}

impl TrajectoryPoint {
    pub fn from_losses(losses: &[LossBreakdown]) -> Vec<Self> {
        losses
            .iter()
            .enumerate()
            .map(|(iteration, l)| TrajectoryPoint {
                iteration,
                total: l.total(),
                graph: l.graph,
                autoencoder: l.autoencoder,
                cluster: l.cluster,
            })
            .collect()
    }
}

/// Summary of one `fit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Absent when the dataset has no labels.
    pub metrics: Option<Metrics>,
    /// Entry 0 is the loss at initialization.
    pub trajectory: Vec<TrajectoryPoint>,
    /// Final view weights `p`.
    pub weights: Vec<f64>,
    /// Wall-clock seconds of the optimization.
    pub seconds: f64,
    pub config: String,
    /// `||B Bᵀ / N - I||_F` of the final codes.
    pub decorrelation_residual: f64,
    pub bits: usize,
    pub seed: u64,
    pub n_samples: usize,
    pub clusters: usize,
    /// Kernel width used per view.
    pub eta: Vec<f64>,
    /// Original label values; label `i` in the files stands for `label_values[i]`.
    pub label_values: Vec<i64>,
    pub warnings: Vec<String>,
}

/// Summary of one `eval`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metrics: Metrics,
    pub n_samples: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub metrics: Metrics,
    pub seconds: f64,
    pub warnings: Vec<String>,
}

/// Side-by-side results of `benchmark`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    /// Absent in baseline-only mode.
    pub gcae: Option<MethodResult>,
    pub baseline: MethodResult,
    pub config: String,
    pub bits: usize,
    pub seed: u64,
}

type Column = fn(&MethodResult) -> f64;

impl BenchmarkReport {
    pub fn table(&self) -> String {
        let mut out = format!("{:<10}{:>10}{:>10}\n", "metric", "GCAE", "baseline");
        let cell = |r: &Option<MethodResult>, f: Column| match r {
            Some(r) => format!("{:>10.4}", f(r)),
            None => format!("{:>10}", "-"),
        };
        let rows: [(&str, Column); 7] = [
            ("ACC", |r| r.metrics.acc),
            ("NMI", |r| r.metrics.nmi),
            ("Purity", |r| r.metrics.purity),
            ("F-score", |r| r.metrics.fscore),
            ("Precision", |r| r.metrics.precision),
            ("ARI", |r| r.metrics.ari),
            ("seconds", |r| r.seconds),
        ];
        let baseline = Some(self.baseline.clone());
        for (name, f) in rows {
            out.push_str(&format!("{name:<10}{}{}\n", cell(&self.gcae, f), cell(&baseline, f)));
        }
        out
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Numerical(format!("cannot serialize report: {e}")))?;
    gcae::data::write_text(path, &(text + "\n"))?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Io(format!("malformed report {}: {e}", path.display())))
}
