//! External clustering quality measures: ACC, NMI, Purity, F-score,
//! Precision and ARI.
//!
//! Conventions: ACC uses the optimal one-to-one matching of clusters to
//! classes; NMI is normalized by the geometric mean of the two entropies;
//! pair-counting scores use all `N (N - 1) / 2` unordered pairs. Ratios of
//! the form `0 / 0` are reported as `0` and flagged, except where the two
//! partitions are identical.

use std::collections::BTreeMap;

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;

use crate::error::{GcaeError, Result};

/// Ground truth and predicted labels over the same samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelPair {
    truth: Vec<usize>,
    predicted: Vec<usize>,
}

impl LabelPair {
    pub fn new(truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(GcaeError::shape(
                "metrics",
                format!("{} true labels, {} predicted", truth.len(), predicted.len()),
            ));
        }
        if truth.is_empty() {
            return Err(GcaeError::invalid("metrics need at least one sample"));
        }
        Ok(Self {
            truth: contiguous(truth),
            predicted: contiguous(predicted),
        })
    }

    pub fn len(&self) -> usize {
        self.truth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.truth.is_empty()
    }

    /// Counts `n[class][cluster]`.
    pub fn contingency(&self) -> Vec<Vec<u64>> {
        let classes = self.truth.iter().max().map_or(0, |m| m + 1);
        let clusters = self.predicted.iter().max().map_or(0, |m| m + 1);
        let mut table = vec![vec![0u64; clusters]; classes];
        for (&t, &p) in self.truth.iter().zip(&self.predicted) {
            table[t][p] += 1;
        }
        table
    }

    /// Both labelings describe the same partition.
    pub fn same_partition(&self) -> bool {
        let table = self.contingency();
        let rows_ok = table.iter().all(|r| r.iter().filter(|&&x| x > 0).count() == 1);
        let clusters = table.first().map_or(0, Vec::len);
        let cols_ok = (0..clusters).all(|j| table.iter().filter(|r| r[j] > 0).count() == 1);
        rows_ok && cols_ok
    }
}

fn contiguous(labels: &[usize]) -> Vec<usize> {
    let mut ids = BTreeMap::new();
    for &l in labels {
        let next = ids.len();
        ids.entry(l).or_insert(next);
    }
    labels.iter().map(|l| ids[l]).collect()
}

/// Best fraction of samples matched under a one-to-one cluster/class map.
pub fn accuracy(lp: &LabelPair) -> f64 {
    let table = lp.contingency();
    let size = table.len().max(table[0].len());
    let weights = Matrix::from_fn(size, size, |(i, j)| {
        table.get(i).and_then(|r| r.get(j)).map_or(0i64, |&x| x as i64)
    });
    let (matched, _) = kuhn_munkres(&weights);
    matched as f64 / lp.len() as f64
}

fn entropy(counts: impl Iterator<Item = u64>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// `I(truth; pred) / sqrt(H(truth) H(pred))`. With a zero entropy the score
/// is 1 for identical partitions and 0 otherwise.
pub fn nmi(lp: &LabelPair) -> f64 {
    let table = lp.contingency();
    let n = lp.len() as f64;
    let rows: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols: Vec<u64> = (0..table[0].len()).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let (ht, hp) = (entropy(rows.iter().copied(), n), entropy(cols.iter().copied(), n));
    if ht == 0.0 || hp == 0.0 {
        return if lp.same_partition() { 1.0 } else { 0.0 };
    }
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij > 0 {
                let nij = nij as f64;
                mi += nij / n * (n * nij / (rows[i] as f64 * cols[j] as f64)).ln();
            }
        }
    }
    (mi / (ht * hp).sqrt()).clamp(0.0, 1.0)
}

/// Fraction of samples that belong to the majority class of their cluster.
pub fn purity(lp: &LabelPair) -> f64 {
    let table = lp.contingency();
    let majority: u64 = (0..table[0].len())
        .map(|j| table.iter().map(|r| r[j]).max().unwrap_or(0))
        .sum();
    majority as f64 / lp.len() as f64
}

/// Sample-pair agreement counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairCounts {
    /// Together in both partitions.
    pub tp: u64,
    /// Together in the prediction only.
    pub fp: u64,
    /// Together in the truth only.
    pub fn_: u64,
    /// Apart in both.
    pub tn: u64,
}

impl PairCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

fn pairs(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

pub fn pair_counts(lp: &LabelPair) -> PairCounts {
    let table = lp.contingency();
    let n = lp.len() as u64;
    let together_both: u64 = table.iter().flatten().map(|&x| pairs(x)).sum();
    let together_truth: u64 = table.iter().map(|r| pairs(r.iter().sum())).sum();
    let together_pred: u64 = (0..table[0].len())
        .map(|j| pairs(table.iter().map(|r| r[j]).sum()))
        .sum();
    let tp = together_both;
    let fp = together_pred - tp;
    let fn_ = together_truth - tp;
    PairCounts {
        tp,
        fp,
        fn_,
        tn: pairs(n) - tp - fp - fn_,
    }
}

/// Pair-counting scores. The `*_undefined` flags mark a `0 / 0` that was
/// reported as `0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScores {
    pub fscore: f64,
    pub precision: f64,
    pub recall: f64,
    pub ari: f64,
    pub precision_undefined: bool,
    pub fscore_undefined: bool,
}

pub fn fscore_precision_ari(lp: &LabelPair) -> PairScores {
    let pc = pair_counts(lp);
    let (tp, fp, fn_, tn) = (pc.tp as f64, pc.fp as f64, pc.fn_ as f64, pc.tn as f64);

    let precision_undefined = pc.tp + pc.fp == 0;
    let precision = if precision_undefined { 0.0 } else { tp / (tp + fp) };
    let recall = if pc.tp + pc.fn_ == 0 { 0.0 } else { tp / (tp + fn_) };
    let fscore_undefined = precision + recall == 0.0;
    let fscore = if fscore_undefined {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };

    let denom = (tp + fn_) * (fn_ + tn) + (tp + fp) * (fp + tn);
    let ari = if denom == 0.0 {
        if lp.same_partition() {
            1.0
        } else {
            0.0
        }
    } else {
        2.0 * (tp * tn - fn_ * fp) / denom
    };
    PairScores {
        fscore,
        precision,
        recall,
        ari,
        precision_undefined,
        fscore_undefined,
    }
}

/// All six scores for one labeling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusteringScores {
    pub acc: f64,
    pub nmi: f64,
    pub purity: f64,
    pub fscore: f64,
    pub precision: f64,
    pub ari: f64,
    pub precision_undefined: bool,
    pub fscore_undefined: bool,
}

impl ClusteringScores {
    /// `(name, value)` in reporting order.
    pub fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("ACC", self.acc),
            ("NMI", self.nmi),
            ("Purity", self.purity),
            ("F-score", self.fscore),
            ("Precision", self.precision),
            ("ARI", self.ari),
        ]
    }
}

pub fn evaluate(truth: &[usize], predicted: &[usize]) -> Result<ClusteringScores> {
    let lp = LabelPair::new(truth, predicted)?;
    let pair = fscore_precision_ari(&lp);
    Ok(ClusteringScores {
        acc: accuracy(&lp),
        nmi: nmi(&lp),
        purity: purity(&lp),
        fscore: pair.fscore,
        precision: pair.precision,
        ari: pair.ari,
        precision_undefined: pair.precision_undefined,
        fscore_undefined: pair.fscore_undefined,
    })
}
