//! RBF anchor mapping: every view becomes an `N x t` matrix of kernel
//! values against the same `t` anchor samples.

use rand::Rng;

use crate::data::AnchorSet;
use crate::error::{GcaeError, Result};
use crate::linalg::{seeded_rng, streams, DenseMatrix};

#[derive(Debug, Clone)]
pub struct KernelizedView {
    /// `N x t`, entries in `(0, 1]`.
    pub phi: DenseMatrix,
    pub eta: f64,
    pub anchor_indices: Vec<usize>,
}

/// `phi[i][j] = exp(-||x_i - a_j||² / eta)`.
///
/// Underflow is clamped to the smallest positive normal `f64` so every entry
/// stays strictly positive.
pub fn rbf_map(view: &DenseMatrix, anchors: &DenseMatrix, eta: f64) -> Result<DenseMatrix> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(GcaeError::invalid(format!("kernel width must be positive, got {eta}")));
    }
    if view.ncols() != anchors.ncols() {
        return Err(GcaeError::shape(
            "rbf_map",
            format!("view has {} features, anchors have {}", view.ncols(), anchors.ncols()),
        ));
    }
    let sq = squared_distances(view, anchors);
    Ok(sq.map(|d| (-d / eta).exp().max(f64::MIN_POSITIVE)))
}

/// Kernelizes view `v` of a dataset against the shared anchors.
pub fn kernelize(view: &DenseMatrix, anchors: &AnchorSet, v: usize, eta: f64) -> Result<KernelizedView> {
    let a = anchors
        .anchors
        .get(v)
        .ok_or_else(|| GcaeError::invalid(format!("no anchors for view {v}")))?;
    Ok(KernelizedView {
        phi: rbf_map(view, a, eta)?,
        eta,
        anchor_indices: anchors.indices.clone(),
    })
}

/// Pairwise squared Euclidean distances between rows, `N x t`.
///
/// Computed by direct differences, so identical rows give exactly zero.
fn squared_distances(x: &DenseMatrix, a: &DenseMatrix) -> DenseMatrix {
    let (n, t, d) = (x.nrows(), a.nrows(), x.ncols());
    let xt = x.transpose();
    let at = a.transpose();
    let mut out = DenseMatrix::zeros(n, t);
    for j in 0..t {
        let aj = at.column(j);
        for i in 0..n {
            let xi = xt.column(i);
            let mut s = 0.0;
            for k in 0..d {
                let diff = xi[k] - aj[k];
                s += diff * diff;
            }
            out[(i, j)] = s;
        }
    }
    out
}

/// Mean squared distance between samples and anchors, used as the default
/// kernel width.
///
/// Pairs where the sample is the anchor itself are skipped. When
/// `sample_pairs` covers every pair the mean is exact; otherwise pairs are
/// drawn uniformly with replacement. Returns `1.0` when every considered
/// distance is zero.
pub fn estimate_kernel_width(
    view: &DenseMatrix,
    anchors: &DenseMatrix,
    anchor_indices: &[usize],
    sample_pairs: usize,
    seed: u64,
) -> f64 {
    let (n, t) = (view.nrows(), anchors.nrows());
    let dist = |i: usize, j: usize| (view.row(i) - anchors.row(j)).norm_squared();
    let is_self = |i: usize, j: usize| anchor_indices.get(j) == Some(&i);

    let (mut sum, mut count) = (0.0, 0usize);
    if sample_pairs >= n * t {
        for i in 0..n {
            for j in 0..t {
                if !is_self(i, j) {
                    sum += dist(i, j);
                    count += 1;
                }
            }
        }
    } else {
        let mut rng = seeded_rng(seed, streams::KERNEL_WIDTH);
        for _ in 0..sample_pairs {
            let i = rng.random_range(0..n);
            let j = rng.random_range(0..t);
            if !is_self(i, j) {
                sum += dist(i, j);
                count += 1;
            }
        }
    }
    let mean = if count == 0 { 0.0 } else { sum / count as f64 };
    if mean > 0.0 && mean.is_finite() {
        mean
    } else {
        1.0
    }
}
