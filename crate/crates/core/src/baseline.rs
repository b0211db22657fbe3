//! Random-projection hashing baseline: seeded row-orthonormal projection of
//! the column-centered, kernelized views, sign codes, then the same Hamming
//! clustering as GCAE.

use std::time::Instant;

use crate::binclust::{solve_qh, BinaryClusterModel};
use crate::data::{sample_anchors, MultiViewDataset};
use crate::encoder::Hyperparameters;
use crate::error::{GcaeError, Result};
use crate::kernel::{estimate_kernel_width, kernelize};
use crate::linalg::{random_row_orthonormal_with, seeded_rng, sign_matrix, streams, DenseMatrix};

#[derive(Debug, Clone)]
pub struct BaselineFit {
    /// `b x N` codes.
    pub codes: DenseMatrix,
    pub model: BinaryClusterModel,
    pub seconds: f64,
}

/// Kernel features of all views side by side, each column centered.
pub fn kernel_features(ds: &MultiViewDataset, hyper: &Hyperparameters) -> Result<DenseMatrix> {
    let n = ds.n_samples();
    let t = hyper.anchors.min(n);
    let anchors = sample_anchors(ds, t, hyper.seed)?;
    let mut out = DenseMatrix::zeros(n, t * ds.n_views());
    for (v, view) in ds.views().iter().enumerate() {
        let eta = hyper.eta.unwrap_or_else(|| {
            estimate_kernel_width(
                view,
                &anchors.anchors[v],
                &anchors.indices,
                hyper.width_pairs,
                hyper.seed.wrapping_add(v as u64),
            )
        });
        let mut phi = kernelize(view, &anchors, v, eta)?.phi;
        for mut col in phi.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        out.view_mut((0, v * t), (n, t)).copy_from(&phi);
    }
    Ok(out)
}

pub fn run_baseline(ds: &MultiViewDataset, hyper: &Hyperparameters) -> Result<BaselineFit> {
    let start = Instant::now();
    hyper.validate_for(ds.n_samples())?;
    let features = kernel_features(ds, hyper)?;
    if hyper.bits > features.ncols() {
        return Err(GcaeError::invalid(format!(
            "baseline needs bits ({}) <= feature dimension ({})",
            hyper.bits,
            features.ncols()
        )));
    }
    let mut rng = seeded_rng(hyper.seed, streams::BASELINE);
    let projection = random_row_orthonormal_with(hyper.bits, features.ncols(), &mut rng)?;
    let codes = sign_matrix(&(projection * features.transpose()));
    let model = solve_qh(&codes, hyper.clusters, &hyper.cluster, hyper.seed)?;
    Ok(BaselineFit {
        codes,
        model,
        seconds: start.elapsed().as_secs_f64(),
    })
}
