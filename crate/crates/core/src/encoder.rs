//! Graph-collaborated auto-encoder hashing.
//!
//! Each view owns an affinity graph `Z^v` (kept close to its low-rank
//! factorization `F^v G^vᵀ`) and a row-orthonormal projection `W^v`; all
//! views share one `±1` code matrix `B`. The objective
//!
//! ```text
//! Σ_v ||F^v G^vᵀ - Z^v||² + (p^v)^k (||W^v Z^v - B||² + ||Z^v - W^vᵀ B||²) + λ ||B - Q H||²
//! ```
//!
//! is minimized block by block: `Z^v`, `W^v`, `B`, `(Q, H)`, then the view
//! weights `p`.

use std::time::Instant;

use log::debug;
use rayon::prelude::*;

use crate::binclust::{refine_qh, solve_qh, BinaryClusterModel, ClusterParams};
use crate::data::{sample_anchors, MultiViewDataset};
use crate::error::{GcaeError, Result};
use crate::graphs::{gram, learn_factors_with, FactorPair};
use crate::kernel::{estimate_kernel_width, kernelize};
use crate::linalg::{
    compact_svd, ensure_finite, orthonormalize_columns, random_row_orthonormal_with, seeded_rng, sign,
    sign_matrix, solve_smoothed, streams, DenseMatrix,
};

/// Every tunable of a GCAE run.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperparameters {
    /// Weight of the binary clustering term.
    pub lambda: f64,
    /// Exponent on the view weights; must be at least 2.
    pub k: u32,
    /// Anchor count, clamped to `N`.
    pub anchors: usize,
    /// Kernel width; `None` estimates it per view.
    pub eta: Option<f64>,
    /// Ridge term of the factor updates.
    pub theta: f64,
    /// Code length `b`.
    pub bits: usize,
    /// Factor rank `r`.
    pub rank: usize,
    pub clusters: usize,
    pub cluster: ClusterParams,
    /// F/G rounds per view.
    pub inner_iter: usize,
    pub outer_iter: usize,
    /// Sample-anchor pairs drawn when estimating the kernel width.
    pub width_pairs: usize,
    pub seed: u64,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            lambda: 1e-5,
            k: 5,
            anchors: 300,
            eta: None,
            theta: 1e-5,
            bits: 128,
            rank: 100,
            clusters: 2,
            cluster: ClusterParams::default(),
            inner_iter: 80,
            outer_iter: 30,
            width_pairs: 20_000,
            seed: 0,
        }
    }
}

impl Hyperparameters {
    /// Checks ranges that do not depend on the data.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(GcaeError::invalid(msg));
        if self.k < 2 {
            return fail(format!("k >= 2 required, got {}", self.k));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda must be finite and >= 0, got {}", self.lambda));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return fail(format!("theta must be finite and >= 0, got {}", self.theta));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return fail(format!("eta must be positive, got {eta}"));
            }
        }
        if self.bits == 0 || self.rank == 0 || self.anchors == 0 || self.clusters == 0 {
            return fail("bits, rank, anchors and clusters must be positive".to_string());
        }
        if self.inner_iter == 0 {
            return fail("inner_iter must be positive".to_string());
        }
        let c = &self.cluster;
        if !(c.mu > 0.0 && c.mu.is_finite()) || !(c.rho_start >= 0.0) || !(c.rho_max >= 0.0) {
            return fail("mu must be positive and rho nonnegative".to_string());
        }
        if c.restarts == 0 {
            return fail("cluster restarts must be positive".to_string());
        }
        Ok(())
    }

    /// Checks ranges that depend on the sample count.
    pub fn validate_for(&self, n: usize) -> Result<()> {
        self.validate()?;
        if self.rank > n {
            return Err(GcaeError::invalid(format!("rank r = {} exceeds N = {n}", self.rank)));
        }
        if self.bits > n {
            return Err(GcaeError::invalid(format!("bits b = {} exceeds N = {n}", self.bits)));
        }
        if self.clusters > n {
            return Err(GcaeError::invalid(format!("clusters c = {} exceeds N = {n}", self.clusters)));
        }
        Ok(())
    }
}

/// The optimizer variables other than the clustering model.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderState {
    /// Per-view affinity graphs, `N x N`.
    pub z: Vec<DenseMatrix>,
    /// Per-view projections, `b x N` with orthonormal rows.
    pub w: Vec<DenseMatrix>,
    /// Shared codes, `b x N` with entries in `{-1, +1}`.
    pub b: DenseMatrix,
    /// View weights on the simplex.
    pub p: Vec<f64>,
}

impl EncoderState {
    /// `||B Bᵀ / N - I||_F`; zero when the bits are balanced and uncorrelated.
    pub fn decorrelation_residual(&self) -> f64 {
        let n = self.b.ncols() as f64;
        let g = &self.b * self.b.transpose() / n;
        (g - DenseMatrix::identity(self.b.nrows(), self.b.nrows())).norm()
    }
}

/// Terms of the objective at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBreakdown {
    /// `Σ_v ||F^v G^vᵀ - Z^v||²`.
    pub graph: f64,
    /// `Σ_v (p^v)^k (||W^v Z^v - B||² + ||Z^v - W^vᵀ B||²)`.
    pub autoencoder: f64,
    /// `λ ||B - Q H||²`.
    pub cluster: f64,
}

impl LossBreakdown {
    pub fn total(&self) -> f64 {
        self.graph + self.autoencoder + self.cluster
    }
}

/// Closed-form minimizer of the per-view `Z` subproblem:
/// `Z = (a WᵀW + (1 + a) I)⁻¹ (F Gᵀ + 2 a Wᵀ B)` with `a = p_v^k`.
///
/// `W` has orthonormal rows, so `WᵀW` is a projector and the inverse splits
/// into `I / (1 + a)` plus a rank-`b` correction; this costs `O(N² b)`.
pub fn update_z(affinity: &DenseMatrix, w: &DenseMatrix, b: &DenseMatrix, p_v: f64, k: u32) -> Result<DenseMatrix> {
    check_z_shapes(affinity, w, b)?;
    let a = p_v.powi(k as i32);
    let wt = w.transpose();
    let rhs = affinity + &wt * b * (2.0 * a);
    let correction = 1.0 / (1.0 + 2.0 * a) - 1.0 / (1.0 + a);
    let z = &rhs / (1.0 + a) + &wt * (w * &rhs) * correction;
    ensure_finite(&z, "update_Z")?;
    Ok(z)
}

/// [`update_z`] through a dense Cholesky solve of the full `N x N` system.
/// Slower; does not rely on `W Wᵀ = I`.
pub fn update_z_direct(affinity: &DenseMatrix, w: &DenseMatrix, b: &DenseMatrix, p_v: f64, k: u32) -> Result<DenseMatrix> {
    check_z_shapes(affinity, w, b)?;
    let a = p_v.powi(k as i32);
    let wt = w.transpose();
    let lhs = &wt * w * a;
    let rhs = affinity + &wt * b * (2.0 * a);
    solve_smoothed(&lhs, &rhs, 1.0 + a)
}

fn check_z_shapes(affinity: &DenseMatrix, w: &DenseMatrix, b: &DenseMatrix) -> Result<()> {
    let n = affinity.nrows();
    if affinity.ncols() != n || w.ncols() != n || b.ncols() != n || w.nrows() != b.nrows() {
        return Err(GcaeError::shape(
            "update_Z",
            format!(
                "F Gᵀ {:?}, W {:?}, B {:?}",
                affinity.shape(),
                w.shape(),
                b.shape()
            ),
        ));
    }
    Ok(())
}

/// Orthogonal Procrustes step: the row-orthonormal `W` maximizing
/// `tr(W Z Bᵀ)`, i.e. `W = V Uᵀ` for `Z Bᵀ = U S Vᵀ`.
pub fn update_w(z: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let n = z.nrows();
    if z.ncols() != n || b.ncols() != n {
        return Err(GcaeError::shape("update_W", format!("Z {:?}, B {:?}", z.shape(), b.shape())));
    }
    if b.nrows() > n {
        return Err(GcaeError::invalid(format!("update_W needs b <= N, got b = {}", b.nrows())));
    }
    let svd = compact_svd(&(z * b.transpose()))?;
    let mut u = svd.u;
    let k = u.ncols();
    let gram_err = (u.transpose() * &u - DenseMatrix::identity(k, k)).abs().max();
    if gram_err > 1e-10 {
        // Complete the basis when singular values vanish.
        u = orthonormalize_columns(u);
    }
    let w = svd.v * u.transpose();
    ensure_finite(&w, "update_W")?;
    Ok(w)
}

/// `B = sgn(Σ_v 2 (p^v)^k W^v Z^v + λ Q H)`, with `sgn(0) = +1`.
pub fn update_b(
    zs: &[DenseMatrix],
    ws: &[DenseMatrix],
    p: &[f64],
    k: u32,
    lambda: f64,
    qh: &DenseMatrix,
) -> Result<DenseMatrix> {
    Ok(sign_matrix(&code_argument(zs, ws, p, k, lambda, qh)?))
}

/// The matrix whose sign is the optimal code, `Σ_v 2 (p^v)^k W^v Z^v + λ Q H`.
pub fn code_argument(
    zs: &[DenseMatrix],
    ws: &[DenseMatrix],
    p: &[f64],
    k: u32,
    lambda: f64,
    qh: &DenseMatrix,
) -> Result<DenseMatrix> {
    if zs.len() != ws.len() || zs.len() != p.len() || zs.is_empty() {
        return Err(GcaeError::shape(
            "update_B",
            format!("{} graphs, {} projections, {} weights", zs.len(), ws.len(), p.len()),
        ));
    }
    let mut acc = qh * lambda;
    for ((z, w), &pv) in zs.iter().zip(ws).zip(p) {
        if w.ncols() != z.nrows() || w.nrows() != acc.nrows() || z.ncols() != acc.ncols() {
            return Err(GcaeError::shape(
                "update_B",
                format!("W {:?}, Z {:?}, QH {:?}", w.shape(), z.shape(), qh.shape()),
            ));
        }
        acc += w * z * (2.0 * pv.powi(k as i32));
    }
    ensure_finite(&acc, "update_B")?;
    Ok(acc)
}

/// Closed-form view weights minimizing `Σ_v (p^v)^k a^v` on the simplex:
/// `p^v ∝ (a^v)^{1/(1-k)}`.
///
/// Views with zero loss share all the weight equally. Evaluated in log
/// space, so the result only depends on the ratios of the losses.
pub fn update_p(losses: &[f64], k: u32) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(GcaeError::invalid(format!("k >= 2 required, got {k}")));
    }
    if losses.is_empty() {
        return Err(GcaeError::invalid("update_p needs at least one view"));
    }
    if losses.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(GcaeError::NonFinite("update_p: view losses".to_string()));
    }
    let zeros = losses.iter().filter(|&&a| a == 0.0).count();
    if zeros > 0 {
        let share = 1.0 / zeros as f64;
        return Ok(losses.iter().map(|&a| if a == 0.0 { share } else { 0.0 }).collect());
    }
    let exponent = 1.0 / (1.0 - f64::from(k));
    let logs: Vec<f64> = losses.iter().map(|a| exponent * a.ln()).collect();
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let sum: f64 = weights.iter().sum();
    Ok(weights.into_iter().map(|w| w / sum).collect())
}

/// Per-view auto-encoder loss `||W Z - B||² + ||Z - Wᵀ B||²`.
pub fn view_loss(z: &DenseMatrix, w: &DenseMatrix, b: &DenseMatrix) -> f64 {
    (w * z - b).norm_squared() + (z - w.transpose() * b).norm_squared()
}

/// Objective value and its parts.
pub fn total_loss(
    state: &EncoderState,
    affinities: &[DenseMatrix],
    model: &BinaryClusterModel,
    lambda: f64,
    k: u32,
) -> Result<LossBreakdown> {
    let m = state.z.len();
    if affinities.len() != m || state.w.len() != m || state.p.len() != m {
        return Err(GcaeError::shape("total_loss", "per-view lists differ in length"));
    }
    if model.assignments.len() != state.b.ncols() || model.q.nrows() != state.b.nrows() {
        return Err(GcaeError::shape("total_loss", "clustering model does not match B"));
    }
    let mut out = LossBreakdown {
        graph: 0.0,
        autoencoder: 0.0,
        cluster: lambda * model.loss(&state.b),
    };
    for v in 0..m {
        if affinities[v].shape() != state.z[v].shape() {
            return Err(GcaeError::shape("total_loss", format!("view {v}: F Gᵀ and Z differ")));
        }
        out.graph += (&affinities[v] - &state.z[v]).norm_squared();
        out.autoencoder += state.p[v].powi(k as i32) * view_loss(&state.z[v], &state.w[v], &state.b);
    }
    Ok(out)
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct GcaeFit {
    pub state: EncoderState,
    pub model: BinaryClusterModel,
    /// Loss at initialization followed by one entry per outer iteration.
    pub trajectory: Vec<LossBreakdown>,
    pub factors: Vec<FactorPair>,
    /// Per-view F/G reconstruction losses.
    pub factor_losses: Vec<Vec<f64>>,
    pub anchor_indices: Vec<usize>,
    pub eta: Vec<f64>,
    pub seconds: f64,
}

impl GcaeFit {
    pub fn labels(&self) -> &[usize] {
        &self.model.assignments
    }
}

/// Kernelizes every view, learns its factors, then alternates the block
/// updates `Z → W → B → (Q, H) → p` for `outer_iter` rounds.
pub fn run_gcae(ds: &MultiViewDataset, hyper: &Hyperparameters) -> Result<GcaeFit> {
    let start = Instant::now();
    let n = ds.n_samples();
    hyper.validate_for(n)?;
    let m = ds.n_views();
    let k = hyper.k;
    let t = hyper.anchors.min(n);

    let anchors = sample_anchors(ds, t, hyper.seed)?;
    let prepared: Vec<(f64, FactorPair, Vec<f64>, DenseMatrix)> = (0..m)
        .into_par_iter()
        .map(|v| {
            let view = ds.view(v);
            let eta = match hyper.eta {
                Some(eta) => eta,
                None => estimate_kernel_width(
                    view,
                    &anchors.anchors[v],
                    &anchors.indices,
                    hyper.width_pairs,
                    hyper.seed.wrapping_add(v as u64),
                ),
            };
            let phi = kernelize(view, &anchors, v, eta)?.phi;
            let mut rng = seeded_rng(hyper.seed, streams::FACTOR_INIT + v as u64);
            let fit = learn_factors_with(&phi, &gram(&phi), hyper.rank, hyper.theta, hyper.inner_iter, &mut rng)?;
            let affinity = fit.factors.product();
            ensure_finite(&affinity, "learn_factors")?;
            Ok((eta, fit.factors, fit.losses, affinity))
        })
        .collect::<Result<_>>()?;

    let mut eta = Vec::with_capacity(m);
    let mut factors = Vec::with_capacity(m);
    let mut factor_losses = Vec::with_capacity(m);
    let mut affinities = Vec::with_capacity(m);
    for (e, f, l, a) in prepared {
        eta.push(e);
        factors.push(f);
        factor_losses.push(l);
        affinities.push(a);
    }

    let mut code_rng = seeded_rng(hyper.seed, streams::CODE_INIT);
    let b = crate::linalg::gaussian_matrix(hyper.bits, n, &mut code_rng).map(sign);
    let w = (0..m)
        .map(|v| {
            let mut rng = seeded_rng(hyper.seed, streams::PROJECTION_INIT + v as u64);
            random_row_orthonormal_with(hyper.bits, n, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut state = EncoderState {
        z: affinities.clone(),
        w,
        b,
        p: vec![1.0 / m as f64; m],
    };
    let mut model = solve_qh(&state.b, hyper.clusters, &hyper.cluster, hyper.seed)?;

    let mut trajectory = vec![total_loss(&state, &affinities, &model, hyper.lambda, k)?];
    for iter in 1..=hyper.outer_iter {
        let (b, p) = (&state.b, &state.p);
        state.z = (0..m)
            .into_par_iter()
            .map(|v| update_z(&affinities[v], &state.w[v], b, p[v], k))
            .collect::<Result<_>>()
            .map_err(|e| step_error(e, "update_Z"))?;

        state.w = state
            .z
            .par_iter()
            .map(|z| update_w(z, b))
            .collect::<Result<_>>()
            .map_err(|e| step_error(e, "update_W"))?;

        state.b = update_b(&state.z, &state.w, &state.p, k, hyper.lambda, &model.reconstruction())
            .map_err(|e| step_error(e, "update_B"))?;

        let fresh = solve_qh(&state.b, hyper.clusters, &hyper.cluster, hyper.seed.wrapping_add(iter as u64))?;
        let warm = refine_qh(&state.b, &model.q, &hyper.cluster)?;
        model = if warm.loss(&state.b) <= fresh.loss(&state.b) { warm } else { fresh };

        let losses: Vec<f64> = (0..m).map(|v| view_loss(&state.z[v], &state.w[v], &state.b)).collect();
        state.p = update_p(&losses, k).map_err(|e| step_error(e, "update_p"))?;

        let loss = total_loss(&state, &affinities, &model, hyper.lambda, k)?;
        if !loss.total().is_finite() {
            return Err(GcaeError::NonFinite(format!("objective after outer iteration {iter}")));
        }
        debug!("outer iteration {iter}: loss {:.6e}", loss.total());
        trajectory.push(loss);
    }

    Ok(GcaeFit {
        state,
        model,
        trajectory,
        factors,
        factor_losses,
        anchor_indices: anchors.indices,
        eta,
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn step_error(e: GcaeError, step: &str) -> GcaeError {
    match e {
        GcaeError::NonFinite(what) if !what.starts_with(step) => GcaeError::NonFinite(format!("{step}: {what}")),
        other => other,
    }
}
