//! Low-rank affinity graphs through the factorization `Z = F Gᵀ`.
//!
//! Instead of a nuclear-norm penalty on `Z`, each view learns two `N x r`
//! factors by alternating closed-form ridge updates on
//! `||phi - F Gᵀ phi||²_F`. `K = phi phiᵀ` is `N x N` and is the largest
//! object held per view.

use rand::Rng;

use crate::error::{GcaeError, Result};
use crate::linalg::{ensure_finite, gaussian_matrix, seeded_rng, solve_smoothed, streams, DenseMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub f: DenseMatrix,
    pub g: DenseMatrix,
}

impl FactorPair {
    pub fn rank_bound(&self) -> usize {
        self.f.ncols()
    }

    /// The affinity graph `F Gᵀ`.
    pub fn product(&self) -> DenseMatrix {
        &self.f * self.g.transpose()
    }
}

#[derive(Debug, Clone)]
pub struct FactorFit {
    pub factors: FactorPair,
    /// Reconstruction loss after each F/G round.
    pub losses: Vec<f64>,
}

pub fn gram(phi: &DenseMatrix) -> DenseMatrix {
    phi * phi.transpose()
}

/// `F = K G (Gᵀ K G + theta I)⁻¹`.
pub fn update_f(k: &DenseMatrix, g: &DenseMatrix, theta: f64) -> Result<DenseMatrix> {
    if k.nrows() != g.nrows() {
        return Err(GcaeError::shape(
            "update_F",
            format!("K is {}x{}, G has {} rows", k.nrows(), k.ncols(), g.nrows()),
        ));
    }
    let kg = k * g;
    let inner = g.transpose() * &kg;
    Ok(solve_smoothed(&inner, &kg.transpose(), theta)?.transpose())
}

/// `G = F (Fᵀ F + theta I)⁻¹`.
pub fn update_g(f: &DenseMatrix, theta: f64) -> Result<DenseMatrix> {
    let inner = f.transpose() * f;
    Ok(solve_smoothed(&inner, &f.transpose(), theta)?.transpose())
}

/// `||phi - F Gᵀ phi||²_F`.
pub fn graph_residual(phi: &DenseMatrix, fp: &FactorPair) -> Result<f64> {
    let n = phi.nrows();
    if fp.f.nrows() != n || fp.g.nrows() != n || fp.f.ncols() != fp.g.ncols() {
        return Err(GcaeError::shape(
            "graph_residual",
            format!(
                "phi has {n} rows, F is {:?}, G is {:?}",
                fp.f.shape(),
                fp.g.shape()
            ),
        ));
    }
    let recon = &fp.f * (fp.g.transpose() * phi);
    Ok((phi - recon).norm_squared())
}

/// Alternates [`update_f`] and [`update_g`] from a seeded random `G` for at
/// most `max_iter` rounds, stopping early once the relative loss change
/// drops below `1e-6` or the loss rises.
pub fn learn_factors(phi: &DenseMatrix, r: usize, theta: f64, max_iter: usize, seed: u64) -> Result<FactorFit> {
    learn_factors_with(phi, &gram(phi), r, theta, max_iter, &mut seeded_rng(seed, streams::FACTOR_INIT))
}

pub(crate) fn learn_factors_with<R: Rng + ?Sized>(
    phi: &DenseMatrix,
    k: &DenseMatrix,
    r: usize,
    theta: f64,
    max_iter: usize,
    rng: &mut R,
) -> Result<FactorFit> {
    let n = phi.nrows();
    if r == 0 || r > n {
        return Err(GcaeError::invalid(format!("factor rank {r} outside [1, {n}]")));
    }
    if max_iter == 0 {
        return Err(GcaeError::invalid("learn_factors needs at least one iteration"));
    }
    ensure_finite(phi, "learn_factors: phi")?;

    let mut g = gaussian_matrix(n, r, rng);
    for mut col in g.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= norm;
        }
    }

    let scale = phi.norm_squared();
    let mut losses: Vec<f64> = Vec::with_capacity(max_iter);
    let mut fp = FactorPair {
        f: DenseMatrix::zeros(n, r),
        g,
    };
    for _ in 0..max_iter {
        let f = update_f(k, &fp.g, theta)?;
        let g = update_g(&f, theta)?;
        let next = FactorPair { f, g };
        let loss = graph_residual(phi, &next)?;
        if !loss.is_finite() {
            return Err(GcaeError::NonFinite("learn_factors: loss".to_string()));
        }
        // The smoothed G step is not a descent step on the residual itself;
        // a rise means the smoothing floor is reached, so keep the last pair.
        if losses.last().is_some_and(|&prev| loss > prev) {
            break;
        }
        fp = next;
        let done = match losses.last() {
            Some(&prev) => (prev - loss).abs() < 1e-6 * prev.max(f64::MIN_POSITIVE),
            None => false,
        } || loss <= 1e-15 * scale;
        losses.push(loss);
        if done {
            break;
        }
    }
    Ok(FactorFit { factors: fp, losses })
}
