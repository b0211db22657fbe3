//! Dense linear-algebra primitives used by the optimizer.
//!
//! Everything here is a thin, checked layer over `nalgebra`: ridge-smoothed
//! symmetric solves, a compact SVD with sorted singular values, and seeded
//! random matrices. All randomness in the crate is drawn from
//! [`seeded_rng`], a ChaCha8 generator keyed by `(seed, stream)`.

use nalgebra::{Cholesky, DMatrix, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{GcaeError, Result};

/// Real dense matrix. Entries are expected to be finite everywhere in the crate.
pub type DenseMatrix = DMatrix<f64>;

/// Relative threshold below which a singular value counts as zero.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// Stream identifiers for [`seeded_rng`]. Each stochastic choice gets its own
/// stream so adding draws to one stage never shifts another.
pub mod streams {
    pub const ANCHORS: u64 = 1;
    pub const KERNEL_WIDTH: u64 = 2;
    /// Offset by view index.
    pub const FACTOR_INIT: u64 = 100;
    pub const CODE_INIT: u64 = 3;
    /// Offset by view index.
    pub const PROJECTION_INIT: u64 = 200;
    pub const CLUSTER_INIT: u64 = 4;
    pub const BASELINE: u64 = 5;
    pub const SYNTH: u64 = 6;
}

/// ChaCha8 generator for `seed`, positioned on an independent `stream`.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn ensure_finite(m: &DenseMatrix, what: &str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(GcaeError::NonFinite(what.to_string()))
    }
}

/// Matrix with i.i.d. standard-normal entries, filled in row-major order.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DenseMatrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DenseMatrix::from_row_slice(rows, cols, &data)
}

/// Solves `(A + theta I) X = R` for symmetric positive semidefinite `A`.
///
/// Uses a Cholesky factorization. A pivot that collapses relative to the
/// largest one is reported as [`GcaeError::Singular`] instead of returning
/// an inaccurate solution.
pub fn solve_smoothed(a: &DenseMatrix, r: &DenseMatrix, theta: f64) -> Result<DenseMatrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(GcaeError::shape("solve_smoothed", format!("A is {}x{}", n, a.ncols())));
    }
    if r.nrows() != n {
        return Err(GcaeError::shape(
            "solve_smoothed",
            format!("A is {n}x{n} but R has {} rows", r.nrows()),
        ));
    }
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(GcaeError::invalid(format!("theta must be a finite nonnegative number, got {theta}")));
    }
    ensure_finite(a, "solve_smoothed: A")?;
    ensure_finite(r, "solve_smoothed: R")?;

    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] += theta;
    }
    let chol = Cholesky::new(shifted).ok_or(GcaeError::Singular("solve_smoothed"))?;
    let l = chol.l_dirty();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        let d = l[(i, i)] * l[(i, i)];
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if !(lo > hi * f64::EPSILON * n as f64) {
        return Err(GcaeError::Singular("solve_smoothed"));
    }
    let x = chol.solve(r);
    ensure_finite(&x, "solve_smoothed: solution")?;
    Ok(x)
}

/// Compact singular value decomposition `M = U diag(S) Vᵀ`.
#[derive(Debug, Clone)]
pub struct CompactSvd {
    /// `n x k` with orthonormal columns.
    pub u: DenseMatrix,
    /// `k` singular values, non-increasing.
    pub s: Vec<f64>,
    /// `m x k` with orthonormal columns.
    pub v: DenseMatrix,
}

impl CompactSvd {
    /// Number of singular values above `RANK_TOLERANCE * s_max`.
    pub fn rank(&self) -> usize {
        let top = self.s.first().copied().unwrap_or(0.0);
        if top <= 0.0 {
            return 0;
        }
        self.s.iter().filter(|&&s| s > RANK_TOLERANCE * top).count()
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for (j, s) in self.s.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }
}

pub fn compact_svd(m: &DenseMatrix) -> Result<CompactSvd> {
    ensure_finite(m, "compact_svd: input")?;
    let k = m.nrows().min(m.ncols());
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("U requested");
    let v_t = svd.v_t.expect("Vᵀ requested");

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let mut su = DenseMatrix::zeros(m.nrows(), k);
    let mut sv = DenseMatrix::zeros(m.ncols(), k);
    let mut s = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        sv.set_column(dst, &v_t.row(src).transpose());
        s.push(svd.singular_values[src].max(0.0));
    }
    let out = CompactSvd { u: su, s, v: sv };
    ensure_finite(&out.u, "compact_svd: U")?;
    ensure_finite(&out.v, "compact_svd: V")?;
    Ok(out)
}

/// Number of singular values of `m` above `RANK_TOLERANCE * s_max`.
pub fn numerical_rank(m: &DenseMatrix) -> Result<usize> {
    Ok(compact_svd(m)?.rank())
}

/// Seeded `rows x cols` matrix with orthonormal rows (`W Wᵀ = I`).
pub fn random_row_orthonormal(rows: usize, cols: usize, seed: u64) -> Result<DenseMatrix> {
    random_row_orthonormal_with(rows, cols, &mut seeded_rng(seed, 0))
}

pub fn random_row_orthonormal_with<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> Result<DenseMatrix> {
    if rows == 0 || cols == 0 {
        return Err(GcaeError::invalid("random_row_orthonormal: dimensions must be positive"));
    }
    if rows > cols {
        return Err(GcaeError::invalid(format!(
            "random_row_orthonormal: rows ({rows}) > cols ({cols})"
        )));
    }
    let g = gaussian_matrix(cols, rows, rng);
    Ok(orthonormalize_columns(g).transpose())
}

/// Householder QR of a tall matrix, returning Q with the sign convention
/// `diag(R) >= 0` so the result is unique.
pub(crate) fn orthonormalize_columns(m: DenseMatrix) -> DenseMatrix {
    let qr = m.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Largest absolute deviation of `W Wᵀ` from the identity.
pub fn row_orthonormality_error(w: &DenseMatrix) -> f64 {
    let g = w * w.transpose();
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// Sign with the tie rule `sgn(0) = +1`.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

pub fn sign_matrix(m: &DenseMatrix) -> DenseMatrix {
    m.map(sign)
}
