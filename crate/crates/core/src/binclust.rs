//! Binary matrix-factorization clustering in Hamming space.
//!
//! Minimizes `||B - Q H||²_F + rho ||Qᵀ 1||²` over `±1` centroids `Q` and a
//! one-hot indicator `H`. `Q` moves by discrete proximal linearized steps
//! (sign of a gradient step); `H` assigns every code to its nearest centroid
//! in Hamming distance. Codes are bit-packed for the distance scans.

use rand::Rng;

use crate::error::{GcaeError, Result};
use crate::linalg::{seeded_rng, sign, streams, DenseMatrix};

/// `±1` codes packed one column per `words` consecutive `u64`s; a set bit
/// means `+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PackedCodes {
    bits: usize,
    words: usize,
    data: Vec<u64>,
}

impl PackedCodes {
    /// Packs the columns of `m` by sign (`sgn(0) = +1`).
    pub fn from_columns(m: &DenseMatrix) -> Self {
        let bits = m.nrows();
        let words = bits.div_ceil(64).max(1);
        let mut data = vec![0u64; words * m.ncols()];
        for (j, col) in m.column_iter().enumerate() {
            let dst = &mut data[j * words..(j + 1) * words];
            for (i, &x) in col.iter().enumerate() {
                if sign(x) > 0.0 {
                    dst[i / 64] |= 1 << (i % 64);
                }
            }
        }
        Self { bits, words, data }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.words
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    fn code(&self, j: usize) -> &[u64] {
        &self.data[j * self.words..(j + 1) * self.words]
    }

    /// Hamming distance between column `i` of `self` and column `j` of `other`.
    pub fn distance(&self, i: usize, other: &PackedCodes, j: usize) -> u32 {
        self.code(i)
            .iter()
            .zip(other.code(j))
            .map(|(a, b)| (a ^ b).count_ones())
            .sum()
    }
}

/// Number of positions where two `±1` vectors disagree (`(b - xᵀy) / 2`).
pub fn hamming_distance(x: &[f64], y: &[f64]) -> Result<usize> {
    if x.len() != y.len() {
        return Err(GcaeError::shape(
            "hamming_distance",
            format!("lengths {} and {}", x.len(), y.len()),
        ));
    }
    Ok(x.iter().zip(y).filter(|(a, b)| sign(**a) != sign(**b)).count())
}

/// Centroids `Q` (`b x c`, `±1`) and the cluster of every sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryClusterModel {
    pub q: DenseMatrix,
    /// Column `i` of `H` is `e_{assignments[i]}`.
    pub assignments: Vec<usize>,
}

impl BinaryClusterModel {
    pub fn n_clusters(&self) -> usize {
        self.q.ncols()
    }

    /// The one-hot indicator `H` (`c x N`).
    pub fn indicator(&self) -> DenseMatrix {
        indicator_matrix(&self.assignments, self.n_clusters())
    }

    /// `Q H`, the code matrix reconstructed from centroids.
    pub fn reconstruction(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.q.nrows(), self.assignments.len());
        for (i, &s) in self.assignments.iter().enumerate() {
            out.set_column(i, &self.q.column(s));
        }
        out
    }

    /// `||B - Q H||²_F`.
    pub fn loss(&self, b: &DenseMatrix) -> f64 {
        (b - self.reconstruction()).norm_squared()
    }

    /// `||Qᵀ 1||`, zero for perfectly balanced centroids.
    pub fn balance_residual(&self) -> f64 {
        self.q.row_sum().norm()
    }
}

pub fn indicator_matrix(assignments: &[usize], c: usize) -> DenseMatrix {
    let mut h = DenseMatrix::zeros(c, assignments.len());
    for (i, &s) in assignments.iter().enumerate() {
        h[(s, i)] = 1.0;
    }
    h
}

/// Nearest centroid in Hamming distance for every column of `b`; ties go
/// to the smallest centroid index.
pub fn assign_h(b: &DenseMatrix, q: &DenseMatrix) -> Result<Vec<usize>> {
    check_rows("assign_H", b, q)?;
    if q.ncols() == 0 {
        return Err(GcaeError::invalid("assign_H needs at least one centroid"));
    }
    Ok(assign_packed(&PackedCodes::from_columns(b), &PackedCodes::from_columns(q)))
}

fn assign_packed(codes: &PackedCodes, centroids: &PackedCodes) -> Vec<usize> {
    (0..codes.len())
        .map(|i| {
            let mut best = (u32::MAX, 0);
            for s in 0..centroids.len() {
                let d = codes.distance(i, centroids, s);
                if d < best.0 {
                    best = (d, s);
                }
            }
            best.1
        })
        .collect()
}

/// One discrete proximal linearized step on `Q`:
/// `sgn(Q - (1/mu) ∇)` with `∇ = -2 B Hᵀ + 2 rho 1 1ᵀ Q`.
pub fn dplm_update_q(
    q_prev: &DenseMatrix,
    b: &DenseMatrix,
    assignments: &[usize],
    rho: f64,
    mu: f64,
) -> Result<DenseMatrix> {
    check_rows("dplm_update_Q", b, q_prev)?;
    if assignments.len() != b.ncols() {
        return Err(GcaeError::shape(
            "dplm_update_Q",
            format!("{} assignments for {} codes", assignments.len(), b.ncols()),
        ));
    }
    if !(mu > 0.0) || !(rho >= 0.0) {
        return Err(GcaeError::invalid("DPLM needs mu > 0 and rho >= 0"));
    }
    let c = q_prev.ncols();
    let mut bht = DenseMatrix::zeros(b.nrows(), c);
    for (i, &s) in assignments.iter().enumerate() {
        if s >= c {
            return Err(GcaeError::invalid(format!("assignment {s} >= cluster count {c}")));
        }
        let mut col = bht.column_mut(s);
        col += b.column(i);
    }
    let col_sums = q_prev.row_sum();
    Ok(DenseMatrix::from_fn(q_prev.nrows(), c, |i, s| {
        let grad = -2.0 * bht[(i, s)] + 2.0 * rho * col_sums[s];
        sign(q_prev[(i, s)] - grad / mu)
    }))
}

/// Settings for [`solve_qh`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterParams {
    /// Balance penalty at the first inner round; doubled every round.
    pub rho_start: f64,
    pub rho_max: f64,
    pub mu: f64,
    pub max_inner: usize,
    /// Independent seedings; the best final loss wins.
    pub restarts: usize,
}

impl Default for ClusterParams {
    fn default() -> Self {
        Self {
            rho_start: 0.01,
            rho_max: 1e3,
            mu: 1.0,
            max_inner: 30,
            restarts: 16,
        }
    }
}

impl ClusterParams {
    pub fn rho_at(&self, round: usize) -> f64 {
        (self.rho_start * 2f64.powi(round.min(1023) as i32)).min(self.rho_max)
    }
}

/// Clusters the columns of `b` into `c` binary centroids.
pub fn solve_qh(b: &DenseMatrix, c: usize, params: &ClusterParams, seed: u64) -> Result<BinaryClusterModel> {
    let n = b.ncols();
    if c == 0 || c > n {
        return Err(GcaeError::invalid(format!("cluster count {c} outside [1, {n}]")));
    }
    if params.restarts == 0 {
        return Err(GcaeError::invalid("solve_QH needs at least one restart"));
    }
    let codes = PackedCodes::from_columns(b);
    let mut rng = seeded_rng(seed, streams::CLUSTER_INIT);
    let mut best: Option<(f64, BinaryClusterModel)> = None;
    for _ in 0..params.restarts {
        let q0 = seed_centroids(b, &codes, c, &mut rng);
        let (loss, model) = alternate(b, &codes, q0, params)?;
        if best.as_ref().is_none_or(|(l, _)| loss < *l) {
            best = Some((loss, model));
        }
    }
    Ok(best.expect("at least one restart").1)
}

/// Continues the alternation from existing centroids.
pub fn refine_qh(b: &DenseMatrix, q: &DenseMatrix, params: &ClusterParams) -> Result<BinaryClusterModel> {
    check_rows("refine_QH", b, q)?;
    if q.ncols() == 0 || q.ncols() > b.ncols() {
        return Err(GcaeError::invalid("centroid count outside [1, N]"));
    }
    let codes = PackedCodes::from_columns(b);
    Ok(alternate(b, &codes, q.map(sign), params)?.1)
}

/// Hamming k-means++ seeding: distinct columns, each new one drawn with
/// probability proportional to its squared distance to the chosen set.
fn seed_centroids<R: Rng + ?Sized>(b: &DenseMatrix, codes: &PackedCodes, c: usize, rng: &mut R) -> DenseMatrix {
    let n = codes.len();
    let mut chosen = Vec::with_capacity(c);
    let mut taken = vec![false; n];
    let first = rng.random_range(0..n);
    chosen.push(first);
    taken[first] = true;
    let mut nearest: Vec<u32> = (0..n).map(|i| codes.distance(i, codes, first)).collect();
    while chosen.len() < c {
        let total: f64 = (0..n).filter(|&i| !taken[i]).map(|i| f64::from(nearest[i]).powi(2)).sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for i in (0..n).filter(|&i| !taken[i]) {
                let w = f64::from(nearest[i]).powi(2);
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            let free: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(pick);
        taken[pick] = true;
        for i in 0..n {
            nearest[i] = nearest[i].min(codes.distance(i, codes, pick));
        }
    }
    DenseMatrix::from_fn(b.nrows(), c, |i, s| sign(b[(i, chosen[s])]))
}

fn alternate(
    b: &DenseMatrix,
    codes: &PackedCodes,
    mut q: DenseMatrix,
    params: &ClusterParams,
) -> Result<(f64, BinaryClusterModel)> {
    let mut assignments = assign_with_repair(codes, &mut q);
    let mut best_loss = packed_loss(codes, &q, &assignments);
    let mut best = BinaryClusterModel {
        q: q.clone(),
        assignments: assignments.clone(),
    };
    for round in 0..params.max_inner {
        q = dplm_update_q(&q, b, &assignments, params.rho_at(round), params.mu)?;
        let next = assign_with_repair(codes, &mut q);
        let loss = packed_loss(codes, &q, &next);
        if loss < best_loss {
            best_loss = loss;
            best = BinaryClusterModel {
                q: q.clone(),
                assignments: next.clone(),
            };
        }
        let stable = next == assignments;
        assignments = next;
        if stable {
            break;
        }
    }
    polish(b, codes, best_loss, best)
}

/// Balance-free Lloyd steps (`rho = 0`, majority-vote centroids) from the
/// best visited state; each step is non-increasing in `||B - Q H||²`.
fn polish(
    b: &DenseMatrix,
    codes: &PackedCodes,
    mut best_loss: f64,
    mut best: BinaryClusterModel,
) -> Result<(f64, BinaryClusterModel)> {
    loop {
        let mut q = dplm_update_q(&best.q, b, &best.assignments, 0.0, 1.0)?;
        let assignments = assign_with_repair(codes, &mut q);
        let loss = packed_loss(codes, &q, &assignments);
        if loss >= best_loss {
            return Ok((best_loss, best));
        }
        best_loss = loss;
        best = BinaryClusterModel { q, assignments };
    }
}

/// Assigns codes, re-seeding any empty centroid with the code farthest from
/// its own centroid (smallest index on ties).
fn assign_with_repair(codes: &PackedCodes, q: &mut DenseMatrix) -> Vec<usize> {
    let c = q.ncols();
    let mut assignments = assign_packed(codes, &PackedCodes::from_columns(q));
    for _ in 0..c {
        let mut counts = vec![0usize; c];
        for &s in &assignments {
            counts[s] += 1;
        }
        let Some(empty) = counts.iter().position(|&k| k == 0) else {
            break;
        };
        let centroids = PackedCodes::from_columns(q);
        let mut far = (0u32, None);
        for (i, &s) in assignments.iter().enumerate() {
            let d = codes.distance(i, &centroids, s);
            if d > far.0 && counts[s] > 1 {
                far = (d, Some(i));
            }
        }
        let Some(i) = far.1 else {
            // Fewer distinct codes than clusters.
            break;
        };
        for bit in 0..q.nrows() {
            let set = codes.code(i)[bit / 64] >> (bit % 64) & 1 == 1;
            q[(bit, empty)] = if set { 1.0 } else { -1.0 };
        }
        assignments = assign_packed(codes, &PackedCodes::from_columns(q));
    }
    assignments
}

fn packed_loss(codes: &PackedCodes, q: &DenseMatrix, assignments: &[usize]) -> f64 {
    let centroids = PackedCodes::from_columns(q);
    let total: u64 = assignments
        .iter()
        .enumerate()
        .map(|(i, &s)| u64::from(codes.distance(i, &centroids, s)))
        .sum();
    4.0 * total as f64
}

fn check_rows(op: &'static str, b: &DenseMatrix, q: &DenseMatrix) -> Result<()> {
    if b.nrows() != q.nrows() {
        return Err(GcaeError::shape(
            op,
            format!("codes have {} bits, centroids have {}", b.nrows(), q.nrows()),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::gaussian_matrix;

    fn random_codes(bits: usize, n: usize, seed: u64) -> DenseMatrix {
        gaussian_matrix(bits, n, &mut seeded_rng(seed, 31)).map(sign)
    }

    #[test]
    fn hamming_examples() {
        let x = [1.0, 1.0, -1.0];
        assert_eq!(hamming_distance(&x, &x).unwrap(), 0);
        assert_eq!(hamming_distance(&x, &[-1.0, -1.0, 1.0]).unwrap(), 3);
        assert_eq!(hamming_distance(&x, &[1.0, -1.0, -1.0]).unwrap(), 1);
        assert!(hamming_distance(&x, &[1.0]).is_err());
    }

    #[test]
    fn packed_distance_matches_inner_product() {
        let b = random_codes(130, 12, 1);
        let packed = PackedCodes::from_columns(&b);
        for i in 0..12 {
            for j in 0..12 {
                let ip = b.column(i).dot(&b.column(j));
                let d = packed.distance(i, &packed, j) as f64;
                assert_eq!(d, (130.0 - ip) / 2.0);
            }
        }
    }

    #[test]
    fn assign_exact_match_and_single_cluster() {
        let q = random_codes(8, 3, 2);
        let mut b = random_codes(8, 5, 3);
        b.set_column(2, &q.column(0));
        assert_eq!(assign_h(&b, &q).unwrap()[2], 0);

        let one = random_codes(8, 1, 4);
        assert!(assign_h(&b, &one).unwrap().iter().all(|&s| s == 0));
    }

    #[test]
    fn assign_matches_scalar_scan() {
        let b = random_codes(8, 20, 5);
        let q = random_codes(8, 3, 6);
        let h = assign_h(&b, &q).unwrap();
        for i in 0..20 {
            let mut best = (usize::MAX, 0);
            for s in 0..3 {
                let mut d = 0;
                for bit in 0..8 {
                    if b[(bit, i)] != q[(bit, s)] {
                        d += 1;
                    }
                }
                if d < best.0 {
                    best = (d, s);
                }
            }
            assert_eq!(h[i], best.1);
        }
    }

    #[test]
    fn dplm_fixed_point_and_dominance() {
        let q = DenseMatrix::from_element(3, 2, 1.0);
        let b = DenseMatrix::from_element(3, 4, 1.0);
        let assignments = [0, 1, 0, 1];
        let next = dplm_update_q(&q, &b, &assignments, 0.0, 1.0).unwrap();
        assert_eq!(next, q);

        // B Hᵀ entries have magnitude 2 > mu/2, so its sign wins.
        let b = random_codes(6, 2, 7);
        let b = DenseMatrix::from_fn(6, 4, |i, j| b[(i, j % 2)]);
        let q = random_codes(6, 2, 8);
        let next = dplm_update_q(&q, &b, &assignments, 0.0, 1.0).unwrap();
        assert_eq!(next, DenseMatrix::from_fn(6, 2, |i, s| b[(i, s)]));
    }

    #[test]
    fn loss_is_four_times_hamming() {
        let b = random_codes(16, 30, 9);
        let model = solve_qh(&b, 4, &ClusterParams::default(), 1).unwrap();
        let mut total = 0;
        for (i, &s) in model.assignments.iter().enumerate() {
            total += hamming_distance(b.column(i).as_slice(), model.q.column(s).as_slice()).unwrap();
        }
        assert_eq!(model.loss(&b), 4.0 * total as f64);
        let h = model.indicator();
        assert_eq!((&b - &model.q * &h).norm_squared(), model.loss(&b));
        for col in h.column_iter() {
            assert_eq!(col.sum(), 1.0);
        }
    }

    #[test]
    fn separable_groups_are_recovered() {
        let centers = random_codes(12, 3, 10);
        let groups: Vec<usize> = (0..15).map(|i| i % 3).collect();
        let b = DenseMatrix::from_fn(12, 15, |i, j| centers[(i, groups[j])]);
        let model = solve_qh(&b, 3, &ClusterParams::default(), 2).unwrap();
        assert_eq!(model.loss(&b), 0.0);
        for i in 0..15 {
            for j in 0..15 {
                assert_eq!(groups[i] == groups[j], model.assignments[i] == model.assignments[j]);
            }
        }
    }

    #[test]
    fn one_cluster_per_column() {
        let b = random_codes(10, 7, 11);
        let model = solve_qh(&b, 7, &ClusterParams::default(), 3).unwrap();
        assert_eq!(model.loss(&b), 0.0);
    }

    #[test]
    fn rejects_bad_cluster_counts() {
        let b = random_codes(4, 3, 12);
        assert!(solve_qh(&b, 0, &ClusterParams::default(), 0).is_err());
        assert!(solve_qh(&b, 4, &ClusterParams::default(), 0).is_err());
    }

    #[test]
    fn seeded_solutions_repeat() {
        let b = random_codes(32, 60, 13);
        let a = solve_qh(&b, 5, &ClusterParams::default(), 4).unwrap();
        let c = solve_qh(&b, 5, &ClusterParams::default(), 4).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn refine_never_worsens() {
        let b = random_codes(16, 40, 14);
        let q = random_codes(16, 3, 15);
        let h = assign_h(&b, &q).unwrap();
        let start = BinaryClusterModel { q: q.clone(), assignments: h }.loss(&b);
        let refined = refine_qh(&b, &q, &ClusterParams::default()).unwrap();
        assert!(refined.loss(&b) <= start);
    }
}
