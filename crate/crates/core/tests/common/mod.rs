//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use gcae::linalg::{seeded_rng, DenseMatrix};
use itertools::Itertools;
use rand::Rng;

/// Lloyd's k-means with k-means++ seeding, best of `restarts` by inertia.
pub fn kmeans(x: &DenseMatrix, k: usize, restarts: usize, seed: u64) -> Vec<usize> {
    let n = x.nrows();
    let rows: Vec<Vec<f64>> = (0..n).map(|i| x.row(i).iter().copied().collect()).collect();
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>();
    let mut rng = seeded_rng(seed, 999);
    let mut best: Option<(f64, Vec<usize>)> = None;
    for _ in 0..restarts {
        let mut centers = vec![rows[rng.random_range(0..n)].clone()];
        while centers.len() < k {
            let d: Vec<f64> = rows
                .iter()
                .map(|r| centers.iter().map(|c| dist(r, c)).fold(f64::INFINITY, f64::min))
                .collect();
            let total: f64 = d.iter().sum();
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, w) in d.iter().enumerate() {
                if target < *w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            centers.push(rows[pick].clone());
        }
        let mut labels = vec![0; n];
        for _ in 0..100 {
            let next: Vec<usize> = rows
                .iter()
                .map(|r| {
                    (0..k)
                        .min_by(|&a, &b| dist(r, &centers[a]).total_cmp(&dist(r, &centers[b])))
                        .unwrap()
                })
                .collect();
            let changed = next != labels;
            labels = next;
            for (c, center) in centers.iter_mut().enumerate() {
                let members: Vec<&Vec<f64>> = rows.iter().zip(&labels).filter(|(_, &l)| l == c).map(|(r, _)| r).collect();
                if members.is_empty() {
                    continue;
                }
                for (j, v) in center.iter_mut().enumerate() {
                    *v = members.iter().map(|m| m[j]).sum::<f64>() / members.len() as f64;
                }
            }
            if !changed {
                break;
            }
        }
        let inertia: f64 = rows.iter().zip(&labels).map(|(r, &l)| dist(r, &centers[l])).sum();
        if best.as_ref().is_none_or(|(b, _)| inertia < *b) {
            best = Some((inertia, labels));
        }
    }
    best.unwrap().1
}

/// Accuracy by trying every injective relabeling of the predicted clusters.
pub fn brute_force_accuracy(truth: &[usize], pred: &[usize]) -> f64 {
    let classes = truth.iter().max().unwrap() + 1;
    let clusters = pred.iter().max().unwrap() + 1;
    let size = classes.max(clusters);
    let mut best = 0;
    for perm in (0..size).permutations(size) {
        let hits = truth.iter().zip(pred).filter(|(&t, &p)| perm[p] == t).count();
        best = best.max(hits);
    }
    best as f64 / truth.len() as f64
}

/// ARI from the contingency table: (index - expected) / (max - expected).
pub fn contingency_ari(truth: &[usize], pred: &[usize]) -> f64 {
    let classes = truth.iter().max().unwrap() + 1;
    let clusters = pred.iter().max().unwrap() + 1;
    let mut table = vec![vec![0f64; clusters]; classes];
    for (&t, &p) in truth.iter().zip(pred) {
        table[t][p] += 1.0;
    }
    let comb = |x: f64| x * (x - 1.0) / 2.0;
    let n = truth.len() as f64;
    let index: f64 = table.iter().flatten().map(|&x| comb(x)).sum();
    let a: f64 = table.iter().map(|r| comb(r.iter().sum())).sum();
    let b: f64 = (0..clusters).map(|j| comb(table.iter().map(|r| r[j]).sum())).sum();
    let expected = a * b / comb(n);
    let max = (a + b) / 2.0;
    (index - expected) / (max - expected)
}

/// Pair counts by enumerating every unordered pair.
pub fn enumerate_pairs(truth: &[usize], pred: &[usize]) -> (u64, u64, u64, u64) {
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for i in 0..truth.len() {
        for j in i + 1..truth.len() {
            match (truth[i] == truth[j], pred[i] == pred[j]) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
    }
    (tp, fp, fn_, tn)
}

/// Random `±1` matrix.
pub fn random_codes(bits: usize, n: usize, seed: u64) -> DenseMatrix {
    let mut rng = seeded_rng(seed, 4242);
    DenseMatrix::from_fn(bits, n, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 })
}

/// Minimum of `||B - Q H||²` over all `±1` centroid matrices, each code
/// going to its nearest centroid.
pub fn exhaustive_binary_clustering(b: &DenseMatrix, c: usize) -> f64 {
    let bits = b.nrows();
    let cells = bits * c;
    assert!(cells <= 20);
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << cells) {
        let q = DenseMatrix::from_fn(bits, c, |i, s| if mask >> (s * bits + i) & 1 == 1 { 1.0 } else { -1.0 });
        let mut loss = 0.0;
        for col in b.column_iter() {
            let nearest = (0..c)
                .map(|s| (col - q.column(s)).norm_squared())
                .fold(f64::INFINITY, f64::min);
            loss += nearest;
        }
        best = best.min(loss);
    }
    best
}

/// Minimizer of `Σ_v p_v^k a_v` on a simplex grid with `steps` cells per
/// coordinate (M = 2 or 3).
pub fn simplex_grid_weights(a: &[f64], k: u32, steps: usize) -> Vec<f64> {
    let f = |p: &[f64]| p.iter().zip(a).map(|(p, a)| p.powi(k as i32) * a).sum::<f64>();
    let mut best = (f64::INFINITY, vec![]);
    match a.len() {
        2 => {
            for i in 0..=steps {
                let p = [i as f64 / steps as f64, 1.0 - i as f64 / steps as f64];
                let v = f(&p);
                if v < best.0 {
                    best = (v, p.to_vec());
                }
            }
        }
        3 => {
            for i in 0..=steps {
                for j in 0..=steps - i {
                    let p = [i as f64 / steps as f64, j as f64 / steps as f64, (steps - i - j) as f64 / steps as f64];
                    let v = f(&p);
                    if v < best.0 {
                        best = (v, p.to_vec());
                    }
                }
            }
        }
        _ => panic!("grid search supports two or three views"),
    }
    best.1
}

/// Central finite-difference gradient of `f` at `x`.
pub fn numeric_gradient(x: &DenseMatrix, h: f64, f: impl Fn(&DenseMatrix) -> f64) -> DenseMatrix {
    let mut g = DenseMatrix::zeros(x.nrows(), x.ncols());
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            let mut plus = x.clone();
            plus[(i, j)] += h;
            let mut minus = x.clone();
            minus[(i, j)] -= h;
            g[(i, j)] = (f(&plus) - f(&minus)) / (2.0 * h);
        }
    }
    g
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}
