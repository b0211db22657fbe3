mod common;

use gcae::binclust::{assign_h, solve_qh, BinaryClusterModel, ClusterParams};
use gcae::encoder::{total_loss, update_b, update_p, update_w, update_z, view_loss, EncoderState};
use gcae::linalg::{gaussian_matrix, random_row_orthonormal, row_orthonormality_error, seeded_rng, DenseMatrix};
use proptest::prelude::*;

struct Problem {
    affinities: Vec<DenseMatrix>,
    state: EncoderState,
    model: BinaryClusterModel,
}

fn problem(n: usize, bits: usize, views: usize, seed: u64) -> Problem {
    let mut rng = seeded_rng(seed, 0);
    let affinities: Vec<DenseMatrix> = (0..views).map(|_| gaussian_matrix(n, n, &mut rng)).collect();
    let w = (0..views)
        .map(|v| random_row_orthonormal(bits, n, seed.wrapping_add(v as u64)).unwrap())
        .collect();
    let b = common::random_codes(bits, n, seed);
    let model = solve_qh(&b, 2.min(n), &ClusterParams::default(), seed).unwrap();
    Problem {
        state: EncoderState {
            z: affinities.clone(),
            w,
            b,
            p: vec![1.0 / views as f64; views],
        },
        affinities,
        model,
    }
}

fn loss(p: &Problem, lambda: f64, k: u32) -> f64 {
    total_loss(&p.state, &p.affinities, &p.model, lambda, k).unwrap().total()
}

fn trace(w: &DenseMatrix, z: &DenseMatrix, b: &DenseMatrix) -> f64 {
    (w * z * b.transpose()).trace()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn block_updates_never_raise_the_loss(
        n in 3usize..12, bits in 1usize..4, views in 1usize..4, lambda in 1e-6f64..1.0, k in 2u32..8, seed: u64,
    ) {
        let bits = bits.min(n);
        let mut pr = problem(n, bits, views, seed);
        let slack = |x: f64| x * (1.0 + 1e-9);
        let mut before = loss(&pr, lambda, k);

        for v in 0..views {
            pr.state.z[v] = update_z(&pr.affinities[v], &pr.state.w[v], &pr.state.b, pr.state.p[v], k).unwrap();
        }
        let after = loss(&pr, lambda, k);
        prop_assert!(after <= slack(before), "Z: {before} -> {after}");
        before = after;

        for v in 0..views {
            let old = trace(&pr.state.w[v], &pr.state.z[v], &pr.state.b);
            pr.state.w[v] = update_w(&pr.state.z[v], &pr.state.b).unwrap();
            prop_assert!(row_orthonormality_error(&pr.state.w[v]) <= 1e-8);
            let new = trace(&pr.state.w[v], &pr.state.z[v], &pr.state.b);
            prop_assert!(new >= old - 1e-9 * old.abs().max(1.0));
        }
        before = before.max(loss(&pr, lambda, k));

        pr.state.b = update_b(&pr.state.z, &pr.state.w, &pr.state.p, k, lambda, &pr.model.reconstruction()).unwrap();
        prop_assert!(pr.state.b.iter().all(|&x| x == 1.0 || x == -1.0));
        let after = loss(&pr, lambda, k);
        prop_assert!(after <= slack(before), "B: {before} -> {after}");
        before = after;

        pr.model.assignments = assign_h(&pr.state.b, &pr.model.q).unwrap();
        let after = loss(&pr, lambda, k);
        prop_assert!(after <= slack(before), "H: {before} -> {after}");
        before = after;

        let per_view: Vec<f64> = (0..views).map(|v| view_loss(&pr.state.z[v], &pr.state.w[v], &pr.state.b)).collect();
        pr.state.p = update_p(&per_view, k).unwrap();
        let after = loss(&pr, lambda, k);
        prop_assert!(after <= slack(before), "p: {before} -> {after}");
    }

    #[test]
    fn weights_live_on_the_simplex(losses in prop::collection::vec(1e-6f64..1e6, 1..6), k in 2u32..9) {
        let p = update_p(&losses, k).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn weights_ignore_loss_scale(losses in prop::collection::vec(1e-3f64..1e3, 1..6), k in 2u32..9, scale in 1e-6f64..1e6) {
        let p = update_p(&losses, k).unwrap();
        let scaled: Vec<f64> = losses.iter().map(|a| a * scale).collect();
        let q = update_p(&scaled, k).unwrap();
        for (x, y) in p.iter().zip(&q) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn weights_match_grid_search_on_two_views(a0 in 0.01f64..10.0, a1 in 0.01f64..10.0, k in 3u32..9) {
        let p = update_p(&[a0, a1], k).unwrap();
        let grid = common::simplex_grid_weights(&[a0, a1], k, 10_000);
        prop_assert!((p[0] - grid[0]).abs() <= 1e-4);
    }
}

#[test]
fn z_update_is_stationary_under_finite_differences() {
    for seed in 0..10 {
        let pr = problem(6, 3, 1, seed);
        let (w, b, fg) = (&pr.state.w[0], &pr.state.b, &pr.affinities[0]);
        let pv: f64 = 0.7;
        let a = pv.powi(5);
        let z = update_z(fg, w, b, pv, 5).unwrap();
        let objective = |z: &DenseMatrix| (fg - z).norm_squared() + a * view_loss(z, w, b);
        let grad = common::numeric_gradient(&z, 1e-5, objective);
        assert!(grad.amax() <= 1e-5, "seed {seed}: {}", grad.amax());
    }
}
