mod common;

use gcae::linalg::seeded_rng;
use gcae::metrics::{evaluate, fscore_precision_ari, pair_counts, LabelPair};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn labels() -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1usize..60, 1usize..6, 1usize..6).prop_flat_map(|(n, c1, c2)| {
        (prop::collection::vec(0..c1, n), prop::collection::vec(0..c2, n))
    })
}

fn relabel(xs: &[usize], seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..=*xs.iter().max().unwrap()).collect();
    perm.shuffle(&mut seeded_rng(seed, 0));
    xs.iter().map(|&x| perm[x] + 3).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn scores_ignore_cluster_ids((t, p) in labels(), seed: u64) {
        let base = evaluate(&t, &p).unwrap();
        let moved = evaluate(&relabel(&t, seed), &relabel(&p, seed ^ 1)).unwrap();
        for ((name, a), (_, b)) in base.entries().iter().zip(moved.entries()) {
            prop_assert!((a - b).abs() <= 1e-12, "{name}: {a} vs {b}");
        }
    }

    #[test]
    fn scores_stay_in_range((t, p) in labels()) {
        let s = evaluate(&t, &p).unwrap();
        for (name, v) in s.entries() {
            let lo = if name == "ARI" { -1.0 } else { 0.0 };
            prop_assert!((lo..=1.0 + 1e-12).contains(&v), "{name} = {v}");
        }
    }

    #[test]
    fn ari_is_symmetric((t, p) in labels()) {
        let a = evaluate(&t, &p).unwrap().ari;
        let b = evaluate(&p, &t).unwrap().ari;
        prop_assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn pair_counts_match_enumeration((t, p) in labels()) {
        let pc = pair_counts(&LabelPair::new(&t, &p).unwrap());
        prop_assert_eq!((pc.tp, pc.fp, pc.fn_, pc.tn), common::enumerate_pairs(&t, &p));
    }
}

#[test]
fn accuracy_matches_permutation_search() {
    let mut rng = seeded_rng(17, 0);
    for _ in 0..100 {
        let n = rng.random_range(1..40);
        let (c1, c2) = (rng.random_range(1..=5), rng.random_range(1..=5));
        let t: Vec<usize> = (0..n).map(|_| rng.random_range(0..c1)).collect();
        let p: Vec<usize> = (0..n).map(|_| rng.random_range(0..c2)).collect();
        let got = evaluate(&t, &p).unwrap().acc;
        let (tc, pc) = (relabel_contiguous(&t), relabel_contiguous(&p));
        assert_eq!(got, common::brute_force_accuracy(&tc, &pc));
    }
}

#[test]
fn ari_pair_form_matches_contingency_form() {
    let mut rng = seeded_rng(23, 0);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.random_range(2..80);
        let t: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let p: Vec<usize> = (0..n).map(|_| rng.random_range(0..4)).collect();
        let (tc, pc) = (relabel_contiguous(&t), relabel_contiguous(&p));
        let oracle = common::contingency_ari(&tc, &pc);
        if !oracle.is_finite() {
            continue;
        }
        let got = fscore_precision_ari(&LabelPair::new(&t, &p).unwrap()).ari;
        assert!((got - oracle).abs() <= 1e-12, "{got} vs {oracle}");
        checked += 1;
    }
}

#[test]
fn ari_of_independent_labelings_is_near_zero() {
    let mut rng = seeded_rng(29, 0);
    let trials = 200;
    let mean: f64 = (0..trials)
        .map(|_| {
            let t: Vec<usize> = (0..300).map(|_| rng.random_range(0..4)).collect();
            let p: Vec<usize> = (0..300).map(|_| rng.random_range(0..4)).collect();
            evaluate(&t, &p).unwrap().ari
        })
        .sum::<f64>()
        / trials as f64;
    assert!(mean.abs() < 0.005, "mean ARI {mean}");
}

#[test]
fn precision_is_not_symmetric() {
    let t = [0, 0, 1, 1];
    let p = [0, 0, 0, 0];
    let a = evaluate(&t, &p).unwrap().precision;
    let b = evaluate(&p, &t).unwrap().precision;
    assert_eq!((a, b), (2.0 / 6.0, 1.0));
}

fn relabel_contiguous(xs: &[usize]) -> Vec<usize> {
    let mut seen = Vec::new();
    xs.iter()
        .map(|x| match seen.iter().position(|s| s == x) {
            Some(i) => i,
            None => {
                seen.push(*x);
                seen.len() - 1
            }
        })
        .collect()
}
