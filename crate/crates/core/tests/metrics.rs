mod common;

use causalnet::evalsim::{auc, shd};
use causalnet_testkit::{auc_by_pairs, random_dag};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::to_mgraph;

/// Labels with both classes present and scores drawn from a few values.
fn tied_input(rng: &mut StdRng) -> (Vec<bool>, Vec<f64>) {
    let n = rng.gen_range(2..120);
    let distinct = rng.gen_range(1..6);
    let mut labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.3)).collect();
    labels[0] = true;
    labels[1] = false;
    let scores = (0..n).map(|_| rng.gen_range(0..distinct) as f64 / 7.0).collect();
    (labels, scores)
}

#[test]
fn auc_matches_pair_counting_under_heavy_ties() {
    let mut rng = StdRng::seed_from_u64(31);
    for _ in 0..200 {
        let (labels, scores) = tied_input(&mut rng);
        assert!((auc(&labels, &scores).unwrap() - auc_by_pairs(&labels, &scores)).abs() < 1e-12);
    }
}

proptest! {
    #[test]
    fn auc_ignores_monotone_transforms(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (labels, scores) = tied_input(&mut rng);
        let squashed: Vec<f64> = scores.iter().map(|s| (3.0 * s - 1.0).exp() / (1.0 + (3.0 * s - 1.0).exp())).collect();
        prop_assert_eq!(auc(&labels, &scores).unwrap(), auc(&labels, &squashed).unwrap());
    }

    #[test]
    fn flipping_labels_complements_auc(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (labels, scores) = tied_input(&mut rng);
        let flipped: Vec<bool> = labels.iter().map(|l| !l).collect();
        let sum = auc(&labels, &scores).unwrap() + auc(&flipped, &scores).unwrap();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shd_is_a_metric(seed in any::<u64>(), n in 2usize..7) {
        let mut rng = StdRng::seed_from_u64(seed);
        let dags: Vec<_> = (0..3).map(|_| random_dag(&mut rng, n, 0.5)).collect();
        let gs: Vec<_> = dags.iter().map(to_mgraph).collect();
        let d = |i: usize, j: usize| shd(&gs[i], &gs[j]).unwrap();
        prop_assert_eq!(d(0, 0), 0);
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2));
        prop_assert_eq!(d(0, 1) == 0, dags[0] == dags[1]);
        // brute force over ordered pairs
        let brute = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| {
                (dags[0].has_edge(i, j), dags[0].has_edge(j, i)) != (dags[1].has_edge(i, j), dags[1].has_edge(j, i))
            })
            .count();
        prop_assert_eq!(d(0, 1), brute);
    }
}
