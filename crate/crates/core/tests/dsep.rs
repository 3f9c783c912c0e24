mod common;

use std::time::Instant;

use causalnet::graph::{parse_graph, GraphOptions};
use causalnet::{MGraph, NodeRole};
use causalnet_testkit::{d_separated_by_paths, random_dag};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::{ids, to_mgraph};

/// Random disjoint (x, y, z) with x and y non-empty.
fn random_query<R: Rng>(rng: &mut R, n: usize) -> (Vec<usize>, Vec<usize>, Vec<usize>) {
    loop {
        let mut x = Vec::new();
        let mut y = Vec::new();
        let mut z = Vec::new();
        for v in 0..n {
            match rng.gen_range(0..5) {
                0 => x.push(v),
                1 => y.push(v),
                2 => z.push(v),
                _ => {}
            }
        }
        if !x.is_empty() && !y.is_empty() {
            return (x, y, z);
        }
    }
}

#[test]
fn matches_path_enumeration_on_small_random_dags() {
    let mut rng = StdRng::seed_from_u64(17);
    let start = Instant::now();
    for _ in 0..1000 {
        let n = rng.gen_range(2..=6);
        let p = rng.gen_range(0.2..0.8);
        let dag = random_dag(&mut rng, n, p);
        let g = to_mgraph(&dag);
        for _ in 0..5 {
            let (x, y, z) = random_query(&mut rng, n);
            assert_eq!(
                g.d_separated_ids(&ids(&x), &ids(&y), &ids(&z)),
                d_separated_by_paths(&dag, &x, &y, &z),
                "edges {:?}, x {x:?}, y {y:?}, z {z:?}",
                dag.edges()
            );
        }
    }
    assert!(start.elapsed().as_secs() < 10);
}

#[test]
fn indicator_nodes_take_part_like_any_other() {
    let text = "[nodes]\nX observed\nY partially_observed\nR_Y indicator=Y\n[edges]\nX -> Y\nX -> R_Y\n";
    let g = parse_graph(text, GraphOptions::default()).unwrap().graph;
    assert!(!g.d_separated(&["Y"], &["R_Y"], &[] as &[&str]).unwrap());
    assert!(g.d_separated(&["Y"], &["R_Y"], &["X"]).unwrap());
}

#[test]
fn overlapping_sets_are_rejected() {
    let g = MGraph::new(
        vec![("A".into(), NodeRole::Observed), ("B".into(), NodeRole::Observed)],
        &[("A", "B")],
    )
    .unwrap();
    assert!(g.d_separated(&["A"], &["B"], &["A"]).is_err());
    assert!(g.d_separated(&["A"], &["Q"], &[] as &[&str]).is_err());
}

proptest! {
    #[test]
    fn separation_is_symmetric(seed in any::<u64>(), n in 2usize..8) {
        let mut rng = StdRng::seed_from_u64(seed);
        let g = to_mgraph(&random_dag(&mut rng, n, 0.4));
        let (x, y, z) = random_query(&mut rng, n);
        prop_assert_eq!(
            g.d_separated_ids(&ids(&x), &ids(&y), &ids(&z)),
            g.d_separated_ids(&ids(&y), &ids(&x), &ids(&z))
        );
    }

    #[test]
    fn parents_screen_off_non_descendants(seed in any::<u64>(), n in 2usize..8) {
        let mut rng = StdRng::seed_from_u64(seed);
        let dag = random_dag(&mut rng, n, 0.4);
        let g = to_mgraph(&dag);
        for v in 0..n {
            let de = dag.descendants(v);
            let others: Vec<usize> = (0..n).filter(|&u| !de[u] && !dag.parents[v].contains(&u)).collect();
            if !others.is_empty() {
                prop_assert!(g.d_separated_ids(&ids(&[v]), &ids(&others), &ids(&dag.parents[v])));
            }
        }
    }
}
