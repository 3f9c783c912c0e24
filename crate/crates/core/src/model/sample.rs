use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::graph::NodeId;
use crate::Real;

use super::CausalNetwork;

/// `n` rows drawn by ancestral sampling; deterministic for a given seed.
pub fn sample<T: Real>(c: &CausalNetwork<T>, n: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_rows(c, n, &[], &mut rng)
}

/// Ancestral sampling with some nodes clamped to fixed levels (their CPTs are
/// ignored, their descendants see the clamped value).
pub fn sample_rows<T: Real, R: Rng + ?Sized>(
    c: &CausalNetwork<T>,
    n: usize,
    clamp: &[(NodeId, usize)],
    rng: &mut R,
) -> Dataset {
    let g = c.graph();
    let order = g.topological_order();
    let mut fixed: Vec<Option<usize>> = vec![None; g.len()];
    for &(v, l) in clamp {
        assert!(l < c.card(v), "clamped level out of range");
        fixed[v.0] = Some(l);
    }
    let mut columns: Vec<Vec<Option<usize>>> = vec![Vec::with_capacity(n); g.len()];
    let mut row = vec![0usize; g.len()];
    for _ in 0..n {
        for &v in order {
            row[v.0] = match fixed[v.0] {
                Some(l) => l,
                None => {
                    let cpt = c.cpt(v);
                    let cfg = cpt
                        .parents()
                        .iter()
                        .zip(cpt.parent_cards())
                        .fold(0, |acc, (p, &k)| acc * k + row[p.0]);
                    draw(cpt.row(cfg), rng)
                }
            };
        }
        for (col, &l) in columns.iter_mut().zip(&row) {
            col.push(Some(l));
        }
    }
    Dataset::new(c.schema(), columns).expect("sampled levels are in range")
}

/// Inverse-CDF draw; mass lost to rounding falls on the last positive level.
fn draw<T: Real, R: Rng + ?Sized>(probs: &[T], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.iter().enumerate() {
        let p = p.as_f64();
        if p > 0.0 {
            last = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last
}
