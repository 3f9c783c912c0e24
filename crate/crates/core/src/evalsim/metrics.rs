use std::cmp::Ordering;

use crate::graph::MGraph;
use crate::Real;

use super::EvalError;

/// Area under the ROC curve by the Mann–Whitney statistic: the probability
/// that a random positive outscores a random negative, ties counting half.
pub fn auc<T: Real>(labels: &[bool], scores: &[T]) -> Result<f64, EvalError> {
    if labels.len() != scores.len() {
        return Err(EvalError::LengthMismatch {
            labels: labels.len(),
            scores: scores.len(),
        });
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(EvalError::DegenerateLabels);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap_or(Ordering::Equal));

    // pairs (positive, negative) won by the positive, doubled to stay integral
    let mut wins2: u128 = 0;
    let mut negatives_below: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let tied_pos = order[i..j].iter().filter(|&&k| labels[k]).count() as u128;
        let tied_neg = (j - i) as u128 - tied_pos;
        wins2 += tied_pos * (2 * negatives_below + tied_neg);
        negatives_below += tied_neg;
        i = j;
    }
    Ok(wins2 as f64 / (2.0 * pos as f64 * neg as f64))
}

/// Structural Hamming distance over unordered pairs of non-indicator nodes,
/// matched by name: a pair counts once if its adjacency or orientation
/// differs between the graphs.
pub fn shd(a: &MGraph, b: &MGraph) -> Result<usize, EvalError> {
    let names = |g: &MGraph| {
        let mut v: Vec<String> = g
            .node_ids()
            .filter(|&id| !g.role(id).is_indicator())
            .map(|id| g.name(id).to_string())
            .collect();
        v.sort();
        v
    };
    let na = names(a);
    if na != names(b) {
        return Err(EvalError::NodeSetMismatch);
    }
    let state = |g: &MGraph, x: &str, y: &str| {
        let (x, y) = (g.id(x).expect("shared node"), g.id(y).expect("shared node"));
        (g.has_edge(x, y), g.has_edge(y, x))
    };
    let mut d = 0;
    for i in 0..na.len() {
        for j in i + 1..na.len() {
            if state(a, &na[i], &na[j]) != state(b, &na[i], &na[j]) {
                d += 1;
            }
        }
    }
    Ok(d)
}
