use crate::data::Dataset;
use crate::graph::{MGraph, NodeRole};
use crate::Real;

use super::{CausalNetwork, Cpt, ModelError};

/// Weighted contingency table of a family over the rows where the child and
/// all parents are observed. Laid out like a [`Cpt`] table.
pub fn family_counts(d: &Dataset, child_col: usize, parent_cols: &[usize]) -> Vec<f64> {
    let card = d.schema().var(child_col).cardinality();
    let pcards: Vec<usize> = parent_cols.iter().map(|&c| d.schema().var(c).cardinality()).collect();
    let configs: usize = pcards.iter().product();
    let mut counts = vec![0.0; configs * card];
    'rows: for r in 0..d.n_rows() {
        let Some(x) = d.get(r, child_col) else { continue };
        let mut cfg = 0;
        for (&pc, &k) in parent_cols.iter().zip(&pcards) {
            match d.get(r, pc) {
                Some(l) => cfg = cfg * k + l,
                None => continue 'rows,
            }
        }
        counts[cfg * card + x] += d.weight(r);
    }
    counts
}

/// Smoothed conditional frequencies: `(n_xπ + alpha) / (n_π + alpha·|X|)`.
/// A configuration with a zero denominator gets the uniform row.
pub(crate) fn counts_to_table<T: Real>(counts: &[f64], card: usize, alpha: f64) -> Vec<T> {
    let mut table = Vec::with_capacity(counts.len());
    for row in counts.chunks(card) {
        let total: f64 = row.iter().sum::<f64>() + alpha * card as f64;
        if total > 0.0 {
            table.extend(row.iter().map(|&c| T::lit((c + alpha) / total)));
        } else {
            table.extend(std::iter::repeat(T::lit(1.0 / card as f64)).take(card));
        }
    }
    table
}

/// Estimates every CPT of `g` from `d` by available-case counting: a family
/// uses the rows where the child and all its parents are observed.
pub fn fit_parameters<T: Real>(g: &MGraph, d: &Dataset, alpha: f64) -> Result<CausalNetwork<T>, ModelError> {
    if d.n_rows() == 0 || !(d.total_weight() > 0.0) {
        return Err(ModelError::EmptyDataset);
    }
    if !(alpha >= 0.0) {
        return Err(ModelError::InvalidCpt(format!("pseudo-count {alpha} is negative")));
    }
    if let Some(l) = g.nodes_with(|r| *r == NodeRole::Latent).first() {
        return Err(ModelError::UnsupportedLatent(g.name(*l).to_string()));
    }
    let cols = d.columns_for(g)?;
    let mut levels = Vec::with_capacity(g.len());
    let mut cpts = Vec::with_capacity(g.len());
    for id in g.node_ids() {
        let var = d.schema().var(cols[id.0]);
        levels.push(var.levels.clone());
        let parents = g.parents(id).to_vec();
        let pcols: Vec<usize> = parents.iter().map(|p| cols[p.0]).collect();
        let pcards = pcols.iter().map(|&c| d.schema().var(c).cardinality()).collect();
        let counts = family_counts(d, cols[id.0], &pcols);
        let table = counts_to_table(&counts, var.cardinality(), alpha);
        cpts.push(Cpt::new(id, var.cardinality(), parents, pcards, table)?);
    }
    CausalNetwork::new(g.clone(), levels, cpts)
}

/// `Σ_rows w · Σ_X ln P(x | π_x)` over rows complete on every network node.
pub fn log_likelihood<T: Real>(c: &CausalNetwork<T>, d: &Dataset) -> Result<T, ModelError> {
    let g = c.graph();
    let cols = d.columns_for(g)?;
    let mut total = T::zero();
    let mut levels = vec![0usize; g.len()];
    for r in 0..d.n_rows() {
        for id in g.node_ids() {
            levels[id.0] = d.get(r, cols[id.0]).ok_or(ModelError::IncompleteRow(r + 1))?;
        }
        let w = T::lit(d.weight(r));
        for cpt in c.cpts() {
            let cfg = cpt
                .parents()
                .iter()
                .zip(cpt.parent_cards())
                .fold(0, |acc, (p, &k)| acc * k + levels[p.0]);
            let p = cpt.row(cfg)[levels[cpt.child().0]];
            if p <= T::zero() {
                if w > T::zero() {
                    return Err(ModelError::ZeroProbabilityEvent {
                        row: r + 1,
                        family: g.name(cpt.child()).to_string(),
                    });
                }
                continue;
            }
            total = total + w * p.ln();
        }
    }
    Ok(total)
}

/// Log-likelihood contribution of one family from its counts.
pub(crate) fn family_log_likelihood<T: Real>(counts: &[f64], table: &[T]) -> T {
    counts
        .iter()
        .zip(table)
        .filter(|(&n, _)| n > 0.0)
        .map(|(&n, &p)| T::lit(n) * p.ln())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Schema, Variable};
    use crate::graph::NodeId;

    fn one_binary(cells: &[usize]) -> (MGraph, Dataset) {
        let g = MGraph::new(vec![("X".into(), NodeRole::Observed)], &[] as &[(&str, &str)]).unwrap();
        let s = Schema::new(vec![Variable::new("X", ["0", "1"])]).unwrap();
        let d = Dataset::new(s, vec![cells.iter().map(|&c| Some(c)).collect()]).unwrap();
        (g, d)
    }

    #[test]
    fn proportion_without_smoothing() {
        let (g, d) = one_binary(&[1, 1, 1, 0]);
        let net: CausalNetwork<f64> = fit_parameters(&g, &d, 0.0).unwrap();
        assert_eq!(net.cpt(NodeId(0)).table(), &[0.25, 0.75]);
    }

    #[test]
    fn unseen_configuration_is_uniform() {
        let g = MGraph::new(
            vec![("A".into(), NodeRole::Observed), ("B".into(), NodeRole::Observed)],
            &[("A", "B")],
        )
        .unwrap();
        let s = Schema::new(vec![Variable::new("A", ["0", "1"]), Variable::new("B", ["0", "1", "2"])]).unwrap();
        let d = Dataset::new(s, vec![vec![Some(0), Some(0)], vec![Some(1), Some(2)]]).unwrap();
        let net: CausalNetwork<f64> = fit_parameters(&g, &d, 1.0).unwrap();
        let row = net.cpt(NodeId(1)).row(1);
        assert!(row.iter().all(|&p| (p - 1.0 / 3.0).abs() < 1e-15));
        let net0: CausalNetwork<f64> = fit_parameters(&g, &d, 0.0).unwrap();
        assert!(net0.cpt(NodeId(1)).row(1).iter().all(|&p| (p - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn available_case_counting() {
        let g = MGraph::new(
            vec![("A".into(), NodeRole::Observed), ("B".into(), NodeRole::PartiallyObserved)],
            &[("A", "B")],
        )
        .unwrap();
        let s = Schema::new(vec![Variable::new("A", ["0", "1"]), Variable::new("B", ["0", "1"])]).unwrap();
        let d = Dataset::new(
            s,
            vec![vec![Some(0), Some(0), Some(1), Some(0)], vec![Some(1), None, None, Some(0)]],
        )
        .unwrap();
        let net: CausalNetwork<f64> = fit_parameters(&g, &d, 0.0).unwrap();
        // A uses all four rows, B | A only the two complete ones
        assert_eq!(net.cpt(NodeId(0)).table(), &[0.75, 0.25]);
        assert_eq!(net.cpt(NodeId(1)).row(0), &[0.5, 0.5]);
    }

    #[test]
    fn empty_and_latent() {
        let (g, d) = one_binary(&[]);
        assert!(matches!(fit_parameters::<f64>(&g, &d, 1.0), Err(ModelError::EmptyDataset)));
        let g = MGraph::new(vec![("U".into(), NodeRole::Latent)], &[] as &[(&str, &str)]).unwrap();
        let (_, d) = one_binary(&[0]);
        assert!(matches!(fit_parameters::<f64>(&g, &d, 1.0), Err(ModelError::UnsupportedLatent(_))));
    }

    #[test]
    fn log_likelihood_closed_forms() {
        let (g, d) = one_binary(&[0, 1, 0, 1]);
        let uniform = fit_parameters::<f64>(&g, &d, 0.0).unwrap();
        let ll = log_likelihood(&uniform, &d).unwrap();
        assert!((ll - 4.0 * 0.5f64.ln()).abs() < 1e-12);

        let (g, d) = one_binary(&[1, 1, 1]);
        let det = fit_parameters::<f64>(&g, &d, 0.0).unwrap();
        assert_eq!(log_likelihood(&det, &d).unwrap(), 0.0);

        let (_, other) = one_binary(&[0]);
        assert!(matches!(
            log_likelihood(&det, &other),
            Err(ModelError::ZeroProbabilityEvent { row: 1, .. })
        ));
    }

    #[test]
    fn incomplete_rows_rejected() {
        let g = MGraph::new(vec![("X".into(), NodeRole::Observed)], &[] as &[(&str, &str)]).unwrap();
        let s = Schema::new(vec![Variable::new("X", ["0", "1"])]).unwrap();
        let d = Dataset::new(s, vec![vec![Some(0), None]]).unwrap();
        let net = fit_parameters::<f64>(&g, &d, 1.0).unwrap();
        assert!(matches!(log_likelihood(&net, &d), Err(ModelError::IncompleteRow(2))));
    }
}
