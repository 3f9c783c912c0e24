use std::collections::HashMap;

use rayon::prelude::*;

use crate::data::Dataset;
use crate::graph::{MGraph, NodeId, NodeRole};
use crate::model::{counts_to_table, family_log_likelihood};
use crate::Real;

use super::DiscoveryError;

/// A decomposable score with its per-family terms, indexed by node.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreValue<T> {
    pub total: T,
    pub locals: Vec<T>,
}

/// `Σ_X [ LL(X | Π_X) − ½ · k_X · ln n ]` with
/// `k_X = (|X| − 1) · ∏ |Π|` and `n` the total row weight. Parameters are the
/// smoothed frequencies used by parameter fitting.
pub fn bic<T: Real>(g: &MGraph, d: &Dataset, alpha: f64) -> Result<ScoreValue<T>, DiscoveryError> {
    let scorer = FamilyScorer::new(g, d, alpha)?;
    let locals: Vec<T> = g.node_ids().map(|v| scorer.local(v, g.parents(v))).collect();
    Ok(ScoreValue {
        total: locals.iter().copied().sum(),
        locals,
    })
}

/// Local scores on complete data, addressed by graph node ids.
pub(crate) struct FamilyScorer<'a> {
    codes: Vec<Vec<u16>>,
    cards: Vec<usize>,
    weights: Option<&'a [f64]>,
    penalty: f64,
    alpha: f64,
}

impl<'a> FamilyScorer<'a> {
    pub(crate) fn new(g: &MGraph, d: &'a Dataset, alpha: f64) -> Result<Self, DiscoveryError> {
        if let Some(&l) = g.nodes_with(|r| *r == NodeRole::Latent).first() {
            return Err(DiscoveryError::UnsupportedLatent(g.name(l).to_string()));
        }
        let n_eff = d.total_weight();
        if d.n_rows() == 0 || !(n_eff > 0.0) {
            return Err(DiscoveryError::EmptyDataset);
        }
        let cols = d.columns_for(g)?;
        let mut codes = Vec::with_capacity(cols.len());
        for &c in &cols {
            let col: Option<Vec<u16>> = d.column_cells(c).map(|x| x.map(|l| l as u16)).collect();
            codes.push(col.ok_or_else(|| DiscoveryError::IncompleteData(d.schema().var(c).name.clone()))?);
        }
        Ok(FamilyScorer {
            codes,
            cards: cols.iter().map(|&c| d.schema().var(c).cardinality()).collect(),
            weights: (!d.has_unit_weights()).then(|| d.weights()),
            penalty: 0.5 * n_eff.ln(),
            alpha,
        })
    }

    pub(crate) fn local<T: Real>(&self, child: NodeId, parents: &[NodeId]) -> T {
        let card = self.cards[child.0];
        let configs: usize = parents.iter().map(|p| self.cards[p.0]).product();
        let mut counts = vec![0.0; configs * card];
        let x = &self.codes[child.0];
        for r in 0..x.len() {
            let cfg = parents
                .iter()
                .fold(0, |acc, p| acc * self.cards[p.0] + self.codes[p.0][r] as usize);
            counts[cfg * card + x[r] as usize] += self.weights.map_or(1.0, |w| w[r]);
        }
        let table: Vec<T> = counts_to_table(&counts, card, self.alpha);
        let k = ((card - 1) * configs) as f64;
        family_log_likelihood(&counts, &table) - T::lit(self.penalty * k)
    }
}

/// Memoized local scores keyed by child and sorted parent set.
pub(crate) struct ScoreCache<T> {
    map: HashMap<(NodeId, Vec<NodeId>), T>,
}

impl<T: Real> ScoreCache<T> {
    pub(crate) fn new() -> Self {
        ScoreCache { map: HashMap::new() }
    }

    /// Scores every missing family in parallel.
    pub(crate) fn fill(&mut self, scorer: &FamilyScorer<'_>, families: Vec<(NodeId, Vec<NodeId>)>) {
        let mut todo: Vec<(NodeId, Vec<NodeId>)> =
            families.into_iter().filter(|f| !self.map.contains_key(f)).collect();
        todo.sort();
        todo.dedup();
        let scored: Vec<T> = todo.par_iter().map(|(c, ps)| scorer.local(*c, ps)).collect();
        self.map.extend(todo.into_iter().zip(scored));
    }

    pub(crate) fn get(&self, child: NodeId, parents: &[NodeId]) -> T {
        self.map[&(child, parents.to_vec())]
    }
}
