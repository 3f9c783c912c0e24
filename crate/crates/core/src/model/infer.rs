//! Exact inference by variable elimination.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::data::{Dataset, Schema};
use crate::graph::{MGraph, NodeId};
use crate::Real;

use super::{CausalNetwork, Factor, ModelError};

/// Normalized posterior `P(query | evidence)` as a factor whose scope is
/// `query` in the given order.
///
/// Only the ancestral set of the query and evidence nodes is touched. Hidden
/// variables are eliminated greedily by minimum degree, ties broken by name.
pub fn eliminate<T: Real>(
    c: &CausalNetwork<T>,
    query: &[NodeId],
    evidence: &[(NodeId, usize)],
) -> Result<Factor<T>, ModelError> {
    let joint = unnormalized(c, query, evidence)?;
    joint.normalized().ok_or(ModelError::InconsistentEvidence)
}

/// `P(query, evidence)` (not normalized).
pub(crate) fn unnormalized<T: Real>(
    c: &CausalNetwork<T>,
    query: &[NodeId],
    evidence: &[(NodeId, usize)],
) -> Result<Factor<T>, ModelError> {
    let g = c.graph();
    let n = g.len();
    let mut observed: Vec<Option<usize>> = vec![None; n];
    for &(v, l) in evidence {
        if l >= c.card(v) {
            return Err(ModelError::UnknownLevel {
                node: g.name(v).to_string(),
                level: format!("#{l}"),
            });
        }
        if let Some(prev) = observed[v.0] {
            if prev != l {
                return Err(ModelError::InconsistentEvidence);
            }
        }
        observed[v.0] = Some(l);
    }
    for (i, q) in query.iter().enumerate() {
        if observed[q.0].is_some() || query[..i].contains(q) {
            return Err(ModelError::QueryEvidenceOverlap(g.name(*q).to_string()));
        }
    }

    let seeds: Vec<NodeId> = query.iter().copied().chain(evidence.iter().map(|e| e.0)).collect();
    let relevant = g.ancestral_set(&seeds);

    let mut factors: Vec<Factor<T>> = Vec::with_capacity(relevant.len());
    for &v in &relevant {
        let mut f = c.cpt(v).to_factor();
        for &u in c.cpt(v).parents().iter().chain(std::iter::once(&v)) {
            if let Some(l) = observed[u.0] {
                f = f.reduce(u, l);
            }
        }
        factors.push(f);
    }

    let mut hidden: Vec<NodeId> = relevant
        .iter()
        .copied()
        .filter(|v| observed[v.0].is_none() && !query.contains(v))
        .collect();

    while !hidden.is_empty() {
        let (pick, _) = hidden
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, degree(&factors, v)))
            .min_by(|a, b| a.1.cmp(&b.1).then_with(|| g.name(hidden[a.0]).cmp(g.name(hidden[b.0]))))
            .expect("hidden is non-empty");
        let var = hidden.swap_remove(pick);
        let (touching, rest): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.position(var).is_some());
        factors = rest;
        if let Some(prod) = touching.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(prod.sum_out(var));
        }
    }

    let joint = factors
        .into_iter()
        .reduce(|a, b| a.product(&b))
        .unwrap_or_else(|| Factor::scalar(T::one()));
    Ok(joint.marginal(query))
}

/// Number of distinct other variables sharing a factor with `v`.
fn degree<T: Real>(factors: &[Factor<T>], v: NodeId) -> usize {
    let mut nbrs: Vec<NodeId> = Vec::new();
    for f in factors.iter().filter(|f| f.position(v).is_some()) {
        for &u in f.scope() {
            if u != v && !nbrs.contains(&u) {
                nbrs.push(u);
            }
        }
    }
    nbrs.len()
}

/// Posterior marginal of each variable in `vars` given `evidence`.
pub fn posterior_marginals<T: Real>(
    c: &CausalNetwork<T>,
    evidence: &[(NodeId, usize)],
    vars: &[NodeId],
) -> Result<Vec<Vec<T>>, ModelError> {
    vars.iter()
        .map(|&v| eliminate(c, &[v], evidence).map(|f| f.values().to_vec()))
        .collect()
}

/// Maps dataset columns and level codes onto network nodes and levels.
#[derive(Debug, Clone)]
pub(crate) struct Alignment {
    cols: Vec<Option<usize>>,
    levels: Vec<Vec<usize>>,
}

impl Alignment {
    /// Network nodes without a same-named column are treated as never observed.
    pub(crate) fn new<T: Real>(c: &CausalNetwork<T>, schema: &Schema) -> Result<Self, ModelError> {
        let g = c.graph();
        let mut cols = Vec::with_capacity(g.len());
        let mut levels = Vec::with_capacity(g.len());
        for id in g.node_ids() {
            match schema.index_of(g.name(id)) {
                Some(col) => {
                    let map = schema
                        .var(col)
                        .levels
                        .iter()
                        .map(|l| c.level_index(id, l))
                        .collect::<Result<Vec<_>, _>>()?;
                    cols.push(Some(col));
                    levels.push(map);
                }
                None => {
                    cols.push(None);
                    levels.push(Vec::new());
                }
            }
        }
        Ok(Alignment { cols, levels })
    }

    pub(crate) fn col(&self, id: NodeId) -> Option<usize> {
        self.cols[id.0]
    }

    /// Network level of a cell, `None` when missing or without a column.
    #[inline]
    pub(crate) fn level(&self, d: &Dataset, row: usize, id: NodeId) -> Option<usize> {
        self.cols[id.0].and_then(|col| d.get(row, col)).map(|l| self.levels[id.0][l])
    }

    /// Network level of a data level code of `id`'s column.
    pub(crate) fn net_level(&self, id: NodeId, data_level: usize) -> usize {
        self.levels[id.0][data_level]
    }

    pub(crate) fn evidence(&self, d: &Dataset, row: usize, skip: Option<NodeId>) -> Vec<(NodeId, usize)> {
        (0..self.cols.len())
            .map(NodeId)
            .filter(|&id| Some(id) != skip)
            .filter_map(|id| self.level(d, row, id).map(|l| (id, l)))
            .collect()
    }
}

/// Observed cells of `row` as evidence on the network's nodes, matching
/// columns and levels by name; `skip` is left out.
pub fn evidence_from_row<T: Real>(
    c: &CausalNetwork<T>,
    d: &Dataset,
    row: usize,
    skip: Option<NodeId>,
) -> Result<Vec<(NodeId, usize)>, ModelError> {
    Ok(Alignment::new(c, d.schema())?.evidence(d, row, skip))
}

/// Drops, one at a time in node order, each evidence node d-separated from
/// `t` by the remaining evidence; the posterior of `t` is unchanged.
fn requisite_evidence(g: &MGraph, t: NodeId, ev: &[(NodeId, usize)]) -> Vec<(NodeId, usize)> {
    let mut kept = ev.to_vec();
    let mut i = 0;
    while i < kept.len() {
        let rest: Vec<NodeId> = kept.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, e)| e.0).collect();
        if g.d_separated_ids(&[t], &[kept[i].0], &rest) {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    kept
}

/// Predicted probability of `target = target_level` for one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction<T> {
    pub score: T,
    /// The row's evidence was impossible under the model; the score is the
    /// prior marginal instead.
    pub flagged: bool,
}

/// Scores every row by `P(target = level | observed non-target cells)`.
///
/// Rows sharing an evidence pattern are computed once; distinct patterns are
/// evaluated in parallel and results keep row order.
pub fn predict<T: Real>(
    c: &CausalNetwork<T>,
    d: &Dataset,
    target: &str,
    target_level: &str,
) -> Result<Vec<Prediction<T>>, ModelError> {
    let t = c.graph().id(target)?;
    let tl = c.level_index(t, target_level)?;
    let align = Alignment::new(c, d.schema())?;
    let prior = eliminate(c, &[t], &[])?.values()[tl];

    let mut patterns: Vec<Vec<(NodeId, usize)>> = Vec::new();
    let mut seen: HashMap<Vec<(NodeId, usize)>, usize> = HashMap::new();
    let mut row_pattern = Vec::with_capacity(d.n_rows());
    for r in 0..d.n_rows() {
        let ev = align.evidence(d, r, Some(t));
        let next = patterns.len();
        let k = *seen.entry(ev.clone()).or_insert_with(|| {
            patterns.push(ev);
            next
        });
        row_pattern.push(k);
    }

    let scored: Vec<Result<Prediction<T>, ModelError>> = patterns
        .par_iter()
        .map(|ev| match eliminate(c, &[t], ev) {
            Ok(f) => {
                // equal posteriors must compare equal, so rows that differ
                // only in irrelevant evidence share one computation
                let req = requisite_evidence(c.graph(), t, ev);
                let score = if req.len() == ev.len() {
                    f.values()[tl]
                } else {
                    eliminate(c, &[t], &req)?.values()[tl]
                };
                Ok(Prediction { score, flagged: false })
            }
            Err(ModelError::InconsistentEvidence) => Ok(Prediction { score: prior, flagged: true }),
            Err(e) => Err(e),
        })
        .collect();
    let scored = scored.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(row_pattern.into_iter().map(|k| scored[k]).collect())
}
