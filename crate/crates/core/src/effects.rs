//! Interventional queries `P(y | do(x))` by back-door adjustment.

use itertools::Itertools;
use thiserror::Error;

use crate::graph::{GraphError, MGraph, NodeId, NodeRole};
use crate::model::{eliminate, CausalNetwork, ModelError};
use crate::Real;

/// Largest candidate pool [`find_backdoor`] will enumerate subsets of.
pub const MAX_BACKDOOR_CANDIDATES: usize = 20;

#[derive(Debug, Error)]
pub enum EffectError {
    #[error("no back-door adjustment set exists for `{x}` -> `{y}`")]
    NotIdentifiable { x: String, y: String },
    #[error("{{{0}}} is not a valid back-door set")]
    InvalidAdjustmentSet(String),
    #[error("P({x} | {stratum}) is zero in a stratum with positive probability")]
    ZeroProbabilityStratum { x: String, stratum: String },
    #[error("{0}")]
    InvalidQuery(String),
    #[error("{0} back-door candidates exceed the search limit")]
    TooManyCandidates(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// `P(outcome | do(treatment = treatment_level))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjustmentQuery {
    pub treatment: NodeId,
    pub treatment_level: usize,
    pub outcome: NodeId,
}

impl AdjustmentQuery {
    pub fn from_names<T: Real>(
        c: &CausalNetwork<T>,
        treatment: &str,
        treatment_level: &str,
        outcome: &str,
    ) -> Result<Self, EffectError> {
        let g = c.graph();
        let x = g.id(treatment)?;
        Ok(AdjustmentQuery {
            treatment: x,
            treatment_level: c.level_index(x, treatment_level)?,
            outcome: g.id(outcome)?,
        })
    }
}

fn check_query(g: &MGraph, z: &[NodeId], x: NodeId, y: NodeId) -> Result<(), EffectError> {
    if x == y {
        return Err(EffectError::InvalidQuery(format!("treatment and outcome are both `{}`", g.name(x))));
    }
    if let Some(&v) = z.iter().find(|&&v| v == x || v == y) {
        return Err(EffectError::InvalidQuery(format!("adjustment set contains `{}`", g.name(v))));
    }
    Ok(())
}

/// Back-door criterion: no member of `z` descends from `x`, and `z` blocks
/// every path between `x` and `y` that starts with an edge into `x`.
pub fn is_backdoor(g: &MGraph, z: &[NodeId], x: NodeId, y: NodeId) -> Result<bool, EffectError> {
    check_query(g, z, x, y)?;
    let desc = g.descendants(x);
    if z.iter().any(|v| desc.contains(v)) {
        return Ok(false);
    }
    Ok(g.d_separated_without_out_edges(x, &[x], &[y], z))
}

/// Smallest back-door set, searched by increasing size over the observable
/// ancestors of `{x, y}` outside `de(x)` (fully or partially observed, or
/// selection nodes) in name order; the first valid subset wins.
pub fn find_backdoor(g: &MGraph, x: NodeId, y: NodeId) -> Result<Vec<NodeId>, EffectError> {
    check_query(g, &[], x, y)?;
    let desc = g.descendants(x);
    let mut candidates: Vec<NodeId> = g
        .node_ids()
        .filter(|&v| v != x && v != y && !desc.contains(&v))
        .filter(|&v| {
            matches!(
                g.role(v),
                NodeRole::Observed | NodeRole::PartiallyObserved | NodeRole::Selection
            )
        })
        .collect();
    candidates.sort_by(|a, b| g.name(*a).cmp(g.name(*b)));

    // every minimal separator lies within the ancestors of {x, y}
    let relevant = g.ancestral_set(&[x, y]);
    let near: Vec<NodeId> = candidates.into_iter().filter(|v| relevant.contains(v)).collect();
    if near.len() > MAX_BACKDOOR_CANDIDATES {
        return Err(EffectError::TooManyCandidates(near.len()));
    }
    for k in 0..=near.len() {
        for z in near.iter().copied().combinations(k) {
            if is_backdoor(g, &z, x, y)? {
                return Ok(z);
            }
        }
    }
    Err(EffectError::NotIdentifiable {
        x: g.name(x).to_string(),
        y: g.name(y).to_string(),
    })
}

/// One adjustment stratum `z`: `P(z)` and `P(Y | x, z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stratum<T> {
    pub levels: Vec<usize>,
    pub weight: T,
    pub conditional: Vec<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectReport<T> {
    pub query: AdjustmentQuery,
    pub adjustment: Vec<NodeId>,
    /// Strata with positive probability, in mixed-radix order of `adjustment`.
    pub strata: Vec<Stratum<T>>,
    /// `P(Y | do(x))` over the outcome's levels.
    pub distribution: Vec<T>,
}

/// `Σ_z P(y | x, z) P(z)` computed from a single joint `P(Y, X, Z)`.
pub fn effect<T: Real>(
    c: &CausalNetwork<T>,
    q: &AdjustmentQuery,
    z: &[NodeId],
) -> Result<EffectReport<T>, EffectError> {
    let g = c.graph();
    let (x, y) = (q.treatment, q.outcome);
    if q.treatment_level >= c.card(x) {
        return Err(EffectError::InvalidQuery(format!("treatment level #{} out of range", q.treatment_level)));
    }
    if z.iter().enumerate().any(|(i, v)| z[..i].contains(v)) {
        return Err(EffectError::InvalidQuery("adjustment set has duplicates".into()));
    }
    if !is_backdoor(g, z, x, y)? {
        return Err(EffectError::InvalidAdjustmentSet(g.names_of(z).join(", ")));
    }

    let mut scope = vec![y, x];
    scope.extend_from_slice(z);
    let joint = eliminate(c, &scope, &[])?;
    let (ky, kx) = (c.card(y), c.card(x));
    let n_strata: usize = z.iter().map(|&v| c.card(v)).product();
    // with scope [y, x, z..] and the last variable fastest, the z block is
    // contiguous: index = (yl * kx + xl) * n_strata + s
    let at = |yl: usize, xl: usize, s: usize| joint.values()[(yl * kx + xl) * n_strata + s];

    let mut distribution = vec![T::zero(); ky];
    let mut strata = Vec::new();
    for s in 0..n_strata {
        let mut pz = T::zero();
        for yl in 0..ky {
            for xl in 0..kx {
                pz = pz + at(yl, xl, s);
            }
        }
        if pz <= T::zero() {
            continue;
        }
        let pxz: T = (0..ky).map(|yl| at(yl, q.treatment_level, s)).sum();
        let levels = stratum_levels(c, z, s);
        if pxz <= T::zero() {
            let stratum = z
                .iter()
                .zip(&levels)
                .map(|(&v, &l)| format!("{}={}", g.name(v), c.levels(v)[l]))
                .join(",");
            return Err(EffectError::ZeroProbabilityStratum {
                x: format!("{}={}", g.name(x), c.levels(x)[q.treatment_level]),
                stratum,
            });
        }
        let conditional: Vec<T> = (0..ky).map(|yl| at(yl, q.treatment_level, s) / pxz).collect();
        for (acc, &p) in distribution.iter_mut().zip(&conditional) {
            *acc = *acc + pz * p;
        }
        strata.push(Stratum {
            levels,
            weight: pz,
            conditional,
        });
    }
    let total: T = distribution.iter().copied().sum();
    for p in &mut distribution {
        *p = *p / total;
    }
    Ok(EffectReport {
        query: q.clone(),
        adjustment: z.to_vec(),
        strata,
        distribution,
    })
}

fn stratum_levels<T: Real>(c: &CausalNetwork<T>, z: &[NodeId], mut s: usize) -> Vec<usize> {
    let mut levels = vec![0; z.len()];
    for k in (0..z.len()).rev() {
        let card = c.card(z[k]);
        levels[k] = s % card;
        s /= card;
    }
    levels
}
