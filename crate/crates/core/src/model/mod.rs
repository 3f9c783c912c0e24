//! Causal networks: a graph plus one conditional probability table per node,
//! with the joint given by the product of the local tables.

mod factor;
mod fit;
mod format;
mod infer;
mod sample;

use thiserror::Error;

use crate::data::{DataError, Schema, Variable};
use crate::graph::{GraphError, MGraph, NodeId, NodeRole};
use crate::Real;

pub use factor::Factor;
pub use fit::{family_counts, fit_parameters, log_likelihood};
pub use format::{parse_network, write_network};
pub use infer::{eliminate, evidence_from_row, posterior_marginals, predict, Prediction};
pub use sample::{sample, sample_rows};

pub(crate) use fit::{counts_to_table, family_log_likelihood};
pub(crate) use infer::Alignment;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dataset has no rows (or zero total weight)")]
    EmptyDataset,
    #[error("row {0} is incomplete on the network's nodes")]
    IncompleteRow(usize),
    #[error("row {row}: family `{family}` has probability zero")]
    ZeroProbabilityEvent { row: usize, family: String },
    #[error("evidence has probability zero under the model")]
    InconsistentEvidence,
    #[error("latent node `{0}` cannot be estimated")]
    UnsupportedLatent(String),
    #[error("invalid CPT: {0}")]
    InvalidCpt(String),
    #[error("invalid factor: {0}")]
    InvalidFactor(String),
    #[error("node `{0}` is both queried and observed")]
    QueryEvidenceOverlap(String),
    #[error("node `{node}` has no level `{level}`")]
    UnknownLevel { node: String, level: String },
    #[error("network line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Tolerance on row sums of a probability table.
pub(crate) fn row_tolerance<T: Real>() -> T {
    T::lit(1e-12).max(T::epsilon() * T::lit(64.0))
}

/// `P(child | parents)`, one row per parent configuration.
///
/// Configurations are indexed mixed-radix over `parents` with the last parent
/// varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt<T> {
    child: NodeId,
    parents: Vec<NodeId>,
    child_card: usize,
    parent_cards: Vec<usize>,
    table: Vec<T>,
}

impl<T: Real> Cpt<T> {
    pub fn new(
        child: NodeId,
        child_card: usize,
        parents: Vec<NodeId>,
        parent_cards: Vec<usize>,
        table: Vec<T>,
    ) -> Result<Self, ModelError> {
        if child_card == 0 || parent_cards.contains(&0) {
            return Err(ModelError::InvalidCpt("zero cardinality".into()));
        }
        if parents.len() != parent_cards.len() {
            return Err(ModelError::InvalidCpt("parent list and cardinalities differ".into()));
        }
        let rows: usize = parent_cards.iter().product();
        if table.len() != rows * child_card {
            return Err(ModelError::InvalidCpt(format!(
                "table has {} entries, expected {}",
                table.len(),
                rows * child_card
            )));
        }
        let tol = row_tolerance::<T>();
        for (r, row) in table.chunks(child_card).enumerate() {
            if row.iter().any(|p| !(*p >= T::zero())) {
                return Err(ModelError::InvalidCpt(format!("row {r} has a negative or NaN entry")));
            }
            let s: T = row.iter().copied().sum();
            if (s - T::one()).abs() > tol {
                return Err(ModelError::InvalidCpt(format!("row {r} sums to {s}")));
            }
        }
        Ok(Cpt {
            child,
            parents,
            child_card,
            parent_cards,
            table,
        })
    }

    /// Root CPT with a single distribution.
    pub fn root(child: NodeId, probs: Vec<T>) -> Result<Self, ModelError> {
        Cpt::new(child, probs.len(), Vec::new(), Vec::new(), probs)
    }

    pub fn child(&self) -> NodeId {
        self.child
    }

    pub fn parents(&self) -> &[NodeId] {
        &self.parents
    }

    pub fn child_card(&self) -> usize {
        self.child_card
    }

    pub fn parent_cards(&self) -> &[usize] {
        &self.parent_cards
    }

    pub fn n_configs(&self) -> usize {
        self.table.len() / self.child_card
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    pub fn config_index(&self, parent_levels: &[usize]) -> usize {
        parent_levels
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (&l, &c)| acc * c + l)
    }

    pub fn config_levels(&self, mut config: usize) -> Vec<usize> {
        let mut out = vec![0; self.parent_cards.len()];
        for k in (0..out.len()).rev() {
            out[k] = config % self.parent_cards[k];
            config /= self.parent_cards[k];
        }
        out
    }

    pub fn row(&self, config: usize) -> &[T] {
        &self.table[config * self.child_card..(config + 1) * self.child_card]
    }

    pub fn prob(&self, parent_levels: &[usize], level: usize) -> T {
        self.row(self.config_index(parent_levels))[level]
    }

    /// The table as a factor over `parents ++ [child]`.
    pub fn to_factor(&self) -> Factor<T> {
        let mut scope = self.parents.clone();
        scope.push(self.child);
        let mut cards = self.parent_cards.clone();
        cards.push(self.child_card);
        Factor::from_parts(scope, cards, self.table.clone())
    }
}

/// Causal graph plus parameters. Every node carries a CPT whose parent list
/// equals its parent set in the graph (declaration order).
#[derive(Debug, Clone, PartialEq)]
pub struct CausalNetwork<T> {
    graph: MGraph,
    levels: Vec<Vec<String>>,
    cpts: Vec<Cpt<T>>,
}

impl<T: Real> CausalNetwork<T> {
    pub fn new(graph: MGraph, levels: Vec<Vec<String>>, cpts: Vec<Cpt<T>>) -> Result<Self, ModelError> {
        if levels.len() != graph.len() || cpts.len() != graph.len() {
            return Err(ModelError::InvalidCpt("one level list and one CPT per node required".into()));
        }
        for id in graph.node_ids() {
            if *graph.role(id) == NodeRole::Latent {
                return Err(ModelError::UnsupportedLatent(graph.name(id).to_string()));
            }
            let cpt = &cpts[id.0];
            let name = graph.name(id);
            if cpt.child != id {
                return Err(ModelError::InvalidCpt(format!("CPT at `{name}` belongs to another node")));
            }
            if cpt.parents != graph.parents(id) {
                return Err(ModelError::InvalidCpt(format!("CPT parents of `{name}` differ from the graph")));
            }
            if cpt.child_card != levels[id.0].len() {
                return Err(ModelError::InvalidCpt(format!("CPT of `{name}` has the wrong cardinality")));
            }
            for (p, &c) in cpt.parents.iter().zip(&cpt.parent_cards) {
                if levels[p.0].len() != c {
                    return Err(ModelError::InvalidCpt(format!(
                        "CPT of `{name}` disagrees on the cardinality of `{}`",
                        graph.name(*p)
                    )));
                }
            }
        }
        Ok(CausalNetwork { graph, levels, cpts })
    }

    pub fn graph(&self) -> &MGraph {
        &self.graph
    }

    pub fn cpt(&self, id: NodeId) -> &Cpt<T> {
        &self.cpts[id.0]
    }

    pub fn cpts(&self) -> &[Cpt<T>] {
        &self.cpts
    }

    pub fn levels(&self, id: NodeId) -> &[String] {
        &self.levels[id.0]
    }

    pub fn card(&self, id: NodeId) -> usize {
        self.levels[id.0].len()
    }

    pub fn level_index(&self, id: NodeId, level: &str) -> Result<usize, ModelError> {
        self.levels[id.0]
            .iter()
            .position(|l| l == level)
            .ok_or_else(|| ModelError::UnknownLevel {
                node: self.graph.name(id).to_string(),
                level: level.to_string(),
            })
    }

    /// Schema with one variable per node, in declaration order.
    pub fn schema(&self) -> Schema {
        let vars = self
            .graph
            .node_ids()
            .map(|id| Variable::new(self.graph.name(id), self.levels[id.0].iter().cloned()))
            .collect();
        Schema::new(vars).expect("network levels form a valid schema")
    }

    /// The network after `do(x = level)`: edges into `x` are cut and its CPT
    /// becomes a point mass.
    pub fn intervene(&self, x: NodeId, level: usize) -> Result<Self, ModelError> {
        if level >= self.card(x) {
            return Err(ModelError::UnknownLevel {
                node: self.graph.name(x).to_string(),
                level: format!("#{level}"),
            });
        }
        let graph = self
            .graph
            .with_edges(self.graph.edges().iter().copied().filter(|&(_, c)| c != x))?;
        let mut cpts = self.cpts.clone();
        let mut point = vec![T::zero(); self.card(x)];
        point[level] = T::one();
        cpts[x.0] = Cpt::root(x, point)?;
        CausalNetwork::new(graph, self.levels.clone(), cpts)
    }

    /// Same structure and tables with another scalar type.
    pub fn cast<U: Real>(&self) -> CausalNetwork<U> {
        CausalNetwork {
            graph: self.graph.clone(),
            levels: self.levels.clone(),
            cpts: self
                .cpts
                .iter()
                .map(|c| Cpt {
                    child: c.child,
                    parents: c.parents.clone(),
                    child_card: c.child_card,
                    parent_cards: c.parent_cards.clone(),
                    table: c.table.iter().map(|v| U::lit(v.as_f64())).collect(),
                })
                .collect(),
        }
    }
}
