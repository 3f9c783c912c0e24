use std::collections::BTreeSet;

use super::{Edge, GraphError, MGraph, NodeId, NodeRole};

/// Prior graph `G0` whose edges are frozen (the whitelist), a blacklist of
/// edges that may never appear, and the role rules limiting which edges a
/// structure search may add.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorKnowledge {
    graph: MGraph,
    blacklist: BTreeSet<Edge>,
}

impl PriorKnowledge {
    pub fn new<I: IntoIterator<Item = Edge>>(g0: MGraph, blacklist: I) -> Result<Self, GraphError> {
        let blacklist: BTreeSet<Edge> = blacklist.into_iter().collect();
        if let Some(&(p, c)) = g0.edges().intersection(&blacklist).next() {
            return Err(GraphError::ConstraintConflict(format!(
                "edge {} -> {} is both required and forbidden",
                g0.name(p),
                g0.name(c)
            )));
        }
        Ok(PriorKnowledge { graph: g0, blacklist })
    }

    /// Resolves a named blacklist against `g0`.
    pub fn from_names(g0: MGraph, forbidden: &[(String, String)]) -> Result<Self, GraphError> {
        let ids = forbidden
            .iter()
            .map(|(p, c)| Ok((g0.id(p)?, g0.id(c)?)))
            .collect::<Result<Vec<_>, GraphError>>()?;
        Self::new(g0, ids)
    }

    /// Prior with no frozen edges and no blacklist over the nodes of `g`.
    pub fn unconstrained(g: &MGraph) -> Self {
        PriorKnowledge {
            graph: g.with_edges([]).expect("edgeless graph is valid"),
            blacklist: BTreeSet::new(),
        }
    }

    pub fn graph(&self) -> &MGraph {
        &self.graph
    }

    pub fn whitelist(&self) -> &BTreeSet<Edge> {
        self.graph.edges()
    }

    pub fn blacklist(&self) -> &BTreeSet<Edge> {
        &self.blacklist
    }

    pub fn is_frozen(&self, edge: Edge) -> bool {
        self.graph.edges().contains(&edge)
    }

    /// May a search introduce `parent -> child`?
    ///
    /// Only edges between substantive data nodes, or out of a selection node
    /// into one, are searchable; anything touching a missingness indicator
    /// comes from the prior alone.
    pub fn allows(&self, parent: NodeId, child: NodeId) -> bool {
        if parent == child || self.blacklist.contains(&(parent, child)) {
            return false;
        }
        let searchable_child = matches!(
            self.graph.role(child),
            NodeRole::Observed | NodeRole::PartiallyObserved
        );
        let searchable_parent = matches!(
            self.graph.role(parent),
            NodeRole::Observed | NodeRole::PartiallyObserved | NodeRole::Selection
        );
        searchable_child && searchable_parent
    }

    /// Checks that a graph over the same nodes respects the prior.
    pub fn check(&self, g: &MGraph) -> Result<(), GraphError> {
        if g.names() != self.graph.names() {
            return Err(GraphError::ConstraintConflict("node sets differ".into()));
        }
        for &(p, c) in self.whitelist() {
            if !g.has_edge(p, c) {
                return Err(GraphError::ConstraintConflict(format!(
                    "required edge {} -> {} missing",
                    g.name(p),
                    g.name(c)
                )));
            }
        }
        for &(p, c) in g.edges() {
            if !self.is_frozen((p, c)) && !self.allows(p, c) {
                return Err(GraphError::ConstraintConflict(format!(
                    "edge {} -> {} is not permitted",
                    g.name(p),
                    g.name(c)
                )));
            }
        }
        Ok(())
    }
}
