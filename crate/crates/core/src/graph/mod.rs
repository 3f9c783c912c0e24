//! Directed acyclic graphs whose nodes carry missingness/selection roles.
//!
//! An [`MGraph`] holds the causal structure over observed, partially observed,
//! latent and selection (context) variables, together with the missingness
//! indicators `R_X` of the partially observed ones. The stored data column of a
//! partially observed variable plays the role of its proxy, so proxies have no
//! node of their own.

mod dsep;
mod format;
mod prior;

use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::cmp::Reverse;
use std::fmt;

use thiserror::Error;

pub use format::{parse_graph, write_graph, GraphFile};
pub use prior::PriorKnowledge;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("cycle detected: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
    #[error("role violation: {0}")]
    RoleViolation(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("duplicate node `{0}`")]
    DuplicateNode(String),
    #[error("node sets are not pairwise disjoint (`{0}` appears twice)")]
    OverlappingSets(String),
    #[error("constraint conflict: {0}")]
    ConstraintConflict(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Index of a node in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

/// Directed edge `(parent, child)`.
pub type Edge = (NodeId, NodeId);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeRole {
    /// Fully observed variable.
    Observed,
    /// Variable with at least one missing value; its column is the proxy.
    PartiallyObserved,
    /// Never-measured variable.
    Latent,
    /// Selection/context variable identifying the population a row comes from.
    Selection,
    /// Missingness indicator of the named partially observed variable.
    MissIndicator(String),
}

impl NodeRole {
    pub fn is_indicator(&self) -> bool {
        matches!(self, NodeRole::MissIndicator(_))
    }

    /// Observed, partially observed or latent domain variable.
    pub fn is_substantive(&self) -> bool {
        matches!(
            self,
            NodeRole::Observed | NodeRole::PartiallyObserved | NodeRole::Latent
        )
    }

    /// Role whose values are recorded in the data for every row.
    pub fn is_fully_observed(&self) -> bool {
        matches!(
            self,
            NodeRole::Observed | NodeRole::Selection | NodeRole::MissIndicator(_)
        )
    }
}

impl fmt::Display for NodeRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRole::Observed => f.write_str("observed"),
            NodeRole::PartiallyObserved => f.write_str("partially_observed"),
            NodeRole::Latent => f.write_str("latent"),
            NodeRole::Selection => f.write_str("selection"),
            NodeRole::MissIndicator(of) => write!(f, "indicator={of}"),
        }
    }
}

/// Switches for the structural rules checked by [`MGraph::with_options`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GraphOptions {
    /// Permit edges from missingness indicators into non-indicator nodes.
    pub allow_indicator_parents: bool,
}

/// Validated DAG with node roles. Immutable once built.
#[derive(Debug, Clone)]
pub struct MGraph {
    names: Vec<String>,
    roles: Vec<NodeRole>,
    index: HashMap<String, NodeId>,
    edges: BTreeSet<Edge>,
    parents: Vec<Vec<NodeId>>,
    children: Vec<Vec<NodeId>>,
    indicator: Vec<Option<NodeId>>,
    order: Vec<NodeId>,
    options: GraphOptions,
}

impl PartialEq for MGraph {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.roles == other.roles && self.edges == other.edges
    }
}

impl Eq for MGraph {}

impl MGraph {
    /// Builds a graph from named nodes and named edges with default options.
    pub fn new<S: AsRef<str>>(
        nodes: Vec<(String, NodeRole)>,
        edges: &[(S, S)],
    ) -> Result<Self, GraphError> {
        Self::with_options(nodes, edges, GraphOptions::default())
    }

    pub fn with_options<S: AsRef<str>>(
        nodes: Vec<(String, NodeRole)>,
        edges: &[(S, S)],
        options: GraphOptions,
    ) -> Result<Self, GraphError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, (name, _)) in nodes.iter().enumerate() {
            if index.insert(name.clone(), NodeId(i)).is_some() {
                return Err(GraphError::DuplicateNode(name.clone()));
            }
        }
        let mut ids = Vec::with_capacity(edges.len());
        for (p, c) in edges {
            let lookup = |n: &str| {
                index
                    .get(n)
                    .copied()
                    .ok_or_else(|| GraphError::UnknownNode(n.to_string()))
            };
            ids.push((lookup(p.as_ref())?, lookup(c.as_ref())?));
        }
        let (names, roles): (Vec<_>, Vec<_>) = nodes.into_iter().unzip();
        Self::assemble(names, roles, index, ids, options)
    }

    /// Graph over the same nodes and options with a different edge set.
    pub fn with_edges<I: IntoIterator<Item = Edge>>(&self, edges: I) -> Result<Self, GraphError> {
        Self::assemble(
            self.names.clone(),
            self.roles.clone(),
            self.index.clone(),
            edges.into_iter().collect(),
            self.options,
        )
    }

    fn assemble(
        names: Vec<String>,
        roles: Vec<NodeRole>,
        index: HashMap<String, NodeId>,
        edge_list: Vec<Edge>,
        options: GraphOptions,
    ) -> Result<Self, GraphError> {
        let n = names.len();
        let mut indicator = vec![None; n];
        for (i, role) in roles.iter().enumerate() {
            if let NodeRole::MissIndicator(of) = role {
                let target = *index.get(of).ok_or_else(|| {
                    GraphError::RoleViolation(format!(
                        "indicator `{}` refers to unknown node `{of}`",
                        names[i]
                    ))
                })?;
                if roles[target.0] != NodeRole::PartiallyObserved {
                    return Err(GraphError::RoleViolation(format!(
                        "indicator `{}` refers to `{of}`, which is not partially observed",
                        names[i]
                    )));
                }
                if let Some(prev) = indicator[target.0] {
                    let prev: NodeId = prev;
                    return Err(GraphError::RoleViolation(format!(
                        "`{of}` has two indicators: `{}` and `{}`",
                        names[prev.0], names[i]
                    )));
                }
                indicator[target.0] = Some(NodeId(i));
            }
        }

        let edges: BTreeSet<Edge> = edge_list.into_iter().collect();
        for &(p, c) in &edges {
            if p == c {
                return Err(GraphError::CycleDetected(vec![
                    names[p.0].clone(),
                    names[c.0].clone(),
                ]));
            }
            if roles[c.0] == NodeRole::Selection {
                return Err(GraphError::RoleViolation(format!(
                    "edge {} -> {} enters selection node",
                    names[p.0], names[c.0]
                )));
            }
            if roles[p.0].is_indicator()
                && !roles[c.0].is_indicator()
                && !options.allow_indicator_parents
            {
                return Err(GraphError::RoleViolation(format!(
                    "edge {} -> {} leaves a missingness indicator",
                    names[p.0], names[c.0]
                )));
            }
        }

        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(p, c) in &edges {
            parents[c.0].push(p);
            children[p.0].push(c);
        }
        for list in parents.iter_mut().chain(children.iter_mut()) {
            list.sort_unstable();
        }

        let order = kahn_order(&parents, &children).map_err(|stuck| {
            GraphError::CycleDetected(
                find_cycle(&parents, &stuck)
                    .into_iter()
                    .map(|id| names[id.0].clone())
                    .collect(),
            )
        })?;

        Ok(MGraph {
            names,
            roles,
            index,
            edges,
            parents,
            children,
            indicator,
            order,
            options,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn options(&self) -> GraphOptions {
        self.options
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.names.len()).map(NodeId)
    }

    pub fn id(&self, name: &str) -> Result<NodeId, GraphError> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn ids<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<NodeId>, GraphError> {
        names.iter().map(|n| self.id(n.as_ref())).collect()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn role(&self, id: NodeId) -> &NodeRole {
        &self.roles[id.0]
    }

    pub fn parents(&self, id: NodeId) -> &[NodeId] {
        &self.parents[id.0]
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.children[id.0]
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn has_edge(&self, parent: NodeId, child: NodeId) -> bool {
        self.edges.contains(&(parent, child))
    }

    /// Missingness indicator of a partially observed node, if declared.
    pub fn indicator_of(&self, id: NodeId) -> Option<NodeId> {
        self.indicator[id.0]
    }

    /// Partially observed variable an indicator node refers to.
    pub fn indicated_by(&self, id: NodeId) -> Option<NodeId> {
        match &self.roles[id.0] {
            NodeRole::MissIndicator(of) => self.index.get(of).copied(),
            _ => None,
        }
    }

    pub fn nodes_with<F: Fn(&NodeRole) -> bool>(&self, pred: F) -> Vec<NodeId> {
        self.node_ids().filter(|&i| pred(&self.roles[i.0])).collect()
    }

    /// Topological order; ties resolved by declaration order.
    pub fn topological_order(&self) -> &[NodeId] {
        &self.order
    }

    /// Proper ancestors of `id`.
    pub fn ancestors(&self, id: NodeId) -> BTreeSet<NodeId> {
        closure(&self.parents, &[id], false)
    }

    /// Proper descendants of `id`.
    pub fn descendants(&self, id: NodeId) -> BTreeSet<NodeId> {
        closure(&self.children, &[id], false)
    }

    /// Union of `ids` and all their ancestors.
    pub fn ancestral_set(&self, ids: &[NodeId]) -> BTreeSet<NodeId> {
        closure(&self.parents, ids, true)
    }

    pub fn ancestors_of(&self, name: &str) -> Result<BTreeSet<NodeId>, GraphError> {
        Ok(self.ancestors(self.id(name)?))
    }

    pub fn descendants_of(&self, name: &str) -> Result<BTreeSet<NodeId>, GraphError> {
        Ok(self.descendants(self.id(name)?))
    }

    /// Would adding `parent -> child` close a directed cycle?
    pub fn creates_cycle(&self, parent: NodeId, child: NodeId) -> bool {
        parent == child || self.descendants(child).contains(&parent)
    }

    /// Names of a node set, sorted by declaration order.
    pub fn names_of<'a, I: IntoIterator<Item = &'a NodeId>>(&self, ids: I) -> Vec<String> {
        let mut v: Vec<NodeId> = ids.into_iter().copied().collect();
        v.sort_unstable();
        v.into_iter().map(|i| self.names[i.0].clone()).collect()
    }
}

fn closure(adj: &[Vec<NodeId>], start: &[NodeId], include_start: bool) -> BTreeSet<NodeId> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<NodeId> = Vec::new();
    for &s in start {
        if include_start {
            seen.insert(s);
        }
        stack.extend(adj[s.0].iter().copied());
    }
    while let Some(v) = stack.pop() {
        if seen.insert(v) {
            stack.extend(adj[v.0].iter().copied());
        }
    }
    seen
}

/// Kahn's algorithm with a min-heap so ties fall back to declaration order.
/// On failure returns the nodes that could not be ordered.
fn kahn_order(parents: &[Vec<NodeId>], children: &[Vec<NodeId>]) -> Result<Vec<NodeId>, Vec<NodeId>> {
    let n = parents.len();
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indeg[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(NodeId(v));
        for &c in &children[v] {
            indeg[c.0] -= 1;
            if indeg[c.0] == 0 {
                ready.push(Reverse(c.0));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&i| indeg[i] > 0).map(NodeId).collect())
    }
}

/// Walks parent links inside the unordered remainder until a node repeats.
fn find_cycle(parents: &[Vec<NodeId>], stuck: &[NodeId]) -> Vec<NodeId> {
    let in_stuck: BTreeSet<NodeId> = stuck.iter().copied().collect();
    let mut path = vec![stuck[0]];
    let mut pos: HashMap<NodeId, usize> = HashMap::from([(stuck[0], 0)]);
    loop {
        let cur = *path.last().unwrap();
        // every stuck node keeps at least one stuck parent
        let next = *parents[cur.0]
            .iter()
            .find(|p| in_stuck.contains(p))
            .expect("stuck node has a stuck parent");
        if let Some(&at) = pos.get(&next) {
            let mut cycle: Vec<NodeId> = path[at..].to_vec();
            cycle.reverse();
            cycle.push(cycle[0]);
            return cycle;
        }
        pos.insert(next, path.len());
        path.push(next);
    }
}
