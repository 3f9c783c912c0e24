use std::collections::BTreeSet;

use super::{GraphError, MGraph, NodeId};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    /// Arrived from a child (travelling against the edge).
    Up,
    /// Arrived from a parent (travelling along the edge).
    Down,
}

impl MGraph {
    /// Is every path between `x` and `y` blocked by `z`?
    ///
    /// A non-collider blocks a path when it is in `z`; a collider blocks it
    /// when neither it nor any of its descendants is in `z`.
    pub fn d_separated<S: AsRef<str>>(&self, x: &[S], y: &[S], z: &[S]) -> Result<bool, GraphError> {
        let (x, y, z) = (self.ids(x)?, self.ids(y)?, self.ids(z)?);
        check_disjoint(self, &x, &y, &z)?;
        Ok(self.d_separated_ids(&x, &y, &z))
    }

    /// Id-based d-separation; the sets are assumed disjoint.
    pub fn d_separated_ids(&self, x: &[NodeId], y: &[NodeId], z: &[NodeId]) -> bool {
        let reach = self.reachable(x, z, None);
        !y.iter().any(|v| reach.contains(v))
    }

    /// Like [`MGraph::d_separated_ids`] on the graph with the outgoing edges
    /// of `cut` removed.
    pub(crate) fn d_separated_without_out_edges(
        &self,
        cut: NodeId,
        x: &[NodeId],
        y: &[NodeId],
        z: &[NodeId],
    ) -> bool {
        let reach = self.reachable(x, z, Some(cut));
        !y.iter().any(|v| reach.contains(v))
    }

    /// Nodes d-connected to `sources` given `z` (reachability over active trails).
    fn reachable(&self, sources: &[NodeId], z: &[NodeId], cut: Option<NodeId>) -> BTreeSet<NodeId> {
        let n = self.len();
        let in_z = membership(n, z);
        // nodes with a descendant in z, including z itself
        let mut anc_z = vec![false; n];
        let mut stack: Vec<NodeId> = z.to_vec();
        while let Some(v) = stack.pop() {
            if !anc_z[v.0] {
                anc_z[v.0] = true;
                for &p in self.parents(v) {
                    if cut != Some(p) {
                        stack.push(p);
                    }
                }
            }
        }

        let parents_of = |v: NodeId| {
            self.parents(v)
                .iter()
                .copied()
                .filter(move |&p| cut != Some(p))
        };
        let children_of = |v: NodeId| {
            let out: &[NodeId] = if cut == Some(v) { &[] } else { self.children(v) };
            out.iter().copied()
        };

        let mut visited = vec![[false; 2]; n];
        let mut reached = BTreeSet::new();
        let mut queue: Vec<(NodeId, Dir)> = sources.iter().map(|&s| (s, Dir::Up)).collect();
        while let Some((v, dir)) = queue.pop() {
            let slot = dir as usize;
            if visited[v.0][slot] {
                continue;
            }
            visited[v.0][slot] = true;
            if !in_z[v.0] {
                reached.insert(v);
            }
            match dir {
                Dir::Up if !in_z[v.0] => {
                    queue.extend(parents_of(v).map(|p| (p, Dir::Up)));
                    queue.extend(children_of(v).map(|c| (c, Dir::Down)));
                }
                Dir::Up => {}
                Dir::Down => {
                    if !in_z[v.0] {
                        queue.extend(children_of(v).map(|c| (c, Dir::Down)));
                    }
                    if anc_z[v.0] {
                        queue.extend(parents_of(v).map(|p| (p, Dir::Up)));
                    }
                }
            }
        }
        reached
    }
}

fn membership(n: usize, set: &[NodeId]) -> Vec<bool> {
    let mut m = vec![false; n];
    for v in set {
        m[v.0] = true;
    }
    m
}

pub(crate) fn check_disjoint(
    g: &MGraph,
    x: &[NodeId],
    y: &[NodeId],
    z: &[NodeId],
) -> Result<(), GraphError> {
    let mut seen = BTreeSet::new();
    for v in x.iter().chain(y).chain(z) {
        if !seen.insert(*v) {
            return Err(GraphError::OverlappingSets(g.name(*v).to_string()));
        }
    }
    Ok(())
}
