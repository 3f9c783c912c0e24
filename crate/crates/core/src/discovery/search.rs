use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::graph::{MGraph, NodeId, PriorKnowledge};
use crate::Real;

use super::score::{FamilyScorer, ScoreCache, ScoreValue};
use super::{DiscoveryError, SemConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult<T> {
    pub graph: MGraph,
    pub score: ScoreValue<T>,
    /// Accepted moves, summed over restarts that improved the result.
    pub moves: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Kind {
    Add,
    Delete,
    Reverse,
}

#[derive(Debug, Clone, Copy)]
struct Move {
    kind: Kind,
    parent: NodeId,
    child: NodeId,
}

/// Greedy hill climbing from the prior graph of `pk`.
pub fn hill_climb<T: Real>(d: &Dataset, pk: &PriorKnowledge, cfg: &SemConfig) -> Result<SearchResult<T>, DiscoveryError> {
    hill_climb_from(d, pk, cfg, pk.graph())
}

/// Greedy hill climbing over single-edge additions, deletions and reversals.
///
/// Prior edges are never touched, forbidden edges never appear, and the
/// acyclicity and role rules of `pk` hold at every step. Each step applies
/// the move with the largest strictly positive score gain; equal gains go to
/// additions, then deletions, then reversals, then the lexicographically
/// smallest `(parent, child)` name pair. Additions that would give a node
/// more than `max_parents` parents are skipped.
pub fn hill_climb_from<T: Real>(
    d: &Dataset,
    pk: &PriorKnowledge,
    cfg: &SemConfig,
    start: &MGraph,
) -> Result<SearchResult<T>, DiscoveryError> {
    cfg.validate()?;
    pk.check(start)?;
    let scorer = FamilyScorer::new(start, d, cfg.alpha)?;
    let mut cache = ScoreCache::new();
    let mut best = climb(start, pk, cfg, &scorer, &mut cache);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.restarts {
        let kicked = perturb(&best.graph, pk, cfg, &mut rng);
        let candidate = climb(&kicked, pk, cfg, &scorer, &mut cache);
        if candidate.score.total > best.score.total + tolerance(best.score.total) {
            best = SearchResult {
                moves: best.moves + candidate.moves,
                ..candidate
            };
        }
    }
    Ok(best)
}

fn tolerance<T: Real>(total: T) -> T {
    T::epsilon().sqrt() * total.abs().max(T::one())
}

struct State {
    parents: Vec<Vec<NodeId>>,
}

impl State {
    fn of(g: &MGraph) -> Self {
        State {
            parents: g.node_ids().map(|v| g.parents(v).to_vec()).collect(),
        }
    }

    fn has(&self, p: NodeId, c: NodeId) -> bool {
        self.parents[c.0].contains(&p)
    }

    fn with(&self, c: NodeId, p: NodeId) -> Vec<NodeId> {
        let mut ps = self.parents[c.0].clone();
        ps.push(p);
        ps.sort();
        ps
    }

    fn without(&self, c: NodeId, p: NodeId) -> Vec<NodeId> {
        self.parents[c.0].iter().copied().filter(|&q| q != p).collect()
    }

    fn apply(&mut self, m: Move) {
        match m.kind {
            Kind::Add => self.parents[m.child.0] = self.with(m.child, m.parent),
            Kind::Delete => self.parents[m.child.0] = self.without(m.child, m.parent),
            Kind::Reverse => {
                self.parents[m.child.0] = self.without(m.child, m.parent);
                self.parents[m.parent.0] = self.with(m.parent, m.child);
            }
        }
    }

    /// `reach[u][v]`: a directed path of length ≥ 1 leads from `u` to `v`.
    fn reachability(&self) -> Vec<Vec<bool>> {
        let n = self.parents.len();
        let mut children = vec![Vec::new(); n];
        for (c, ps) in self.parents.iter().enumerate() {
            for p in ps {
                children[p.0].push(c);
            }
        }
        (0..n)
            .map(|s| {
                let mut seen = vec![false; n];
                let mut stack = children[s].clone();
                while let Some(v) = stack.pop() {
                    if !seen[v] {
                        seen[v] = true;
                        stack.extend(&children[v]);
                    }
                }
                seen
            })
            .collect()
    }

    fn into_graph(self, template: &MGraph) -> MGraph {
        let edges = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(c, ps)| ps.iter().map(move |&p| (p, NodeId(c))));
        template.with_edges(edges).expect("search preserves acyclicity")
    }
}

fn legal_moves(g: &MGraph, state: &State, pk: &PriorKnowledge, max_parents: usize) -> Vec<Move> {
    let reach = state.reachability();
    let mut moves = Vec::new();
    for u in g.node_ids() {
        for v in g.node_ids() {
            if u == v {
                continue;
            }
            if state.has(u, v) {
                if pk.is_frozen((u, v)) {
                    continue;
                }
                moves.push(Move { kind: Kind::Delete, parent: u, child: v });
                // reversing is acyclic iff no other path leads from u to v
                let detour = state.parents.iter().enumerate().any(|(c, ps)| {
                    c != v.0 && ps.contains(&u) && reach[c][v.0]
                });
                if !detour && pk.allows(v, u) && state.parents[u.0].len() < max_parents {
                    moves.push(Move { kind: Kind::Reverse, parent: u, child: v });
                }
            } else if !state.has(v, u)
                && pk.allows(u, v)
                && state.parents[v.0].len() < max_parents
                && !reach[v.0][u.0]
            {
                moves.push(Move { kind: Kind::Add, parent: u, child: v });
            }
        }
    }
    moves.sort_by(|a, b| {
        a.kind
            .cmp(&b.kind)
            .then_with(|| g.name(a.parent).cmp(g.name(b.parent)))
            .then_with(|| g.name(a.child).cmp(g.name(b.child)))
    });
    moves
}

fn climb<T: Real>(
    start: &MGraph,
    pk: &PriorKnowledge,
    cfg: &SemConfig,
    scorer: &FamilyScorer<'_>,
    cache: &mut ScoreCache<T>,
) -> SearchResult<T> {
    let mut state = State::of(start);
    cache.fill(
        scorer,
        start.node_ids().map(|v| (v, state.parents[v.0].clone())).collect(),
    );
    let mut locals: Vec<T> = start.node_ids().map(|v| cache.get(v, &state.parents[v.0])).collect();
    let mut moves_done = 0;
    loop {
        let moves = legal_moves(start, &state, pk, cfg.max_parents);
        let mut needed = Vec::with_capacity(moves.len() * 2);
        for m in &moves {
            match m.kind {
                Kind::Add => needed.push((m.child, state.with(m.child, m.parent))),
                Kind::Delete => needed.push((m.child, state.without(m.child, m.parent))),
                Kind::Reverse => {
                    needed.push((m.child, state.without(m.child, m.parent)));
                    needed.push((m.parent, state.with(m.parent, m.child)));
                }
            }
        }
        cache.fill(scorer, needed);

        let total: T = locals.iter().copied().sum();
        let threshold = tolerance(total);
        let mut chosen: Option<(Move, T)> = None;
        for &m in &moves {
            let gain = match m.kind {
                Kind::Add => cache.get(m.child, &state.with(m.child, m.parent)) - locals[m.child.0],
                Kind::Delete => cache.get(m.child, &state.without(m.child, m.parent)) - locals[m.child.0],
                Kind::Reverse => {
                    cache.get(m.child, &state.without(m.child, m.parent)) - locals[m.child.0]
                        + cache.get(m.parent, &state.with(m.parent, m.child))
                        - locals[m.parent.0]
                }
            };
            let better = match &chosen {
                None => gain > threshold,
                Some((_, g)) => gain.partial_cmp(g) == Some(Ordering::Greater),
            };
            if better {
                chosen = Some((m, gain));
            }
        }
        let Some((m, _)) = chosen else { break };
        state.apply(m);
        for v in [m.child, m.parent] {
            locals[v.0] = cache.get(v, &state.parents[v.0]);
        }
        moves_done += 1;
    }
    let total = locals.iter().copied().sum();
    SearchResult {
        graph: state.into_graph(start),
        score: ScoreValue { total, locals },
        moves: moves_done,
    }
}

/// A few random legal moves away from `g`.
fn perturb(g: &MGraph, pk: &PriorKnowledge, cfg: &SemConfig, rng: &mut ChaCha8Rng) -> MGraph {
    let mut state = State::of(g);
    let steps = (g.len() / 4).max(1);
    for _ in 0..steps {
        let moves = legal_moves(g, &state, pk, cfg.max_parents);
        match moves.choose(rng) {
            Some(&m) => state.apply(m),
            None => break,
        }
    }
    state.into_graph(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Schema, Variable};
    use crate::graph::NodeRole;
    use crate::model::{sample, CausalNetwork, Cpt};

    fn truth() -> CausalNetwork<f64> {
        let g = MGraph::new(
            vec![
                ("A".into(), NodeRole::Observed),
                ("B".into(), NodeRole::Observed),
                ("C".into(), NodeRole::Observed),
            ],
            &[("A", "B"), ("B", "C")],
        )
        .unwrap();
        let bin = || vec!["0".to_string(), "1".to_string()];
        CausalNetwork::new(
            g,
            vec![bin(), bin(), bin()],
            vec![
                Cpt::root(NodeId(0), vec![0.5, 0.5]).unwrap(),
                Cpt::new(NodeId(1), 2, vec![NodeId(0)], vec![2], vec![0.9, 0.1, 0.1, 0.9]).unwrap(),
                Cpt::new(NodeId(2), 2, vec![NodeId(1)], vec![2], vec![0.85, 0.15, 0.2, 0.8]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn empty_prior(g: &MGraph) -> PriorKnowledge {
        PriorKnowledge::unconstrained(&g.with_edges([]).unwrap())
    }

    #[test]
    fn recovers_skeleton() {
        let t = truth();
        let d = sample(&t, 3000, 1);
        let r: SearchResult<f64> = hill_climb(&d, &empty_prior(t.graph()), &SemConfig::default()).unwrap();
        let skel = |g: &MGraph| {
            let mut s: Vec<(usize, usize)> = g.edges().iter().map(|&(a, b)| (a.0.min(b.0), a.0.max(b.0))).collect();
            s.sort();
            s
        };
        assert_eq!(skel(&r.graph), vec![(0, 1), (1, 2)]);
        let direct: super::super::ScoreValue<f64> = super::super::bic(&r.graph, &d, 1.0).unwrap();
        assert!((direct.total - r.score.total).abs() < 1e-9);
    }

    #[test]
    fn constraints_are_respected() {
        let t = truth();
        let d = sample(&t, 2000, 2);
        let g0 = t.graph().with_edges([(NodeId(0), NodeId(2))]).unwrap();
        let pk = PriorKnowledge::new(g0, [(NodeId(0), NodeId(1)), (NodeId(1), NodeId(0))]).unwrap();
        let cfg = SemConfig {
            max_parents: 1,
            restarts: 2,
            ..SemConfig::default()
        };
        let r: SearchResult<f64> = hill_climb(&d, &pk, &cfg).unwrap();
        assert!(r.graph.has_edge(NodeId(0), NodeId(2)));
        assert!(!r.graph.has_edge(NodeId(0), NodeId(1)) && !r.graph.has_edge(NodeId(1), NodeId(0)));
        assert!(r.graph.node_ids().all(|v| r.graph.parents(v).len() <= 1));
    }

    #[test]
    fn deterministic() {
        let t = truth();
        let d = sample(&t, 500, 3);
        let cfg = SemConfig {
            restarts: 3,
            seed: 11,
            ..SemConfig::default()
        };
        let pk = empty_prior(t.graph());
        let a: SearchResult<f64> = hill_climb(&d, &pk, &cfg).unwrap();
        let b: SearchResult<f64> = hill_climb(&d, &pk, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn indicators_never_gain_parents() {
        let g = MGraph::new(
            vec![
                ("X".into(), NodeRole::PartiallyObserved),
                ("Y".into(), NodeRole::Observed),
                ("R_X".into(), NodeRole::MissIndicator("X".into())),
            ],
            &[] as &[(&str, &str)],
        )
        .unwrap();
        let s = Schema::new(vec![
            Variable::new("X", ["0", "1"]),
            Variable::new("Y", ["0", "1"]),
            Variable::indicator("R_X"),
        ])
        .unwrap();
        let y: Vec<Option<usize>> = (0..200).map(|i| Some(i % 2)).collect();
        let d = Dataset::new(s, vec![y.clone(), y.clone(), y]).unwrap();
        let r: SearchResult<f64> = hill_climb(&d, &PriorKnowledge::unconstrained(&g), &SemConfig::default()).unwrap();
        assert!(r.graph.parents(NodeId(2)).is_empty());
        assert!(r.graph.children(NodeId(2)).is_empty());
    }
}
