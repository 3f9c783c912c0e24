//! Brute-force reference implementations used as test oracles.
//!
//! Nothing here depends on the library under test. Graphs are plain
//! adjacency data over nodes `0..n`, distributions are dense tables, and
//! every algorithm is the slow textbook definition.

use rand::seq::SliceRandom;
use rand::Rng;

/// A DAG as `n` nodes plus parent lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    pub n: usize,
    pub parents: Vec<Vec<usize>>,
}

impl Dag {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Dag {
        let mut parents = vec![Vec::new(); n];
        for &(p, c) in edges {
            parents[c].push(p);
        }
        for ps in &mut parents {
            ps.sort_unstable();
            ps.dedup();
        }
        Dag { n, parents }
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = (0..self.n)
            .flat_map(|c| self.parents[c].iter().map(move |&p| (p, c)))
            .collect();
        e.sort_unstable();
        e
    }

    pub fn has_edge(&self, p: usize, c: usize) -> bool {
        self.parents[c].contains(&p)
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&c| self.has_edge(v, c)).collect()
    }

    /// Descendants of `v`, including `v`.
    pub fn descendants(&self, v: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if !seen[u] {
                seen[u] = true;
                stack.extend(self.children(u));
            }
        }
        seen
    }

    pub fn is_acyclic(&self) -> bool {
        topological_order(self).is_some()
    }

    /// Same graph with the edges leaving `v` removed.
    pub fn without_out_edges(&self, v: usize) -> Dag {
        let edges: Vec<_> = self.edges().into_iter().filter(|&(p, _)| p != v).collect();
        Dag::from_edges(self.n, &edges)
    }
}

pub fn topological_order(g: &Dag) -> Option<Vec<usize>> {
    let mut indeg: Vec<usize> = g.parents.iter().map(Vec::len).collect();
    let mut ready: Vec<usize> = (0..g.n).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(g.n);
    while let Some(v) = ready.pop() {
        order.push(v);
        for c in g.children(v) {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.push(c);
            }
        }
    }
    (order.len() == g.n).then_some(order)
}

/// Random DAG: each pair is joined with probability `p`, oriented along a
/// random permutation.
pub fn random_dag<R: Rng>(rng: &mut R, n: usize, p: f64) -> Dag {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(p) {
                edges.push((perm[i], perm[j]));
            }
        }
    }
    Dag::from_edges(n, &edges)
}

/// All DAGs on `n` labelled nodes (25 for n = 3, 543 for n = 4).
pub fn all_dags(n: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut out = Vec::new();
    // each unordered pair: absent, i->j or j->i
    let total = 3usize.pow(pairs.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut edges = Vec::new();
        for &(i, j) in &pairs {
            match c % 3 {
                1 => edges.push((i, j)),
                2 => edges.push((j, i)),
                _ => {}
            }
            c /= 3;
        }
        let g = Dag::from_edges(n, &edges);
        if g.is_acyclic() {
            out.push(g);
        }
    }
    out
}

/// d-separation by enumerating every simple path of the skeleton between
/// `x` and `y`. A path is open when each non-collider on it is outside `z`
/// and each collider is in `z` or has a descendant in `z`.
pub fn d_separated_by_paths(g: &Dag, x: &[usize], y: &[usize], z: &[usize]) -> bool {
    let in_z: Vec<bool> = (0..g.n).map(|v| z.contains(&v)).collect();
    let opens_collider: Vec<bool> = (0..g.n).map(|v| g.descendants(v).iter().zip(&in_z).any(|(d, z)| *d && *z)).collect();
    let neighbours: Vec<Vec<usize>> = (0..g.n)
        .map(|v| {
            let mut nb = g.parents[v].clone();
            nb.extend(g.children(v));
            nb
        })
        .collect();

    fn walk(
        g: &Dag,
        nb: &[Vec<usize>],
        in_z: &[bool],
        opens: &[bool],
        path: &mut Vec<usize>,
        targets: &[usize],
    ) -> bool {
        let last = *path.last().unwrap();
        if path.len() > 1 && targets.contains(&last) {
            return path_open(g, path, in_z, opens);
        }
        for &next in &nb[last] {
            if path.contains(&next) {
                continue;
            }
            path.push(next);
            let found = walk(g, nb, in_z, opens, path, targets);
            path.pop();
            if found {
                return true;
            }
        }
        false
    }

    for &s in x {
        let mut path = vec![s];
        if walk(g, &neighbours, &in_z, &opens_collider, &mut path, y) {
            return false;
        }
    }
    true
}

fn path_open(g: &Dag, path: &[usize], in_z: &[bool], opens: &[bool]) -> bool {
    for k in 1..path.len() - 1 {
        let (a, b, c) = (path[k - 1], path[k], path[k + 1]);
        let collider = g.has_edge(a, b) && g.has_edge(c, b);
        if collider && !opens[b] {
            return false;
        }
        if !collider && in_z[b] {
            return false;
        }
    }
    true
}

/// Back-door criterion by definition: nothing in `z` descends from `x`,
/// and `z` blocks every path from `x` to `y` that starts with an arrow into
/// `x` (checked as d-separation once the edges out of `x` are removed).
pub fn is_backdoor_by_definition(g: &Dag, z: &[usize], x: usize, y: usize) -> bool {
    let de = g.descendants(x);
    if z.iter().any(|&v| de[v]) {
        return false;
    }
    d_separated_by_paths(&g.without_out_edges(x), &[x], &[y], z)
}

/// Every subset of `pool`, smallest first.
pub fn subsets_by_size(pool: &[usize]) -> Vec<Vec<usize>> {
    let mut all: Vec<Vec<usize>> = (0..1u64 << pool.len())
        .map(|mask| (0..pool.len()).filter(|&i| mask >> i & 1 == 1).map(|i| pool[i]).collect())
        .collect();
    all.sort_by_key(Vec::len);
    all
}

/// A discrete Bayesian network as dense tables. `tables[v]` lists
/// `P(v | parents[v])` with parent configurations in mixed radix, the last
/// parent fastest, and the child level fastest within a configuration.
#[derive(Debug, Clone)]
pub struct Tables {
    pub dag: Dag,
    pub cards: Vec<usize>,
    pub tables: Vec<Vec<f64>>,
}

impl Tables {
    pub fn prob(&self, v: usize, assignment: &[usize]) -> f64 {
        let mut cfg = 0;
        for &p in &self.dag.parents[v] {
            cfg = cfg * self.cards[p] + assignment[p];
        }
        self.tables[v][cfg * self.cards[v] + assignment[v]]
    }

    /// Full joint over all nodes, indexed mixed radix with node 0 slowest.
    pub fn joint(&self) -> Vec<f64> {
        let total: usize = self.cards.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut a = vec![0; self.dag.n];
        for flat in 0..total {
            decode(flat, &self.cards, &mut a);
            out.push((0..self.dag.n).map(|v| self.prob(v, &a)).product());
        }
        out
    }

    /// `P(query | evidence)` by summing the full joint, indexed mixed radix
    /// over `query` in the given order. `None` when the evidence has
    /// probability zero.
    pub fn conditional(&self, query: &[usize], evidence: &[(usize, usize)]) -> Option<Vec<f64>> {
        let size: usize = query.iter().map(|&q| self.cards[q]).product();
        let mut out = vec![0.0; size];
        let mut a = vec![0; self.dag.n];
        for (flat, p) in self.joint().into_iter().enumerate() {
            decode(flat, &self.cards, &mut a);
            if evidence.iter().any(|&(v, l)| a[v] != l) {
                continue;
            }
            let idx = query.iter().fold(0, |acc, &q| acc * self.cards[q] + a[q]);
            out[idx] += p;
        }
        let z: f64 = out.iter().sum();
        if z <= 0.0 {
            return None;
        }
        Some(out.into_iter().map(|v| v / z).collect())
    }

    /// The network after `do(x = level)`: the parents of `x` are dropped and
    /// its table becomes a point mass.
    pub fn mutilated(&self, x: usize, level: usize) -> Tables {
        let mut dag = self.dag.clone();
        dag.parents[x].clear();
        let mut tables = self.tables.clone();
        tables[x] = (0..self.cards[x]).map(|l| if l == level { 1.0 } else { 0.0 }).collect();
        Tables {
            dag,
            cards: self.cards.clone(),
            tables,
        }
    }
}

fn decode(mut flat: usize, cards: &[usize], out: &mut [usize]) {
    for v in (0..cards.len()).rev() {
        out[v] = flat % cards[v];
        flat /= cards[v];
    }
}

/// Random strictly positive tables for `dag` with the given cardinalities.
pub fn random_tables<R: Rng>(rng: &mut R, dag: &Dag, cards: &[usize]) -> Tables {
    let tables = (0..dag.n)
        .map(|v| {
            let configs: usize = dag.parents[v].iter().map(|&p| cards[p]).product();
            let mut t = Vec::with_capacity(configs * cards[v]);
            for _ in 0..configs {
                let row: Vec<f64> = (0..cards[v]).map(|_| rng.gen_range(0.05..1.0)).collect();
                let s: f64 = row.iter().sum();
                t.extend(row.into_iter().map(|p| p / s));
            }
            t
        })
        .collect();
    Tables {
        dag: dag.clone(),
        cards: cards.to_vec(),
        tables,
    }
}

/// AUC by counting every (positive, negative) pair: wins score 1, ties ½.
pub fn auc_by_pairs(labels: &[bool], scores: &[f64]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &li) in labels.iter().enumerate() {
        if !li {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj {
                continue;
            }
            pairs += 1.0;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// BIC of a complete discrete dataset under `dag`: per family the smoothed
/// log-likelihood `Σ n·ln((n + α)/(N + kα))` minus `½·ln(n_rows)` per free
/// parameter.
pub fn bic_by_counting(dag: &Dag, cards: &[usize], rows: &[Vec<usize>], alpha: f64) -> f64 {
    let n = rows.len() as f64;
    let mut total = 0.0;
    for v in 0..dag.n {
        let ps = &dag.parents[v];
        let configs: usize = ps.iter().map(|&p| cards[p]).product();
        let mut counts = vec![0.0; configs * cards[v]];
        for r in rows {
            let cfg = ps.iter().fold(0, |acc, &p| acc * cards[p] + r[p]);
            counts[cfg * cards[v] + r[v]] += 1.0;
        }
        for row in counts.chunks(cards[v]) {
            let denom: f64 = row.iter().sum::<f64>() + alpha * cards[v] as f64;
            for &c in row {
                if c > 0.0 {
                    total += c * ((c + alpha) / denom).ln();
                }
            }
        }
        total -= 0.5 * n.ln() * ((cards[v] - 1) * configs) as f64;
    }
    total
}

/// Draws `n` complete rows from `t` by ancestral sampling.
pub fn sample_rows<R: Rng>(rng: &mut R, t: &Tables, n: usize) -> Vec<Vec<usize>> {
    let order = topological_order(&t.dag).expect("acyclic");
    (0..n)
        .map(|_| {
            let mut a = vec![0; t.dag.n];
            for &v in &order {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                a[v] = t.cards[v] - 1;
                for l in 0..t.cards[v] {
                    a[v] = l;
                    acc += t.prob(v, &a);
                    if u < acc {
                        break;
                    }
                }
            }
            a
        })
        .collect()
}
