#![allow(dead_code)]

use causalnet::graph::NodeId;
use causalnet::model::{CausalNetwork, Cpt};
use causalnet::{Dataset, MGraph, NodeRole, Schema, Variable};
use causalnet_testkit::{Dag, Tables};

pub fn name(v: usize) -> String {
    format!("V{v}")
}

pub fn to_mgraph(g: &Dag) -> MGraph {
    let nodes = (0..g.n).map(|v| (name(v), NodeRole::Observed)).collect();
    let edges: Vec<(String, String)> = g.edges().into_iter().map(|(p, c)| (name(p), name(c))).collect();
    MGraph::new(nodes, &edges).expect("random DAG is valid")
}

pub fn ids(vs: &[usize]) -> Vec<NodeId> {
    vs.iter().map(|&v| NodeId(v)).collect()
}

pub fn to_network(t: &Tables) -> CausalNetwork<f64> {
    let g = to_mgraph(&t.dag);
    let levels = t.cards.iter().map(|&k| (0..k).map(|l| l.to_string()).collect()).collect();
    let cpts = (0..t.dag.n)
        .map(|v| {
            let ps = &t.dag.parents[v];
            Cpt::new(
                NodeId(v),
                t.cards[v],
                ids(ps),
                ps.iter().map(|&p| t.cards[p]).collect(),
                t.tables[v].clone(),
            )
            .expect("random table is valid")
        })
        .collect();
    CausalNetwork::new(g, levels, cpts).expect("network assembles")
}

pub fn rows_to_dataset(cards: &[usize], rows: &[Vec<usize>]) -> Dataset {
    let schema = Schema::new(
        cards
            .iter()
            .enumerate()
            .map(|(v, &k)| Variable::new(name(v), (0..k).map(|l| l.to_string())))
            .collect(),
    )
    .unwrap();
    let cols = (0..cards.len()).map(|v| rows.iter().map(|r| Some(r[v])).collect()).collect();
    Dataset::new(schema, cols).unwrap()
}
