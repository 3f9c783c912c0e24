//! The shipped cardio-oncology example: a clinical prior graph and a
//! synthetic ground-truth network used by the default simulator.

use std::collections::BTreeMap;

use crate::graph::{parse_graph, GraphOptions, PriorKnowledge};
use crate::model::{parse_network, CausalNetwork};
use crate::Real;

use super::{EvalError, SimConfig};

pub const CARDIO_GRAPH: &str = include_str!("../../examples/cardio.graph");
pub const CARDIO_TRUTH: &str = include_str!("../../examples/cardio_truth.network");

pub fn default_truth<T: Real>() -> CausalNetwork<T> {
    parse_network(CARDIO_TRUTH, GraphOptions::default()).expect("shipped truth network parses")
}

/// Prior graph with its frozen edges and forbidden list.
pub fn default_prior() -> PriorKnowledge {
    let file = parse_graph(CARDIO_GRAPH, GraphOptions::default()).expect("shipped prior graph parses");
    PriorKnowledge::from_names(file.graph, &file.forbidden).expect("shipped prior is consistent")
}

/// 1500 population-based and 340 clinical-cohort rows; masking follows the
/// truth network's indicators.
pub fn default_sim_config<T: Real>(seed: u64) -> SimConfig<T> {
    SimConfig {
        truth: default_truth(),
        cohort: "cohort".into(),
        sizes: [("PBC".to_string(), 1500), ("CBC".to_string(), 340)].into_iter().collect(),
        observed_overrides: BTreeMap::new(),
        seed,
    }
}

/// Resolves a named simulator preset.
pub fn sim_preset<T: Real>(name: &str, seed: u64) -> Result<SimConfig<T>, EvalError> {
    match name {
        "default" => Ok(default_sim_config(seed)),
        other => Err(EvalError::InvalidConfig(format!("unknown simulator preset `{other}`"))),
    }
}
