//! Evaluation metrics, the two-cohort simulator and the model benchmark.

use thiserror::Error;

use crate::data::DataError;
use crate::discovery::DiscoveryError;
use crate::graph::GraphError;
use crate::model::ModelError;

mod benchmark;
mod cardio;
mod metrics;
mod simulate;

pub use benchmark::{
    benchmark, naive_bayes, render_key_values, render_table, BenchmarkConfig, BenchmarkReport, ModelScore,
    NAIVE_BAYES, PRIOR_ONLY, PRIOR_SEM,
};
pub use cardio::{default_prior, default_sim_config, default_truth, sim_preset, CARDIO_GRAPH, CARDIO_TRUTH};
pub use metrics::{auc, shd};
pub use simulate::{simulate_cohorts, SimConfig};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("{labels} labels but {scores} scores")]
    LengthMismatch { labels: usize, scores: usize },
    #[error("AUC needs at least one positive and one negative label")]
    DegenerateLabels,
    #[error("graphs have different node sets")]
    NodeSetMismatch,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Discovery(#[from] DiscoveryError),
}
