//! Score-based structure learning: BIC, constrained hill climbing and
//! hard-imputation Structural EM.

use thiserror::Error;

use crate::data::DataError;
use crate::graph::GraphError;
use crate::model::ModelError;

mod impute;
mod score;
mod search;
mod sem;

pub use impute::{impute_mode, Imputation};
pub use score::{bic, ScoreValue};
pub use search::{hill_climb, hill_climb_from, SearchResult};
pub use sem::{sem, SemIteration, SemTrace};

#[derive(Debug, Error)]
pub enum DiscoveryError {
    #[error("column `{0}` has missing cells; scoring needs complete data")]
    IncompleteData(String),
    #[error("dataset has no rows with positive weight")]
    EmptyDataset,
    #[error("latent node `{0}` cannot be scored")]
    UnsupportedLatent(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Settings shared by hill climbing and Structural EM.
#[derive(Debug, Clone, PartialEq)]
pub struct SemConfig {
    pub max_iterations: usize,
    /// Stop once the relative BIC gain of an iteration falls below this.
    pub tolerance: f64,
    pub max_parents: usize,
    /// Pseudo-count added to every CPT cell.
    pub alpha: f64,
    pub seed: u64,
    /// Perturbed restarts of each hill climb.
    pub restarts: usize,
    /// Keep the prior graph and only re-estimate parameters.
    pub fixed_structure: bool,
}

impl Default for SemConfig {
    fn default() -> Self {
        SemConfig {
            max_iterations: 20,
            tolerance: 1e-6,
            max_parents: 5,
            alpha: 1.0,
            seed: 0,
            restarts: 0,
            fixed_structure: false,
        }
    }
}

impl SemConfig {
    pub(crate) fn validate(&self) -> Result<(), DiscoveryError> {
        if self.max_iterations == 0 {
            return Err(DiscoveryError::InvalidConfig("max_iterations must be positive".into()));
        }
        if !(self.tolerance >= 0.0) {
            return Err(DiscoveryError::InvalidConfig("tolerance must be non-negative".into()));
        }
        if !(self.alpha >= 0.0) {
            return Err(DiscoveryError::InvalidConfig("alpha must be non-negative".into()));
        }
        Ok(())
    }
}
