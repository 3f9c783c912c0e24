//! Discrete causal networks learned from multi-cohort observational data.
//!
//! The crate combines missingness graphs (partially observed variables plus
//! their missingness indicators), selection/context nodes, and score-based
//! structure search with Structural EM. It also provides back-door adjustment,
//! graph-based recoverability of joint distributions under MNAR missingness,
//! exact inference by variable elimination, and an evaluation harness built
//! on a two-cohort synthetic simulator.
//!
//! Numeric code is generic over [`Real`]; the aliases at the crate root fix
//! the scalar to `f64`, which is what the CLI uses.

pub mod data;
pub mod discovery;
pub mod effects;
pub mod evalsim;
pub mod graph;
pub mod missingness;
pub mod model;
mod scalar;

pub use scalar::Real;

pub use data::{DataError, Dataset, Schema, Variable};
pub use graph::{GraphError, MGraph, NodeId, NodeRole, PriorKnowledge};

/// Causal network with `f64` tables.
pub type Network = model::CausalNetwork<f64>;
/// Causal network with `f32` tables.
pub type Network32 = model::CausalNetwork<f32>;
/// Conditional probability table with `f64` entries.
pub type Cpt = model::Cpt<f64>;
/// Factor over discrete variables with `f64` entries.
pub type Factor = model::Factor<f64>;
/// Structural EM trace with `f64` scores.
pub type SemTrace = discovery::SemTrace<f64>;
/// Decomposable score with `f64` terms.
pub type ScoreValue = discovery::ScoreValue<f64>;
