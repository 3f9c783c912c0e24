use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, Schema};
use crate::graph::{MGraph, NodeId, NodeRole};
use crate::model::{sample_rows, CausalNetwork};
use crate::Real;

use super::EvalError;

/// Two-cohort (or more) sampling setup.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig<T> {
    /// Ground truth, including the selection node and the indicator nodes
    /// whose sampled values decide which cells are masked.
    pub truth: CausalNetwork<T>,
    /// Name of the selection node.
    pub cohort: String,
    /// Rows per cohort level, keyed by level name.
    pub sizes: BTreeMap<String, usize>,
    /// Observed fraction per `(cohort level, variable)`; replaces the
    /// variable's indicator for rows of that cohort.
    pub observed_overrides: BTreeMap<(String, String), f64>,
    pub seed: u64,
}

impl<T: Real> SimConfig<T> {
    fn validate(&self) -> Result<NodeId, EvalError> {
        let g = self.truth.graph();
        let s = g.id(&self.cohort)?;
        if *g.role(s) != NodeRole::Selection {
            return Err(EvalError::InvalidConfig(format!("`{}` is not a selection node", self.cohort)));
        }
        for level in self.sizes.keys() {
            self.truth.level_index(s, level)?;
        }
        for ((level, var), &frac) in &self.observed_overrides {
            self.truth.level_index(s, level)?;
            let v = g.id(var)?;
            if *g.role(v) != NodeRole::PartiallyObserved {
                return Err(EvalError::InvalidConfig(format!("`{var}` is not partially observed")));
            }
            if !(0.0..=1.0).contains(&frac) {
                return Err(EvalError::InvalidConfig(format!("observed fraction {frac} for `{var}`")));
            }
        }
        Ok(s)
    }
}

/// Samples each cohort with the selection node clamped, in cohort level
/// order, then masks partially observed cells: a cell is missing when its
/// sampled indicator is 1, or, under an override, with probability
/// `1 − fraction`. Indicator columns are dropped from the output, which has
/// its cohort column designated. Returns the data and the truth graph.
pub fn simulate_cohorts<T: Real>(cfg: &SimConfig<T>) -> Result<(Dataset, MGraph), EvalError> {
    let s = cfg.validate()?;
    let truth = &cfg.truth;
    let g = truth.graph();
    let kept: Vec<NodeId> = g.node_ids().filter(|&v| !g.role(v).is_indicator()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut columns: Vec<Vec<Option<usize>>> = vec![Vec::new(); kept.len()];

    for (level_idx, level) in truth.levels(s).iter().enumerate() {
        let n = cfg.sizes.get(level).copied().unwrap_or(0);
        let block = sample_rows(truth, n, &[(s, level_idx)], &mut rng);
        for (k, &v) in kept.iter().enumerate() {
            let override_frac = cfg.observed_overrides.get(&(level.clone(), g.name(v).to_string()));
            let indicator = g.indicator_of(v);
            for r in 0..n {
                let cell = block.get(r, v.0);
                let missing = match (override_frac, indicator) {
                    (Some(&frac), _) => rng.gen::<f64>() >= frac,
                    (None, Some(ind)) => block.get(r, ind.0) == Some(1),
                    (None, None) => false,
                };
                columns[k].push(if missing { None } else { cell });
            }
        }
    }
    let full = truth.schema();
    let schema = Schema::new(kept.iter().map(|v| full.var(v.0).clone()).collect())?;
    let d = Dataset::new(schema, columns)?.with_cohort(&cfg.cohort)?;
    Ok((d, g.clone()))
}
