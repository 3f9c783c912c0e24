use std::fmt;

use crate::data::Dataset;
use crate::evalsim::shd;
use crate::graph::{MGraph, PriorKnowledge};
use crate::model::{fit_parameters, log_likelihood, CausalNetwork};
use crate::Real;

use super::impute::impute_mode;
use super::score::bic;
use super::search::hill_climb_from;
use super::{DiscoveryError, SemConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SemIteration<T> {
    pub iteration: usize,
    pub graph: MGraph,
    /// BIC of `graph` on this iteration's completed data.
    pub score: T,
    pub log_likelihood: T,
    /// Cells whose imputed level differs from the previous iteration; on the
    /// first iteration, every imputed cell.
    pub imputed_changed: usize,
    pub shd_vs_prev: usize,
    pub flagged_rows: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemTrace<T> {
    pub iterations: Vec<SemIteration<T>>,
    /// Index of the iterate that was returned.
    pub best: usize,
    /// Stopped by a convergence rule rather than the iteration cap.
    pub converged: bool,
}

impl<T: Real> fmt::Display for SemTrace<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for it in &self.iterations {
            writeln!(
                f,
                "iter={} score={:.6} loglik={:.6} shd_vs_prev={} imputed_changed={} flagged={}",
                it.iteration,
                it.score.as_f64(),
                it.log_likelihood.as_f64(),
                it.shd_vs_prev,
                it.imputed_changed,
                it.flagged_rows
            )?;
        }
        writeln!(f, "best={} converged={}", self.iterations[self.best].iteration, self.converged)
    }
}

/// Structural EM with hard imputation.
///
/// Starts from the prior graph with parameters fitted by available-case
/// counting. Each iteration imputes every missing network cell with its
/// posterior mode under the current model, hill-climbs from the current graph
/// on the completed data, and refits. Stops when the data had nothing to
/// impute, when neither the graph nor any imputed cell changed, when the
/// relative BIC gain drops below `tolerance`, or after `max_iterations`.
/// Returns the best-scoring iterate.
///
/// Indicator columns are (re)derived from the data before starting.
pub fn sem<T: Real>(
    d: &Dataset,
    pk: &PriorKnowledge,
    cfg: &SemConfig,
) -> Result<(CausalNetwork<T>, SemTrace<T>), DiscoveryError> {
    cfg.validate()?;
    let g0 = pk.graph();
    let d = d.derive_indicators(g0)?;
    d.columns_for(g0)?;

    let mut graph = g0.clone();
    let mut model: CausalNetwork<T> = fit_parameters(&graph, &d, cfg.alpha)?;
    let mut previous: Option<Dataset> = None;
    let mut iterations: Vec<SemIteration<T>> = Vec::new();
    let mut best: Option<(usize, CausalNetwork<T>)> = None;
    let mut converged = false;

    for i in 1..=cfg.max_iterations {
        let imp = impute_mode(&model, &d)?;
        let changed = match &previous {
            None => imp.imputed_cells,
            Some(p) => changed_cells(p, &imp.data),
        };
        let next = if cfg.fixed_structure {
            graph.clone()
        } else {
            hill_climb_from::<T>(&imp.data, pk, cfg, &graph)?.graph
        };
        model = fit_parameters(&next, &imp.data, cfg.alpha)?;
        let score = bic::<T>(&next, &imp.data, cfg.alpha)?.total;
        let ll = log_likelihood(&model, &imp.data)?;
        let moved = shd(&graph, &next).expect("same node set");

        let prev_score = iterations.last().map(|it| it.score);
        iterations.push(SemIteration {
            iteration: i,
            graph: next.clone(),
            score,
            log_likelihood: ll,
            imputed_changed: changed,
            shd_vs_prev: moved,
            flagged_rows: imp.flagged_rows.len(),
        });
        if best.as_ref().map_or(true, |(b, _)| score > iterations[*b].score) {
            best = Some((iterations.len() - 1, model.clone()));
        }

        let stalled = i > 1 && moved == 0 && changed == 0 && next == graph;
        let flat = prev_score.is_some_and(|p| score - p < T::lit(cfg.tolerance) * p.abs());
        graph = next;
        previous = Some(imp.data);
        if imp.imputed_cells == 0 || stalled || flat {
            converged = true;
            break;
        }
    }
    let (best, model) = best.expect("at least one iteration");
    Ok((
        model,
        SemTrace {
            iterations,
            best,
            converged,
        },
    ))
}

fn changed_cells(a: &Dataset, b: &Dataset) -> usize {
    (0..a.n_cols())
        .map(|c| a.column_cells(c).zip(b.column_cells(c)).filter(|(x, y)| x != y).count())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{NodeId, NodeRole};
    use crate::model::{sample, Cpt};

    fn truth() -> CausalNetwork<f64> {
        let g = MGraph::new(
            vec![
                ("A".into(), NodeRole::Observed),
                ("B".into(), NodeRole::PartiallyObserved),
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
                Cpt::root(NodeId(0), vec![0.6, 0.4]).unwrap(),
                Cpt::new(NodeId(1), 2, vec![NodeId(0)], vec![2], vec![0.85, 0.15, 0.2, 0.8]).unwrap(),
                Cpt::new(NodeId(2), 2, vec![NodeId(1)], vec![2], vec![0.9, 0.1, 0.25, 0.75]).unwrap(),
            ],
        )
        .unwrap()
    }

    fn prior() -> PriorKnowledge {
        let g0 = MGraph::new(
            vec![
                ("A".into(), NodeRole::Observed),
                ("B".into(), NodeRole::PartiallyObserved),
                ("C".into(), NodeRole::Observed),
                ("R_B".into(), NodeRole::MissIndicator("B".into())),
            ],
            &[("A", "R_B")],
        )
        .unwrap();
        PriorKnowledge::new(g0, []).unwrap()
    }

    fn masked(n: usize) -> Dataset {
        let mut d = sample(&truth(), n, 5);
        for r in 0..n {
            if d.get(r, 0) == Some(1) && r % 3 == 0 {
                d.set_cell(r, 1, None);
            }
        }
        d
    }

    #[test]
    fn complete_data_takes_one_iteration() {
        let d = sample(&truth(), 800, 2);
        let (_, trace): (CausalNetwork<f64>, _) = sem(&d, &prior(), &SemConfig::default()).unwrap();
        assert_eq!(trace.iterations.len(), 1);
        assert!(trace.converged);
    }

    #[test]
    fn returns_best_iterate_and_keeps_prior() {
        let d = masked(1500);
        let (net, trace): (CausalNetwork<f64>, _) = sem(&d, &prior(), &SemConfig::default()).unwrap();
        let best = &trace.iterations[trace.best];
        assert!(trace.iterations.iter().all(|it| it.score <= best.score));
        assert_eq!(net.graph(), &best.graph);
        let rb = net.graph().id("R_B").unwrap();
        assert!(net.graph().has_edge(NodeId(0), rb));
        let text = trace.to_string();
        assert!(text.starts_with("iter=1 score="));
    }

    #[test]
    fn fixed_structure_keeps_graph() {
        let d = masked(600);
        let cfg = SemConfig {
            fixed_structure: true,
            ..SemConfig::default()
        };
        let (net, trace): (CausalNetwork<f64>, _) = sem(&d, &prior(), &cfg).unwrap();
        assert_eq!(net.graph(), prior().graph());
        assert!(trace.iterations.iter().all(|it| it.shd_vs_prev == 0));
    }
}
