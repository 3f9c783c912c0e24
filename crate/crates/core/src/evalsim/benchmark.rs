use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::data::{split_indices, Dataset};
use crate::discovery::{sem, SemConfig};
use crate::graph::{MGraph, NodeId, NodeRole, PriorKnowledge};
use crate::model::{fit_parameters, predict, CausalNetwork};
use crate::Real;

use super::{auc, EvalError};

pub const PRIOR_ONLY: &str = "cn_prior";
pub const PRIOR_SEM: &str = "cn_prior_sem";
pub const NAIVE_BAYES: &str = "naive_bayes";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub target: String,
    pub positive_level: String,
    /// Training fraction per cohort level; unlisted cohorts train in full.
    pub train_fractions: BTreeMap<String, f64>,
    pub seed: u64,
    pub sem: SemConfig,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            target: "cvds".into(),
            positive_level: "yes".into(),
            train_fractions: [("PBC".to_string(), 0.667), ("CBC".to_string(), 1.0)].into_iter().collect(),
            seed: 0,
            sem: SemConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelScore {
    pub name: String,
    pub auc: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub seed: u64,
    pub n_train: usize,
    pub n_test: usize,
    /// Test rows with an observed target, the ones the AUC is computed on.
    pub n_scored: usize,
    pub n_positive: usize,
    pub models: Vec<ModelScore>,
}

impl BenchmarkReport {
    pub fn auc_of(&self, name: &str) -> Option<f64> {
        self.models.iter().find(|m| m.name == name).map(|m| m.auc)
    }

    /// Prior+SEM at least prior-only, which is at least naive Bayes.
    pub fn ordering_holds(&self) -> bool {
        match (self.auc_of(PRIOR_SEM), self.auc_of(PRIOR_ONLY), self.auc_of(NAIVE_BAYES)) {
            (Some(s), Some(p), Some(nb)) => s >= p && p >= nb,
            _ => false,
        }
    }
}

/// Aligned plain-text table, one row per seed.
pub fn render_table(reports: &[BenchmarkReport]) -> String {
    let names: Vec<String> = reports
        .first()
        .map(|r| r.models.iter().map(|m| m.name.clone()).collect())
        .unwrap_or_default();
    let mut out = format!("{:>6} {:>7} {:>6} {:>6} {:>5}", "seed", "n_train", "n_test", "scored", "pos");
    for n in &names {
        let _ = write!(out, " {n:>12}");
    }
    out.push_str(" ordering\n");
    for r in reports {
        let _ = write!(
            out,
            "{:>6} {:>7} {:>6} {:>6} {:>5}",
            r.seed, r.n_train, r.n_test, r.n_scored, r.n_positive
        );
        for m in &r.models {
            let _ = write!(out, " {:>12.4}", m.auc);
        }
        let _ = writeln!(out, " {}", if r.ordering_holds() { "ok" } else { "violated" });
    }
    let held = reports.iter().filter(|r| r.ordering_holds()).count();
    let _ = writeln!(out, "ordering held in {held}/{} runs", reports.len());
    out
}

/// Machine-readable `key=value` lines, one block per seed.
pub fn render_key_values(reports: &[BenchmarkReport]) -> String {
    let mut out = String::new();
    for r in reports {
        let p = format!("seed.{}", r.seed);
        let _ = writeln!(out, "{p}.n_train={}", r.n_train);
        let _ = writeln!(out, "{p}.n_test={}", r.n_test);
        let _ = writeln!(out, "{p}.n_scored={}", r.n_scored);
        let _ = writeln!(out, "{p}.n_positive={}", r.n_positive);
        for m in &r.models {
            let _ = writeln!(out, "{p}.auc.{}={:.17e}", m.name, m.auc);
        }
        let _ = writeln!(out, "{p}.ordering_holds={}", r.ordering_holds());
    }
    let held = reports.iter().filter(|r| r.ordering_holds()).count();
    let _ = writeln!(out, "ordering_held={held}");
    let _ = writeln!(out, "runs={}", reports.len());
    out
}

/// Trains the prior-only network, the prior+SEM network and naive Bayes on a
/// cohort-stratified training split and scores each by AUC on the test rows
/// whose target is observed.
///
/// The prior-only network runs the same EM with the structure held at the
/// prior graph. Naive Bayes has the target as the only parent of every
/// substantive variable that is observed together with the target in some
/// training row, and is fit on the training rows complete on all of them.
pub fn benchmark<T: Real>(
    d: &Dataset,
    pk: &PriorKnowledge,
    cfg: &BenchmarkConfig,
) -> Result<BenchmarkReport, EvalError> {
    let g0 = pk.graph();
    let target = g0.id(&cfg.target)?;
    let t_col = d.schema().column(&cfg.target)?;
    let positive = d
        .schema()
        .var(t_col)
        .level_index(&cfg.positive_level)
        .ok_or_else(|| EvalError::InvalidConfig(format!("`{}` has no level `{}`", cfg.target, cfg.positive_level)))?;

    let (train_rows, test_rows) = split_indices(d, &cfg.train_fractions, cfg.seed)?;
    let train = d.select_rows(&train_rows);
    let scored_rows: Vec<usize> = test_rows.iter().copied().filter(|&r| d.get(r, t_col).is_some()).collect();
    let labels: Vec<bool> = scored_rows.iter().map(|&r| d.get(r, t_col) == Some(positive)).collect();
    let n_positive = labels.iter().filter(|&&l| l).count();
    if n_positive == 0 || n_positive == labels.len() {
        return Err(EvalError::DegenerateLabels);
    }

    // the target's own indicator would reveal the split, not the patient
    let mut test = d.select_rows(&scored_rows).derive_indicators(g0)?;
    if let Some(r) = g0.indicator_of(target) {
        let col = test.schema().column(g0.name(r))?;
        test.set_column(col, vec![None; test.n_rows()])?;
    }

    let mut sem_cfg = cfg.sem.clone();
    sem_cfg.seed = cfg.seed;
    let fixed = SemConfig {
        fixed_structure: true,
        ..sem_cfg.clone()
    };
    let (prior_net, _) = sem::<T>(&train, pk, &fixed)?;
    let (sem_net, _) = sem::<T>(&train, pk, &sem_cfg)?;
    let nb_net = naive_bayes::<T>(&train, g0, target, cfg.sem.alpha)?;

    let mut models = Vec::new();
    for (name, net) in [(PRIOR_ONLY, &prior_net), (PRIOR_SEM, &sem_net), (NAIVE_BAYES, &nb_net)] {
        let preds = predict(net, &test, &cfg.target, &cfg.positive_level)?;
        let scores: Vec<T> = preds.iter().map(|p| p.score).collect();
        models.push(ModelScore {
            name: name.to_string(),
            auc: auc(&labels, &scores)?,
        });
    }
    Ok(BenchmarkReport {
        seed: cfg.seed,
        n_train: train_rows.len(),
        n_test: test_rows.len(),
        n_scored: scored_rows.len(),
        n_positive,
        models,
    })
}

/// Naive Bayes as a fixed-structure network over the target and its
/// co-observed features, fit on complete cases.
pub fn naive_bayes<T: Real>(
    train: &Dataset,
    g0: &MGraph,
    target: NodeId,
    alpha: f64,
) -> Result<CausalNetwork<T>, EvalError> {
    let t_col = train.schema().column(g0.name(target))?;
    let mut names = vec![g0.name(target).to_string()];
    for v in g0.node_ids() {
        if v == target || !matches!(g0.role(v), NodeRole::Observed | NodeRole::PartiallyObserved) {
            continue;
        }
        let col = train.schema().column(g0.name(v))?;
        if (0..train.n_rows()).any(|r| train.get(r, t_col).is_some() && train.get(r, col).is_some()) {
            names.push(g0.name(v).to_string());
        }
    }
    let nodes = names.iter().map(|n| (n.clone(), NodeRole::Observed)).collect();
    let edges: Vec<(&str, &str)> = names[1..].iter().map(|f| (names[0].as_str(), f.as_str())).collect();
    let g = MGraph::new(nodes, &edges)?;
    let cols = train.columns_for(&g)?;
    let complete = train.complete_cases(&cols);
    Ok(fit_parameters(&g, &complete, alpha)?)
}
