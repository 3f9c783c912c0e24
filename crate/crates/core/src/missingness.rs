//! Graph-based diagnosis of the missingness mechanism and inverse-probability
//! recovery of joint distributions under MNAR missingness.

use std::fmt;

use thiserror::Error;

use crate::data::{DataError, Dataset};
use crate::graph::{GraphError, MGraph, NodeId, NodeRole};
use crate::model::Factor;
use crate::Real;

#[derive(Debug, Error)]
pub enum MissingnessError {
    #[error("joint is not recoverable: {0}")]
    NotRecoverable(RecoveryDiagnosis),
    #[error("indicator `{indicator}` has zero observation rate at {configuration}")]
    ZeroObservationRate { indicator: String, configuration: String },
    #[error("`{0}` is neither fully nor partially observed")]
    NotObservable(String),
    #[error("partially observed `{0}` has no missingness indicator in the graph")]
    NoIndicator(String),
    #[error("no complete cases carry positive weight")]
    NoCompleteCases,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MissClass {
    /// `O ∪ U ∪ M ⊥ R`.
    Mcar,
    /// `U ∪ M ⊥ R | O`.
    Mar,
    Mnar,
}

impl fmt::Display for MissClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MissClass::Mcar => "MCAR",
            MissClass::Mar => "MAR",
            MissClass::Mnar => "MNAR",
        })
    }
}

/// Classifies an m-graph purely by d-separation. Selection nodes count as
/// fully observed.
pub fn classify(g: &MGraph) -> MissClass {
    let observed = g.nodes_with(|r| matches!(r, NodeRole::Observed | NodeRole::Selection));
    let latent = g.nodes_with(|r| *r == NodeRole::Latent);
    let partial = g.nodes_with(|r| *r == NodeRole::PartiallyObserved);
    let indicators = g.nodes_with(NodeRole::is_indicator);

    let all: Vec<NodeId> = observed.iter().chain(&latent).chain(&partial).copied().collect();
    if g.d_separated_ids(&all, &indicators, &[]) {
        return MissClass::Mcar;
    }
    let hidden: Vec<NodeId> = latent.iter().chain(&partial).copied().collect();
    if g.d_separated_ids(&hidden, &indicators, &observed) {
        MissClass::Mar
    } else {
        MissClass::Mnar
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationReason {
    /// `X` is a parent of its own indicator `R_X`.
    SelfMasking,
    /// Another indicator is a parent of `R_X`.
    RParent,
    /// A latent variable is a parent of `R_X`.
    LatentParent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub indicator: String,
    pub parent: String,
    pub reason: ViolationReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecoveryDiagnosis {
    pub violations: Vec<Violation>,
}

impl RecoveryDiagnosis {
    pub fn recoverable(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for RecoveryDiagnosis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("recoverable");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| format!("{:?}({} -> {})", v.reason, v.parent, v.indicator))
            .collect();
        f.write_str(&parts.join(", "))
    }
}

/// Checks the sufficient conditions under which every factor of the
/// inverse-probability estimator is identifiable from observed data: no
/// indicator has its own variable, another indicator, or a latent variable
/// among its parents.
pub fn check_recoverable(g: &MGraph) -> RecoveryDiagnosis {
    let mut violations = Vec::new();
    for r in g.nodes_with(NodeRole::is_indicator) {
        let of = g.indicated_by(r);
        for &p in g.parents(r) {
            let reason = if Some(p) == of {
                Some(ViolationReason::SelfMasking)
            } else if g.role(p).is_indicator() {
                Some(ViolationReason::RParent)
            } else if *g.role(p) == NodeRole::Latent {
                Some(ViolationReason::LatentParent)
            } else {
                None
            };
            if let Some(reason) = reason {
                violations.push(Violation {
                    indicator: g.name(r).to_string(),
                    parent: g.name(p).to_string(),
                    reason,
                });
            }
        }
    }
    RecoveryDiagnosis { violations }
}

/// Complete cases re-weighted by inverse observation probabilities, and the
/// joint distribution they estimate.
#[derive(Debug, Clone)]
pub struct Recovered<T> {
    pub weighted: Dataset,
    pub joint: Factor<T>,
}

struct IndicatorModel {
    name: String,
    var_col: usize,
    parent_cols: Vec<usize>,
    parent_cards: Vec<usize>,
    rate: Vec<f64>,
}

impl IndicatorModel {
    fn config(&self, d: &Dataset, row: usize) -> Option<usize> {
        let mut cfg = 0;
        for (&c, &k) in self.parent_cols.iter().zip(&self.parent_cards) {
            cfg = cfg * k + d.get(row, c)?;
        }
        Some(cfg)
    }

    fn describe(&self, d: &Dataset, cfg: usize) -> String {
        if self.parent_cols.is_empty() {
            return "(no parents)".into();
        }
        let mut rest = cfg;
        let mut parts = vec![String::new(); self.parent_cols.len()];
        for k in (0..self.parent_cols.len()).rev() {
            let var = d.schema().var(self.parent_cols[k]);
            parts[k] = format!("{}={}", var.name, var.levels[rest % self.parent_cards[k]]);
            rest /= self.parent_cards[k];
        }
        parts.join(",")
    }
}

/// Estimates `P(vars)` as
/// `P(R_vars = 0, vars) / ∏_{X ∈ vars ∩ M} P(R_X = 0 | Π_{R_X}, R_{Π_{R_X}} = 0)`.
///
/// Each observation rate is estimated from the rows where the parents of
/// `R_X` are observed, with `R_X = 0` read off `X`'s own cell. Every row
/// complete on `vars` and on all those parents keeps weight
/// `w / ∏ rate`; the joint is the normalized weighted count table over `vars`.
pub fn recover_joint<T: Real>(g: &MGraph, d: &Dataset, vars: &[NodeId]) -> Result<Recovered<T>, MissingnessError> {
    let diagnosis = check_recoverable(g);
    if !diagnosis.recoverable() {
        return Err(MissingnessError::NotRecoverable(diagnosis));
    }
    let mut var_cols = Vec::with_capacity(vars.len());
    let mut models = Vec::new();
    let mut needed: Vec<usize> = Vec::new();
    for &v in vars {
        let name = g.name(v);
        let col = d.schema().column(name)?;
        var_cols.push(col);
        needed.push(col);
        match g.role(v) {
            NodeRole::Observed | NodeRole::Selection => {}
            NodeRole::PartiallyObserved => {
                let r = g
                    .indicator_of(v)
                    .ok_or_else(|| MissingnessError::NoIndicator(name.to_string()))?;
                let parent_cols = g
                    .parents(r)
                    .iter()
                    .map(|&p| d.schema().column(g.name(p)))
                    .collect::<Result<Vec<_>, _>>()?;
                let parent_cards: Vec<usize> =
                    parent_cols.iter().map(|&c| d.schema().var(c).cardinality()).collect();
                needed.extend(&parent_cols);
                models.push(IndicatorModel {
                    name: g.name(r).to_string(),
                    var_col: col,
                    parent_cols,
                    parent_cards,
                    rate: Vec::new(),
                });
            }
            _ => return Err(MissingnessError::NotObservable(name.to_string())),
        }
    }

    for m in &mut models {
        let n_cfg: usize = m.parent_cards.iter().product();
        let mut seen = vec![0.0; n_cfg];
        let mut kept = vec![0.0; n_cfg];
        for r in 0..d.n_rows() {
            if let Some(cfg) = m.config(d, r) {
                seen[cfg] += d.weight(r);
                if d.get(r, m.var_col).is_some() {
                    kept[cfg] += d.weight(r);
                }
            }
        }
        m.rate = kept
            .iter()
            .zip(&seen)
            .map(|(&k, &s)| if s > 0.0 { k / s } else { 0.0 })
            .collect();
    }

    let cards: Vec<usize> = var_cols.iter().map(|&c| d.schema().var(c).cardinality()).collect();
    let mut table = vec![0.0f64; cards.iter().product()];
    let mut rows = Vec::new();
    let mut weights = Vec::new();
    for r in 0..d.n_rows() {
        if !d.row_complete_on(r, &needed) {
            continue;
        }
        let mut w = d.weight(r);
        for m in &models {
            let cfg = m.config(d, r).expect("complete row has observed parents");
            let rate = m.rate[cfg];
            if !(rate > 0.0) {
                return Err(MissingnessError::ZeroObservationRate {
                    indicator: m.name.clone(),
                    configuration: m.describe(d, cfg),
                });
            }
            w /= rate;
        }
        let idx = var_cols
            .iter()
            .zip(&cards)
            .fold(0, |acc, (&c, &k)| acc * k + d.get(r, c).unwrap());
        table[idx] += w;
        rows.push(r);
        weights.push(w);
    }
    let total: f64 = table.iter().sum();
    if !(total > 0.0) {
        return Err(MissingnessError::NoCompleteCases);
    }
    let joint = Factor::from_parts(
        vars.to_vec(),
        cards,
        table.iter().map(|&v| T::lit(v / total)).collect(),
    );
    let weighted = d.select_rows(&rows).reweighted(weights)?;
    Ok(Recovered { weighted, joint })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Schema, Variable};

    fn g(nodes: &[(&str, NodeRole)], edges: &[(&str, &str)]) -> MGraph {
        MGraph::new(nodes.iter().map(|(n, r)| (n.to_string(), r.clone())).collect(), edges).unwrap()
    }

    fn ind(of: &str) -> NodeRole {
        NodeRole::MissIndicator(of.into())
    }

    #[test]
    fn isolated_indicators_are_mcar() {
        let m = g(
            &[("O", NodeRole::Observed), ("X", NodeRole::PartiallyObserved), ("R_X", ind("X"))],
            &[("O", "X")],
        );
        assert_eq!(classify(&m), MissClass::Mcar);
    }

    #[test]
    fn observed_parent_is_mar() {
        let m = g(
            &[("O", NodeRole::Observed), ("X", NodeRole::PartiallyObserved), ("R_X", ind("X"))],
            &[("O", "R_X")],
        );
        assert_eq!(classify(&m), MissClass::Mar);
    }

    #[test]
    fn partial_parent_is_mnar() {
        let m = g(
            &[
                ("X", NodeRole::PartiallyObserved),
                ("Y", NodeRole::PartiallyObserved),
                ("R_X", ind("X")),
            ],
            &[("Y", "R_X")],
        );
        assert_eq!(classify(&m), MissClass::Mnar);
    }

    #[test]
    fn no_indicators_is_mcar() {
        assert_eq!(classify(&g(&[("A", NodeRole::Observed)], &[])), MissClass::Mcar);
    }

    #[test]
    fn recoverability_violations() {
        let nodes = [
            ("X", NodeRole::PartiallyObserved),
            ("Y", NodeRole::PartiallyObserved),
            ("U", NodeRole::Latent),
            ("R_X", ind("X")),
            ("R_Y", ind("Y")),
        ];
        let self_masked = check_recoverable(&g(&nodes, &[("X", "R_X")]));
        assert!(!self_masked.recoverable());
        assert_eq!(self_masked.violations[0].reason, ViolationReason::SelfMasking);

        let r_parent = check_recoverable(&g(&nodes, &[("R_Y", "R_X")]));
        assert_eq!(r_parent.violations[0].reason, ViolationReason::RParent);

        let latent = check_recoverable(&g(&nodes, &[("U", "R_Y")]));
        assert_eq!(latent.violations[0].reason, ViolationReason::LatentParent);

        assert!(check_recoverable(&g(&nodes, &[("Y", "R_X")])).recoverable());
    }

    #[test]
    fn mcar_weights_are_constant_and_cancel() {
        let m = g(
            &[("X", NodeRole::PartiallyObserved), ("R_X", ind("X"))],
            &[],
        );
        let s = Schema::new(vec![Variable::new("X", ["a", "b"])]).unwrap();
        // 8 observed of 10: rate 0.8
        let cells = vec![Some(0), Some(0), Some(0), Some(1), Some(1), Some(1), Some(1), Some(1), None, None];
        let d = Dataset::new(s, vec![cells]).unwrap();
        let rec: Recovered<f64> = recover_joint(&m, &d, &[NodeId(0)]).unwrap();
        assert_eq!(rec.weighted.n_rows(), 8);
        assert!(rec.weighted.weights().iter().all(|&w| (w - 1.25).abs() < 1e-15));
        assert!((rec.joint.values()[0] - 3.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn self_masking_is_refused() {
        let m = g(&[("X", NodeRole::PartiallyObserved), ("R_X", ind("X"))], &[("X", "R_X")]);
        let s = Schema::new(vec![Variable::new("X", ["a", "b"])]).unwrap();
        let d = Dataset::new(s, vec![vec![Some(0)]]).unwrap();
        match recover_joint::<f64>(&m, &d, &[NodeId(0)]) {
            Err(MissingnessError::NotRecoverable(diag)) => {
                assert_eq!(diag.violations[0].reason, ViolationReason::SelfMasking)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_rate_with_zero_weight_rows() {
        let m = g(
            &[("Y", NodeRole::Observed), ("X", NodeRole::PartiallyObserved), ("R_X", ind("X"))],
            &[("Y", "R_X")],
        );
        let s = Schema::new(vec![Variable::new("Y", ["0", "1"]), Variable::new("X", ["a", "b"])]).unwrap();
        let d = Dataset::with_weights(
            s,
            vec![vec![Some(0), Some(1), Some(1)], vec![Some(0), Some(1), None]],
            vec![1.0, 0.0, 1.0],
        )
        .unwrap();
        assert!(matches!(
            recover_joint::<f64>(&m, &d, &[NodeId(0), NodeId(1)]),
            Err(MissingnessError::ZeroObservationRate { .. })
        ));
    }
}
