//! Plain-text network files: the graph sections, a `[levels]` section, then
//! one `cpt <child> | <parents>` block per node.
//!
//! ```text
//! [nodes]
//! A observed
//! B observed
//! [edges]
//! A -> B
//! [levels]
//! A: a0,a1
//! B: b0,b1
//! [cpts]
//! cpt A |
//! * : 2.9999999999999999e-1 6.9999999999999996e-1
//! cpt B | A
//! a0 : 9.0000000000000002e-1 1.0000000000000001e-1
//! a1 : 2.0000000000000001e-1 8.0000000000000004e-1
//! ```
//!
//! Probabilities carry 17 significant digits, so `f64` tables round-trip
//! exactly. Level names must not contain whitespace or commas.

use std::fmt::Write as _;

use crate::graph::{parse_graph, write_graph, GraphOptions, NodeId};
use crate::Real;

use super::{CausalNetwork, Cpt, ModelError};

pub fn write_network<T: Real>(c: &CausalNetwork<T>) -> String {
    let g = c.graph();
    let mut out = write_graph(g, &[]);
    out.push_str("[levels]\n");
    for id in g.node_ids() {
        let _ = writeln!(out, "{}: {}", g.name(id), c.levels(id).join(","));
    }
    out.push_str("[cpts]\n");
    for id in g.node_ids() {
        let cpt = c.cpt(id);
        let parents: Vec<&str> = cpt.parents().iter().map(|&p| g.name(p)).collect();
        if parents.is_empty() {
            let _ = writeln!(out, "cpt {} |", g.name(id));
        } else {
            let _ = writeln!(out, "cpt {} | {}", g.name(id), parents.join(" "));
        }
        for cfg in 0..cpt.n_configs() {
            out.push_str(&config_label(c, cpt, cfg));
            out.push_str(" :");
            for p in cpt.row(cfg) {
                let _ = write!(out, " {:.16e}", p.as_f64());
            }
            out.push('\n');
        }
    }
    out
}

fn config_label<T: Real>(c: &CausalNetwork<T>, cpt: &Cpt<T>, cfg: usize) -> String {
    if cpt.parents().is_empty() {
        return "*".into();
    }
    cpt.config_levels(cfg)
        .iter()
        .zip(cpt.parents())
        .map(|(&l, &p)| c.levels(p)[l].as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

fn err(line: usize, message: impl Into<String>) -> ModelError {
    ModelError::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_network<T: Real>(text: &str, options: GraphOptions) -> Result<CausalNetwork<T>, ModelError> {
    let lines: Vec<&str> = text.lines().collect();
    let strip = |s: &str| s.split('#').next().unwrap_or("").trim().to_string();
    let levels_at = lines
        .iter()
        .position(|l| strip(l) == "[levels]")
        .ok_or_else(|| err(lines.len(), "missing [levels] section"))?;
    let cpts_at = lines
        .iter()
        .position(|l| strip(l) == "[cpts]")
        .ok_or_else(|| err(lines.len(), "missing [cpts] section"))?;
    if cpts_at < levels_at {
        return Err(err(cpts_at + 1, "[cpts] must follow [levels]"));
    }
    let graph_text = lines[..levels_at].join("\n");
    let graph = parse_graph(&graph_text, options)?.graph;

    let mut levels: Vec<Option<Vec<String>>> = vec![None; graph.len()];
    for (i, raw) in lines.iter().enumerate().take(cpts_at).skip(levels_at + 1) {
        let body = strip(raw);
        if body.is_empty() {
            continue;
        }
        let (name, ls) = body.split_once(':').ok_or_else(|| err(i + 1, "expected `name: levels`"))?;
        let id = graph.id(name.trim())?;
        let ls: Vec<String> = ls.split(',').map(|s| s.trim().to_string()).collect();
        if ls.iter().any(String::is_empty) {
            return Err(err(i + 1, "empty level name"));
        }
        levels[id.0] = Some(ls);
    }
    let levels: Vec<Vec<String>> = levels
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.ok_or_else(|| err(cpts_at, format!("no levels for `{}`", graph.name(NodeId(i))))))
        .collect::<Result<_, _>>()?;

    let mut cpts: Vec<Option<Cpt<T>>> = vec![None; graph.len()];
    let mut i = cpts_at + 1;
    while i < lines.len() {
        let header = strip(lines[i]);
        i += 1;
        if header.is_empty() {
            continue;
        }
        let line_no = i;
        let rest = header
            .strip_prefix("cpt ")
            .ok_or_else(|| err(line_no, "expected `cpt <child> | <parents>`"))?;
        let (child, parents) = rest
            .split_once('|')
            .ok_or_else(|| err(line_no, "expected `cpt <child> | <parents>`"))?;
        let child = graph.id(child.trim())?;
        let parents = graph.ids(&parents.split_whitespace().collect::<Vec<_>>())?;
        let card = levels[child.0].len();
        let pcards: Vec<usize> = parents.iter().map(|p| levels[p.0].len()).collect();
        let n_cfg: usize = pcards.iter().product();
        let mut table: Vec<T> = Vec::with_capacity(n_cfg * card);
        let mut seen_rows = 0;
        while seen_rows < n_cfg {
            let Some(raw) = lines.get(i) else {
                return Err(err(i, format!("CPT of `{}` is truncated", graph.name(child))));
            };
            i += 1;
            let body = strip(raw);
            if body.is_empty() {
                continue;
            }
            let (label, probs) = body
                .split_once(" :")
                .or_else(|| body.strip_prefix(':').map(|p| ("", p)))
                .ok_or_else(|| err(i, "expected `<configuration> : <probabilities>`"))?;
            let expected: String = if parents.is_empty() {
                "*".into()
            } else {
                let mut cfg = seen_rows;
                let mut parts = vec![""; parents.len()];
                for k in (0..parents.len()).rev() {
                    parts[k] = levels[parents[k].0][cfg % pcards[k]].as_str();
                    cfg /= pcards[k];
                }
                parts.join(" ")
            };
            if label.split_whitespace().collect::<Vec<_>>().join(" ") != expected {
                return Err(err(i, format!("expected configuration `{expected}`, found `{label}`")));
            }
            let row: Vec<T> = probs
                .split_whitespace()
                .map(|t| t.parse::<f64>().map(T::lit).map_err(|_| err(i, format!("bad probability `{t}`"))))
                .collect::<Result<_, _>>()?;
            if row.len() != card {
                return Err(err(i, format!("expected {card} probabilities, found {}", row.len())));
            }
            table.extend(row);
            seen_rows += 1;
        }
        if cpts[child.0].is_some() {
            return Err(err(line_no, format!("second CPT for `{}`", graph.name(child))));
        }
        cpts[child.0] = Some(Cpt::new(child, card, parents, pcards, table)?);
    }
    let cpts: Vec<Cpt<T>> = cpts
        .into_iter()
        .enumerate()
        .map(|(k, c)| c.ok_or_else(|| err(lines.len(), format!("no CPT for `{}`", graph.name(NodeId(k))))))
        .collect::<Result<_, _>>()?;
    CausalNetwork::new(graph, levels, cpts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{MGraph, NodeRole};

    fn net() -> CausalNetwork<f64> {
        let g = MGraph::new(
            vec![
                ("A".into(), NodeRole::Observed),
                ("B".into(), NodeRole::Observed),
                ("C".into(), NodeRole::Observed),
            ],
            &[("A", "C"), ("B", "C")],
        )
        .unwrap();
        let levels = vec![
            vec!["a0".into(), "a1".into()],
            vec!["b0".into(), "b1".into(), "b2".into()],
            vec!["no".into(), "yes".into()],
        ];
        let third = 1.0 / 3.0;
        let cpts = vec![
            Cpt::root(NodeId(0), vec![0.3, 0.7]).unwrap(),
            Cpt::root(NodeId(1), vec![third, third, 1.0 - 2.0 * third]).unwrap(),
            Cpt::new(
                NodeId(2),
                2,
                vec![NodeId(0), NodeId(1)],
                vec![2, 3],
                vec![0.1, 0.9, 0.2, 0.8, 0.3, 0.7, 0.4, 0.6, 0.5, 0.5, 0.6, 0.4],
            )
            .unwrap(),
        ];
        CausalNetwork::new(g, levels, cpts).unwrap()
    }

    #[test]
    fn exact_round_trip() {
        let n = net();
        let text = write_network(&n);
        assert!(text.contains("cpt C | A B\na0 b0 : "));
        let back: CausalNetwork<f64> = parse_network(&text, GraphOptions::default()).unwrap();
        assert_eq!(back, n);
        assert_eq!(write_network(&back), text);
    }

    #[test]
    fn seventeen_significant_digits() {
        let text = write_network(&net());
        let line = text.lines().find(|l| l.starts_with("* : 2.")).unwrap();
        let first = line.split_whitespace().nth(2).unwrap();
        let mantissa = first.split('e').next().unwrap().replace('.', "");
        assert_eq!(mantissa.len(), 17);
    }

    #[test]
    fn rejects_bad_rows() {
        let text = write_network(&net()).replace("a1 b2 :", "a1 b1 :");
        assert!(matches!(
            parse_network::<f64>(&text, GraphOptions::default()),
            Err(ModelError::Parse { .. })
        ));
        let text = write_network(&net()).replace("[cpts]", "[cptz]");
        assert!(parse_network::<f64>(&text, GraphOptions::default()).is_err());
    }
}
