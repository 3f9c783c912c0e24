//! Plain-text graph files.
//!
//! ```text
//! # comment
//! [nodes]
//! age35 observed
//! grade partially_observed
//! R_grade indicator=grade
//! cohort selection
//! [edges]
//! cohort -> R_grade
//! [forbidden]
//! grade -> age35
//! ```

use std::fmt::Write as _;

use super::{GraphError, GraphOptions, MGraph, NodeRole};

/// Parsed graph file: the graph itself plus the `[forbidden]` edge list.
#[derive(Debug, Clone)]
pub struct GraphFile {
    pub graph: MGraph,
    pub forbidden: Vec<(String, String)>,
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Nodes,
    Edges,
    Forbidden,
}

fn parse_err(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_role(token: &str, line: usize) -> Result<NodeRole, GraphError> {
    match token {
        "observed" => Ok(NodeRole::Observed),
        "partially_observed" => Ok(NodeRole::PartiallyObserved),
        "latent" => Ok(NodeRole::Latent),
        "selection" => Ok(NodeRole::Selection),
        _ => match token.strip_prefix("indicator=") {
            Some(of) if !of.is_empty() => Ok(NodeRole::MissIndicator(of.to_string())),
            _ => Err(parse_err(line, format!("unknown role `{token}`"))),
        },
    }
}

fn parse_edge(body: &str, line: usize) -> Result<(String, String), GraphError> {
    let (p, c) = body
        .split_once("->")
        .ok_or_else(|| parse_err(line, "expected `parent -> child`"))?;
    let (p, c) = (p.trim(), c.trim());
    if p.is_empty() || c.is_empty() || p.contains(char::is_whitespace) || c.contains(char::is_whitespace) {
        return Err(parse_err(line, "expected `parent -> child`"));
    }
    Ok((p.to_string(), c.to_string()))
}

/// Parses the text format; structural checks are those of [`MGraph::with_options`].
pub fn parse_graph(text: &str, options: GraphOptions) -> Result<GraphFile, GraphError> {
    let mut section = Section::None;
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut forbidden = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        match body {
            "[nodes]" => section = Section::Nodes,
            "[edges]" => section = Section::Edges,
            "[forbidden]" => section = Section::Forbidden,
            _ if body.starts_with('[') => {
                return Err(parse_err(line, format!("unknown section `{body}`")))
            }
            _ => match section {
                Section::None => return Err(parse_err(line, "content before any section")),
                Section::Nodes => {
                    let mut parts = body.split_whitespace();
                    let name = parts.next().unwrap();
                    let role = parts
                        .next()
                        .ok_or_else(|| parse_err(line, format!("node `{name}` has no role")))?;
                    if parts.next().is_some() {
                        return Err(parse_err(line, "expected `name role`"));
                    }
                    nodes.push((name.to_string(), parse_role(role, line)?));
                }
                Section::Edges => edges.push(parse_edge(body, line)?),
                Section::Forbidden => forbidden.push(parse_edge(body, line)?),
            },
        }
    }
    let graph = MGraph::with_options(nodes, &edges, options)?;
    for (p, c) in &forbidden {
        graph.id(p)?;
        graph.id(c)?;
    }
    Ok(GraphFile { graph, forbidden })
}

/// Canonical text form: nodes in declaration order, edges sorted by
/// (parent, child) declaration index, LF line endings.
pub fn write_graph(g: &MGraph, forbidden: &[(String, String)]) -> String {
    let mut out = String::from("[nodes]\n");
    for id in g.node_ids() {
        let _ = writeln!(out, "{} {}", g.name(id), g.role(id));
    }
    out.push_str("[edges]\n");
    for &(p, c) in g.edges() {
        let _ = writeln!(out, "{} -> {}", g.name(p), g.name(c));
    }
    if !forbidden.is_empty() {
        out.push_str("[forbidden]\n");
        for (p, c) in forbidden {
            let _ = writeln!(out, "{p} -> {c}");
        }
    }
    out
}
