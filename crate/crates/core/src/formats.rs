//! Instance file formats: a line-oriented text format for coloring
//! instances and a JSON format for MRFs.

use crate::graph::Graph;
use crate::instance::ColoringInstance;
use crate::mrf::{EdgePotential, MrfInstance};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("invalid MRF JSON: {0}")]
    Json(String),
    #[error("{0}")]
    Semantic(String),
}

fn line_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Line {
        line,
        message: message.into(),
    }
}

/// Parses the coloring instance text format:
///
/// ```text
/// c comment
/// p lcol <nodes> <q>
/// e <u> <v>
/// l <v> <c1> <c2> ...
/// ```
///
/// Node ids are 1-based; a node without an `l` line gets the full universe.
pub fn parse_lcol(text: &str) -> Result<ColoringInstance, FormatError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut seen_edges: HashSet<(usize, usize)> = HashSet::new();
    let mut lists: Vec<Option<Vec<usize>>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        let Some(&kind) = tokens.first() else {
            continue;
        };
        match kind {
            "c" => {}
            "p" => {
                if header.is_some() {
                    return Err(line_err(line, "duplicate header"));
                }
                if tokens.len() != 4 || tokens[1] != "lcol" {
                    return Err(line_err(line, "expected `p lcol <nodes> <q>`"));
                }
                let n: usize = tokens[2]
                    .parse()
                    .map_err(|_| line_err(line, "bad node count"))?;
                let q: usize = tokens[3]
                    .parse()
                    .map_err(|_| line_err(line, "bad universe size"))?;
                if q == 0 {
                    return Err(line_err(line, "universe size must be positive"));
                }
                header = Some((n, q));
                lists = vec![None; n];
            }
            "e" => {
                let (n, _) = header.ok_or_else(|| line_err(line, "edge before header"))?;
                if tokens.len() != 3 {
                    return Err(line_err(line, "expected `e <u> <v>`"));
                }
                let u = parse_node(tokens[1], n, line)?;
                let v = parse_node(tokens[2], n, line)?;
                if u == v {
                    return Err(line_err(line, format!("self-loop at node {}", u + 1)));
                }
                let key = (u.min(v), u.max(v));
                if !seen_edges.insert(key) {
                    return Err(line_err(line, "duplicate edge"));
                }
                edges.push((u, v));
            }
            "l" => {
                let (n, q) = header.ok_or_else(|| line_err(line, "list before header"))?;
                if tokens.len() < 2 {
                    return Err(line_err(line, "expected `l <v> <colors...>`"));
                }
                let v = parse_node(tokens[1], n, line)?;
                if lists[v].is_some() {
                    return Err(line_err(line, format!("duplicate list for node {}", v + 1)));
                }
                let mut colors = Vec::with_capacity(tokens.len() - 2);
                for t in &tokens[2..] {
                    let c: usize = t.parse().map_err(|_| line_err(line, "bad color"))?;
                    if c < 1 || c > q {
                        return Err(line_err(
                            line,
                            format!("color {c} outside universe 1..={q}"),
                        ));
                    }
                    colors.push(c);
                }
                colors.sort_unstable();
                if colors.windows(2).any(|w| w[0] == w[1]) {
                    return Err(line_err(line, "duplicate color in list"));
                }
                lists[v] = Some(colors);
            }
            other => {
                return Err(line_err(line, format!("unknown line type `{other}`")));
            }
        }
    }

    let (n, q) = header.ok_or_else(|| line_err(1, "missing `p lcol` header"))?;
    let graph =
        Graph::from_edges(n, &edges).map_err(|e| FormatError::Semantic(e.to_string()))?;
    let full: Vec<usize> = (1..=q).collect();
    let lists: Vec<Vec<usize>> = lists
        .into_iter()
        .map(|l| l.unwrap_or_else(|| full.clone()))
        .collect();
    ColoringInstance::new(graph, q, lists).map_err(|e| FormatError::Semantic(e.to_string()))
}

fn parse_node(token: &str, n: usize, line: usize) -> Result<usize, FormatError> {
    let v: usize = token.parse().map_err(|_| line_err(line, "bad node id"))?;
    if v < 1 || v > n {
        return Err(line_err(line, format!("node {v} outside 1..={n}")));
    }
    Ok(v - 1)
}

/// Canonical text form: header, edges ascending, then lists for every node
/// whose list is not the full universe.
pub fn emit_lcol(inst: &ColoringInstance) -> String {
    let mut out = String::new();
    let n = inst.node_count();
    writeln!(out, "p lcol {} {}", n, inst.q()).unwrap();
    for (u, v) in inst.graph().edges() {
        writeln!(out, "e {} {}", u + 1, v + 1).unwrap();
    }
    for v in 0..n {
        if inst.list(v).len() != inst.q() {
            write!(out, "l {}", v + 1).unwrap();
            for c in inst.list(v) {
                write!(out, " {c}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
struct MrfNodeFile {
    id: usize,
    phi: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MrfEdgeFile {
    u: usize,
    v: usize,
    f: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct MrfFile {
    alphabet: usize,
    #[serde(default)]
    log_prefactor: f64,
    nodes: Vec<MrfNodeFile>,
    edges: Vec<MrfEdgeFile>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    relaxed: bool,
}

/// Parses the MRF JSON format. Node ids are 1-based and must cover
/// `1..=n`; the `f` entry `[a][b]` pairs symbol `a` at `u` with symbol `b`
/// at `v`. Positivity is enforced unless `"relaxed": true`.
pub fn parse_mrf_json(text: &str) -> Result<MrfInstance, FormatError> {
    let file: MrfFile =
        serde_json::from_str(text).map_err(|e| FormatError::Json(e.to_string()))?;
    let n = file.nodes.len();
    let k = file.alphabet;

    let mut phi: Vec<Option<Vec<f64>>> = vec![None; n];
    for node in file.nodes {
        if node.id < 1 || node.id > n {
            return Err(FormatError::Semantic(format!(
                "node id {} outside 1..={n}",
                node.id
            )));
        }
        if phi[node.id - 1].is_some() {
            return Err(FormatError::Semantic(format!("duplicate node id {}", node.id)));
        }
        phi[node.id - 1] = Some(node.phi);
    }
    let phi: Vec<Vec<f64>> = phi.into_iter().map(|p| p.unwrap()).collect();

    let mut edge_pairs = Vec::with_capacity(file.edges.len());
    let mut potentials = Vec::with_capacity(file.edges.len());
    for edge in file.edges {
        if edge.u < 1 || edge.u > n || edge.v < 1 || edge.v > n {
            return Err(FormatError::Semantic(format!(
                "edge ({}, {}) outside 1..={n}",
                edge.u, edge.v
            )));
        }
        let (mut u, mut v) = (edge.u - 1, edge.v - 1);
        if edge.f.len() != k || edge.f.iter().any(|row| row.len() != k) {
            return Err(FormatError::Semantic(format!(
                "edge ({}, {}) table is not {k}x{k}",
                edge.u, edge.v
            )));
        }
        let mut table = vec![0.0; k * k];
        let transpose = u > v;
        if transpose {
            std::mem::swap(&mut u, &mut v);
        }
        for (a, row) in edge.f.iter().enumerate() {
            for (b, &x) in row.iter().enumerate() {
                let idx = if transpose { b * k + a } else { a * k + b };
                table[idx] = x;
            }
        }
        edge_pairs.push((u, v));
        potentials.push(EdgePotential { u, v, table });
    }
    let graph = Graph::from_edges(n, &edge_pairs)
        .map_err(|e| FormatError::Semantic(e.to_string()))?;
    MrfInstance::new(graph, k, phi, potentials, file.log_prefactor, file.relaxed)
        .map_err(|e| FormatError::Semantic(e.to_string()))
}

/// Canonical JSON form: nodes by ascending id, edges ascending with `u < v`.
pub fn emit_mrf_json(m: &MrfInstance) -> String {
    let k = m.alphabet();
    let file = MrfFile {
        alphabet: k,
        log_prefactor: m.log_prefactor(),
        nodes: (0..m.node_count())
            .map(|v| MrfNodeFile {
                id: v + 1,
                phi: m.phi(v).to_vec(),
            })
            .collect(),
        edges: m
            .edge_potentials()
            .iter()
            .map(|e| MrfEdgeFile {
                u: e.u + 1,
                v: e.v + 1,
                f: (0..k)
                    .map(|a| e.table[a * k..(a + 1) * k].to_vec())
                    .collect(),
            })
            .collect(),
        relaxed: m.is_relaxed(),
    };
    serde_json::to_string_pretty(&file).expect("MRF files always serialize")
}
