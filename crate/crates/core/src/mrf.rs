//! Discrete Markov random fields: positive node/edge potentials on a simple
//! graph, plus the reduction and conditioning operators used by the counting
//! recursion.

use crate::graph::Graph;
use crate::instance::ColoringInstance;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MrfError {
    #[error("node {0} is absent")]
    NodeAbsent(usize),
    #[error("symbol {symbol} outside alphabet 0..{alphabet}")]
    SymbolOutOfRange { symbol: usize, alphabet: usize },
    #[error("node {0} pinned more than once")]
    DuplicatePin(usize),
    #[error("inverse temperature must be finite, got {0}")]
    NonFiniteTemperature(f64),
    #[error("alphabet size must be at least 2, got {0}")]
    AlphabetTooSmall(usize),
    #[error("potentials must be strictly positive: {0}")]
    PositivityViolated(String),
    #[error("malformed instance: {0}")]
    BadShape(String),
}

/// Edge potential table for the stored edge `(u, v)` with `u < v`;
/// `table[a * k + b]` pairs symbol `a` at `u` with symbol `b` at `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgePotential {
    pub u: usize,
    pub v: usize,
    pub table: Vec<f64>,
}

/// An MRF instance: graph, alphabet `{0..k-1}`, node potentials `phi`,
/// edge potentials `f`, and an additive log-domain prefactor on Z.
///
/// `relaxed` instances may carry zero potential entries (the indicator
/// encoding of a list coloring); they are accepted by the exact oracle only.
#[derive(Debug, Clone, PartialEq)]
pub struct MrfInstance {
    graph: Graph,
    alphabet: usize,
    phi: Vec<Vec<f64>>,
    edges: Vec<EdgePotential>,
    log_prefactor: f64,
    relaxed: bool,
}

impl MrfInstance {
    pub fn new(
        graph: Graph,
        alphabet: usize,
        phi: Vec<Vec<f64>>,
        mut edges: Vec<EdgePotential>,
        log_prefactor: f64,
        relaxed: bool,
    ) -> Result<Self, MrfError> {
        if alphabet == 0 {
            return Err(MrfError::AlphabetTooSmall(0));
        }
        if !log_prefactor.is_finite() {
            return Err(MrfError::BadShape("log_prefactor is not finite".into()));
        }
        if phi.len() != graph.node_count() {
            return Err(MrfError::BadShape(format!(
                "{} phi vectors for {} nodes",
                phi.len(),
                graph.node_count()
            )));
        }
        for (v, p) in phi.iter().enumerate() {
            if p.len() != alphabet {
                return Err(MrfError::BadShape(format!(
                    "phi of node {v} has {} entries, alphabet is {alphabet}",
                    p.len()
                )));
            }
            for &x in p {
                check_potential(x, relaxed, || format!("phi of node {v}"))?;
            }
        }
        edges.sort_by_key(|e| (e.u, e.v));
        let graph_edges: Vec<(usize, usize)> = graph.edges().collect();
        let table_edges: Vec<(usize, usize)> = edges.iter().map(|e| (e.u, e.v)).collect();
        if graph_edges != table_edges {
            return Err(MrfError::BadShape(
                "edge potentials do not match the graph's edge set".into(),
            ));
        }
        for e in &edges {
            if e.table.len() != alphabet * alphabet {
                return Err(MrfError::BadShape(format!(
                    "edge ({}, {}) table has {} entries, expected {}",
                    e.u,
                    e.v,
                    e.table.len(),
                    alphabet * alphabet
                )));
            }
            for &x in &e.table {
                check_potential(x, relaxed, || format!("f of edge ({}, {})", e.u, e.v))?;
            }
        }
        Ok(MrfInstance {
            graph,
            alphabet,
            phi,
            edges,
            log_prefactor,
            relaxed,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn phi(&self, v: usize) -> &[f64] {
        &self.phi[v]
    }

    pub fn edge_potentials(&self) -> &[EdgePotential] {
        &self.edges
    }

    pub fn log_prefactor(&self) -> f64 {
        self.log_prefactor
    }

    pub fn is_relaxed(&self) -> bool {
        self.relaxed
    }

    /// Potential of the edge between `p` (at symbol `a`) and `r` (at symbol
    /// `b`), handling storage orientation. Panics if the edge is absent.
    pub fn f_between(&self, p: usize, a: usize, r: usize, b: usize) -> f64 {
        let k = self.alphabet;
        let (u, v, au, bv) = if p < r { (p, r, a, b) } else { (r, p, b, a) };
        let idx = self
            .edges
            .binary_search_by_key(&(u, v), |e| (e.u, e.v))
            .unwrap_or_else(|_| panic!("edge ({u}, {v}) absent"));
        self.edges[idx].table[au * k + bv]
    }

    /// Ratio of largest to smallest edge potential entry; 1 when edgeless.
    pub fn c_f(&self) -> f64 {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for e in &self.edges {
            for &x in &e.table {
                min = min.min(x);
                max = max.max(x);
            }
        }
        if self.edges.is_empty() {
            1.0
        } else {
            max / min
        }
    }

    /// Ratio of largest to smallest node potential entry; 1 when empty.
    pub fn c_phi(&self) -> f64 {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for p in &self.phi {
            for &x in p {
                min = min.min(x);
                max = max.max(x);
            }
        }
        if self.phi.is_empty() {
            1.0
        } else {
            max / min
        }
    }

    /// Instance size: `max(|V|, |E|, k, ceil|ln phi_max|, ceil|ln phi_min|,
    /// ceil|ln f_max|, ceil|ln f_min|)`. Zero entries of relaxed instances are
    /// skipped in the log terms.
    pub fn size(&self) -> usize {
        let mut n = self
            .graph
            .node_count()
            .max(self.graph.edge_count())
            .max(self.alphabet);
        let phi_entries = self.phi.iter().flatten().copied();
        let f_entries = self.edges.iter().flat_map(|e| e.table.iter().copied());
        for x in phi_entries.chain(f_entries) {
            if x > 0.0 {
                n = n.max(x.ln().abs().ceil() as usize);
            }
        }
        n
    }

    /// Node-elimination operator: removes `v`, folding `phi_v(x_star)` and the
    /// incident edge potentials into the neighbors' node potentials so that
    /// `Z(self) * P(X_v = x_star) = Z(result)`.
    ///
    /// An isolated node contributes `ln phi_v(x_star)` to the prefactor
    /// instead (the degree split is undefined at degree zero).
    pub fn reduce_node(&self, v: usize, x_star: usize) -> Result<MrfInstance, MrfError> {
        if v >= self.node_count() {
            return Err(MrfError::NodeAbsent(v));
        }
        if x_star >= self.alphabet {
            return Err(MrfError::SymbolOutOfRange {
                symbol: x_star,
                alphabet: self.alphabet,
            });
        }
        let deg = self.graph.degree(v);
        let mut log_prefactor = self.log_prefactor;
        let mut phi: Vec<Vec<f64>> = Vec::with_capacity(self.node_count() - 1);
        if deg == 0 {
            log_prefactor += self.phi[v][x_star].ln();
            for (u, p) in self.phi.iter().enumerate() {
                if u != v {
                    phi.push(p.clone());
                }
            }
        } else {
            let spread = self.phi[v][x_star].powf(1.0 / deg as f64);
            for (u, p) in self.phi.iter().enumerate() {
                if u == v {
                    continue;
                }
                if self.graph.has_edge(v, u) {
                    phi.push(
                        (0..self.alphabet)
                            .map(|x| p[x] * spread * self.f_between(v, x_star, u, x))
                            .collect(),
                    );
                } else {
                    phi.push(p.clone());
                }
            }
        }
        let edges = self.edges_without(&[v]);
        Ok(MrfInstance {
            graph: self.graph.remove_node(v),
            alphabet: self.alphabet,
            phi,
            edges,
            log_prefactor,
            relaxed: self.relaxed,
        })
    }

    /// Conditioning operator: removes the pinned nodes and multiplies each
    /// surviving neighbor's potential by the incident edge potentials at the
    /// pinned symbols. Conditional marginals of the result equal conditioned
    /// marginals of `self`; the pinned nodes' own potentials cancel, so the
    /// prefactor is untouched.
    pub fn condition_on(&self, pins: &[(usize, usize)]) -> Result<MrfInstance, MrfError> {
        for (idx, &(v, x)) in pins.iter().enumerate() {
            if v >= self.node_count() {
                return Err(MrfError::NodeAbsent(v));
            }
            if x >= self.alphabet {
                return Err(MrfError::SymbolOutOfRange {
                    symbol: x,
                    alphabet: self.alphabet,
                });
            }
            if pins[..idx].iter().any(|&(u, _)| u == v) {
                return Err(MrfError::DuplicatePin(v));
            }
        }
        let pinned: Vec<usize> = pins.iter().map(|&(v, _)| v).collect();
        let mut phi: Vec<Vec<f64>> = Vec::with_capacity(self.node_count() - pins.len());
        for (u, p) in self.phi.iter().enumerate() {
            if pinned.contains(&u) {
                continue;
            }
            let mut row = p.clone();
            for &(v, xv) in pins {
                if self.graph.has_edge(v, u) {
                    for (x, entry) in row.iter_mut().enumerate() {
                        *entry *= self.f_between(v, xv, u, x);
                    }
                }
            }
            phi.push(row);
        }
        let mut graph = self.graph.clone();
        let mut edges = self.edges.clone();
        // Remove pinned nodes from highest index down so earlier removals do
        // not disturb the indices of later ones.
        let mut order = pinned.clone();
        order.sort_unstable_by(|a, b| b.cmp(a));
        for v in order {
            edges = edges_without_node(&edges, v);
            graph = graph.remove_node(v);
        }
        Ok(MrfInstance {
            graph,
            alphabet: self.alphabet,
            phi,
            edges,
            log_prefactor: self.log_prefactor,
            relaxed: self.relaxed,
        })
    }

    /// Plain node deletion: `v` and its incident edges vanish, every other
    /// potential stays as it is.
    pub fn remove_node_plain(&self, v: usize) -> Result<MrfInstance, MrfError> {
        if v >= self.node_count() {
            return Err(MrfError::NodeAbsent(v));
        }
        let phi = self
            .phi
            .iter()
            .enumerate()
            .filter(|&(u, _)| u != v)
            .map(|(_, p)| p.clone())
            .collect();
        Ok(MrfInstance {
            graph: self.graph.remove_node(v),
            alphabet: self.alphabet,
            phi,
            edges: self.edges_without(&[v]),
            log_prefactor: self.log_prefactor,
            relaxed: self.relaxed,
        })
    }

    fn edges_without(&self, removed: &[usize]) -> Vec<EdgePotential> {
        let mut edges = self.edges.clone();
        let mut order: Vec<usize> = removed.to_vec();
        order.sort_unstable_by(|a, b| b.cmp(a));
        for v in order {
            edges = edges_without_node(&edges, v);
        }
        edges
    }
}

fn edges_without_node(edges: &[EdgePotential], v: usize) -> Vec<EdgePotential> {
    let shift = |u: usize| if u > v { u - 1 } else { u };
    edges
        .iter()
        .filter(|e| e.u != v && e.v != v)
        .map(|e| EdgePotential {
            u: shift(e.u),
            v: shift(e.v),
            table: e.table.clone(),
        })
        .collect()
}

fn check_potential(
    x: f64,
    relaxed: bool,
    context: impl Fn() -> String,
) -> Result<(), MrfError> {
    if !x.is_finite() || x < 0.0 || (!relaxed && x == 0.0) {
        return Err(MrfError::PositivityViolated(format!(
            "{} contains {x}",
            context()
        )));
    }
    Ok(())
}

/// Parameters of a Potts model; `inverse_temperature` is finite by
/// construction (infinite coupling would break positivity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PottsParams {
    pub q: usize,
    pub inverse_temperature: f64,
}

impl PottsParams {
    pub fn new(q: usize, inverse_temperature: f64) -> Result<Self, MrfError> {
        if q < 2 {
            return Err(MrfError::AlphabetTooSmall(q));
        }
        if !inverse_temperature.is_finite() {
            return Err(MrfError::NonFiniteTemperature(inverse_temperature));
        }
        Ok(PottsParams {
            q,
            inverse_temperature,
        })
    }
}

/// Potts model on `g`: unit node potentials and edge potential
/// `exp(b)` on the diagonal, 1 off it.
pub fn potts(g: &Graph, params: &PottsParams) -> MrfInstance {
    let k = params.q;
    let coupling = params.inverse_temperature.exp();
    let mut table = vec![1.0; k * k];
    for a in 0..k {
        table[a * k + a] = coupling;
    }
    let edges = g
        .edges()
        .map(|(u, v)| EdgePotential {
            u,
            v,
            table: table.clone(),
        })
        .collect();
    MrfInstance::new(
        g.clone(),
        k,
        vec![vec![1.0; k]; g.node_count()],
        edges,
        0.0,
        false,
    )
    .expect("potts construction is always well-formed")
}

/// Edge-potential ratio of a Potts model, computed along the same max/min
/// division path as [`MrfInstance::c_f`] so the two agree bit for bit.
pub fn potts_c_f(inverse_temperature: f64) -> f64 {
    let coupling = inverse_temperature.exp();
    if coupling >= 1.0 {
        coupling / 1.0
    } else {
        1.0 / coupling
    }
}

/// The decay quantity `(c_f^delta - c_f^{-delta}) * delta * k^delta`.
pub fn gamma_value(c_f: f64, delta_max: usize, alphabet: usize) -> f64 {
    let d = delta_max as i32;
    (c_f.powi(d) - c_f.powi(-d)) * delta_max as f64 * (alphabet as f64).powi(d)
}

/// Verdict of the interaction-strength condition `gamma < 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaReport {
    pub c_f: f64,
    pub delta_max: usize,
    pub alphabet: usize,
    pub gamma: f64,
    pub passes: bool,
}

/// Computes `c_f`, the maximum degree, and the decay quantity `gamma`;
/// the instance is admissible for the truncated recursion iff `gamma < 1`.
pub fn gamma_condition(m: &MrfInstance) -> GammaReport {
    let c_f = m.c_f();
    let delta_max = m.graph().max_degree();
    let gamma = gamma_value(c_f, delta_max, m.alphabet());
    GammaReport {
        c_f,
        delta_max,
        alphabet: m.alphabet(),
        gamma,
        passes: gamma < 1.0,
    }
}

/// Closed-form admissibility check for Potts models of maximum degree
/// `delta_max`; agrees with [`gamma_condition`] on any such instance.
pub fn potts_condition(q: usize, delta_max: usize, inverse_temperature: f64) -> bool {
    gamma_value(potts_c_f(inverse_temperature), delta_max, q) < 1.0
}

/// Indicator encoding of a list coloring as a relaxed MRF: `phi_v(i) = 1` iff
/// `i` is in the list of `v`, `f(i, j) = 1` iff `i != j`. Accepted by the
/// exact oracle only.
pub fn coloring_to_mrf(inst: &ColoringInstance) -> MrfInstance {
    let k = inst.q();
    let g = inst.graph().clone();
    let phi = (0..inst.node_count())
        .map(|v| {
            (1..=k)
                .map(|c| if inst.has_color(v, c) { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let mut table = vec![1.0; k * k];
    for a in 0..k {
        table[a * k + a] = 0.0;
    }
    let edges = g
        .edges()
        .map(|(u, v)| EdgePotential {
            u,
            v,
            table: table.clone(),
        })
        .collect();
    MrfInstance::new(g, k, phi, edges, 0.0, true)
        .expect("indicator encoding is always well-formed")
}
