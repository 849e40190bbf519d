//! The clamped marginal recursion for list colorings.
//!
//! `phi(inst, v, i, d)` approximates the probability that `v` gets color `i`
//! under the uniform distribution on proper list colorings, by unrolling the
//! exact marginal recursion to depth `d` over reduced pairs and clamping each
//! level at `1/beta` and `1/(2(1+epsilon0) m)`.

use crate::decay::{derive_constants, DecayConstants};
use crate::graph::shifted_index;
use crate::instance::ColoringInstance;
use dashmap::DashMap;
use rayon::prelude::*;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PhiError {
    #[error("recursion denominator vanished (out-of-regime input)")]
    ZeroDenominator,
    #[error("list of node {0} is empty")]
    EmptyList(usize),
}

/// Clamp configuration. In-regime runs carry the derived constants; forced
/// out-of-regime runs fall back to the `1/beta` clamp alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiConstants {
    pub alpha: f64,
    pub beta: f64,
    pub derived: Option<DecayConstants>,
}

impl PhiConstants {
    pub fn from_derived(constants: DecayConstants) -> Self {
        PhiConstants {
            alpha: constants.alpha,
            beta: constants.beta,
            derived: Some(constants),
        }
    }

    /// `1/beta` clamp only; used when the margin condition fails but a count
    /// is forced anyway.
    pub fn beta_only(alpha: f64, beta: f64) -> Self {
        assert!(beta > 1.0, "the 1/beta clamp needs beta > 1");
        PhiConstants {
            alpha,
            beta,
            derived: None,
        }
    }

    /// Derives the decay constants when possible, otherwise falls back to the
    /// beta-only clamp.
    pub fn derive_or_fallback(alpha: f64, beta: f64) -> Self {
        match derive_constants(alpha, beta) {
            Ok(c) => PhiConstants::from_derived(c),
            Err(_) => PhiConstants::beta_only(alpha, beta),
        }
    }
}

/// Counters filled in by an instrumented recursion: every evaluated tree node
/// is checked against the level bounds (`<= 1/beta`,
/// `<= 1/(2(1+epsilon0) deg)`, sum over the list `<= 1`, and the
/// `q^{-1}(1-1/beta)^delta` floor).
#[derive(Debug, Default)]
pub struct PhiStats {
    nodes: AtomicU64,
    violations: AtomicU64,
    first_violation: Mutex<Option<String>>,
}

impl PhiStats {
    pub fn nodes_evaluated(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }

    pub fn violations(&self) -> u64 {
        self.violations.load(Ordering::Relaxed)
    }

    pub fn first_violation(&self) -> Option<String> {
        self.first_violation.lock().unwrap().clone()
    }

    fn flag(&self, message: String) {
        self.violations.fetch_add(1, Ordering::Relaxed);
        let mut slot = self.first_violation.lock().unwrap();
        if slot.is_none() {
            *slot = Some(message);
        }
    }
}

/// Evaluator for the clamped recursion. Evaluations are pure; the optional
/// memo cache is a pure accelerator keyed by the canonical encoding of
/// `(instance, node, depth)` and never changes results.
pub struct PhiEngine<'a> {
    constants: PhiConstants,
    cache: Option<DashMap<Vec<u8>, Vec<f64>>>,
    stats: Option<&'a PhiStats>,
}

impl<'a> PhiEngine<'a> {
    pub fn new(constants: PhiConstants) -> Self {
        PhiEngine {
            constants,
            cache: None,
            stats: None,
        }
    }

    pub fn with_memo(mut self) -> Self {
        self.cache = Some(DashMap::new());
        self
    }

    pub fn with_stats(mut self, stats: &'a PhiStats) -> Self {
        self.stats = Some(stats);
        self
    }

    pub fn constants(&self) -> &PhiConstants {
        &self.constants
    }

    /// The depth-`d` estimate of `P(c(v) = i)`; zero when `i` is not in the
    /// list of `v`.
    pub fn phi(
        &self,
        inst: &ColoringInstance,
        v: usize,
        i: usize,
        d: usize,
    ) -> Result<f64, PhiError> {
        match inst.list(v).binary_search(&i) {
            Err(_) => Ok(0.0),
            Ok(pos) => Ok(self.phi_vector(inst, v, d)?[pos]),
        }
    }

    /// Estimates for every color in the list of `v` at once (the recursion
    /// computes the whole denominator anyway, so this costs the same as a
    /// single color).
    pub fn phi_vector(
        &self,
        inst: &ColoringInstance,
        v: usize,
        d: usize,
    ) -> Result<Vec<f64>, PhiError> {
        let list = inst.list(v);
        if list.is_empty() {
            return Err(PhiError::EmptyList(v));
        }
        let key = self
            .cache
            .as_ref()
            .map(|_| inst.canonical_bytes(&[v, d]));
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            if let Some(hit) = cache.get(key) {
                return Ok(hit.clone());
            }
        }

        let degree = inst.graph().degree(v);
        let out = if d == 0 || degree == 0 {
            vec![1.0 / list.len() as f64; list.len()]
        } else {
            let neighbors = inst.graph().neighbors(v).to_vec();
            // child (k, j): estimate for color j at the k-th neighbor within
            // the reduced pair that strikes j below rank k
            let specs: Vec<(usize, usize)> = (1..=degree)
                .flat_map(|k| list.iter().map(move |&j| (k, j)))
                .collect();
            let eval = |&(k, j): &(usize, usize)| -> Result<f64, PhiError> {
                let pair = inst
                    .reduced_pair(v, k, j)
                    .expect("rank and node are in range");
                let target = shifted_index(neighbors[k - 1], v);
                self.phi(&pair, target, j, d - 1)
            };
            let children: Vec<f64> = if d >= 2 && specs.len() >= 8 {
                specs
                    .par_iter()
                    .map(eval)
                    .collect::<Result<Vec<_>, _>>()?
            } else {
                specs.iter().map(eval).collect::<Result<Vec<_>, _>>()?
            };

            let mut products = vec![1.0_f64; list.len()];
            for k in 0..degree {
                for (li, p) in products.iter_mut().enumerate() {
                    *p *= 1.0 - children[k * list.len() + li];
                }
            }
            let denominator: f64 = products.iter().sum();
            if denominator <= 0.0 {
                return Err(PhiError::ZeroDenominator);
            }
            let clamp_beta = 1.0 / self.constants.beta;
            let clamp_degree = self
                .constants
                .derived
                .map(|c| 1.0 / (2.0 * (1.0 + c.epsilon0) * degree as f64));
            products
                .iter()
                .map(|p| {
                    let mut value = (p / denominator).min(clamp_beta);
                    if let Some(cd) = clamp_degree {
                        value = value.min(cd);
                    }
                    value
                })
                .collect()
        };

        if let Some(stats) = self.stats {
            self.check_level_bounds(stats, inst, v, &out);
        }
        if let (Some(cache), Some(key)) = (&self.cache, key) {
            cache.insert(key, out.clone());
        }
        Ok(out)
    }

    fn check_level_bounds(
        &self,
        stats: &PhiStats,
        inst: &ColoringInstance,
        v: usize,
        values: &[f64],
    ) {
        stats.nodes.fetch_add(1, Ordering::Relaxed);
        let beta = self.constants.beta;
        let q = inst.q() as f64;
        let delta = inst.graph().max_degree() as i32;
        let degree = inst.graph().degree(v);
        let floor = (1.0 / q) * (1.0 - 1.0 / beta).powi(delta);
        let cap_beta = 1.0 / beta;
        let cap_degree = self.constants.derived.and_then(|c| {
            (degree >= 1).then(|| 1.0 / (2.0 * (1.0 + c.epsilon0) * degree as f64))
        });
        for &x in values {
            if x > cap_beta {
                stats.flag(format!("value {x} above 1/beta at node {v}"));
            }
            if let Some(cap) = cap_degree {
                if x > cap {
                    stats.flag(format!("value {x} above degree cap {cap} at node {v}"));
                }
            }
            if x < floor {
                stats.flag(format!("value {x} below floor {floor} at node {v}"));
            }
        }
        let sum: f64 = values.iter().sum();
        if sum > 1.0 + 1e-12 {
            stats.flag(format!("list sum {sum} above one at node {v}"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn in_regime() -> PhiConstants {
        PhiConstants::from_derived(derive_constants(3.0, 20.0).unwrap())
    }

    #[test]
    fn color_outside_list_is_zero() {
        let g = Graph::from_edges(1, &[]).unwrap();
        let inst = ColoringInstance::new(g, 5, vec![vec![1, 2]]).unwrap();
        let engine = PhiEngine::new(in_regime());
        for d in 0..4 {
            assert_eq!(engine.phi(&inst, 0, 4, d).unwrap(), 0.0);
        }
    }

    #[test]
    fn isolated_node_is_uniform_on_its_list() {
        let g = Graph::from_edges(1, &[]).unwrap();
        let inst = ColoringInstance::full_lists(g, 26);
        let engine = PhiEngine::new(in_regime());
        for d in [0, 1, 5] {
            assert_eq!(engine.phi(&inst, 0, 7, d).unwrap(), 1.0 / 26.0);
        }
    }

    #[test]
    fn single_edge_depth_one_is_uniform() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let inst = ColoringInstance::full_lists(g, 26);
        let engine = PhiEngine::new(in_regime());
        for i in [1, 13, 26] {
            let value = engine.phi(&inst, 0, i, 1).unwrap();
            assert!((value - 1.0 / 26.0).abs() < 1e-15, "{value}");
        }
    }

    #[test]
    fn empty_list_is_an_error() {
        let g = Graph::from_edges(1, &[]).unwrap();
        let inst = ColoringInstance::new(g, 3, vec![vec![]]).unwrap();
        let engine = PhiEngine::new(in_regime());
        assert_eq!(engine.phi_vector(&inst, 0, 2), Err(PhiError::EmptyList(0)));
    }

    #[test]
    fn memo_does_not_change_values() {
        let inst = ColoringInstance::full_lists(Graph::cycle(5), 26);
        let plain = PhiEngine::new(in_regime());
        let memoized = PhiEngine::new(in_regime()).with_memo();
        for v in 0..5 {
            let a = plain.phi_vector(&inst, v, 3).unwrap();
            let b = memoized.phi_vector(&inst, v, 3).unwrap();
            assert_eq!(
                a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
            );
        }
    }

    #[test]
    fn reruns_are_bit_identical() {
        let inst = ColoringInstance::full_lists(Graph::path(5), 26);
        let engine = PhiEngine::new(in_regime());
        let a = engine.phi_vector(&inst, 2, 3).unwrap();
        let b = engine.phi_vector(&inst, 2, 3).unwrap();
        assert_eq!(
            a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn instrumented_run_sees_no_violations_in_regime() {
        let stats = PhiStats::default();
        let inst = ColoringInstance::full_lists(Graph::path(5), 26);
        let engine = PhiEngine::new(in_regime()).with_stats(&stats);
        for v in 0..5 {
            engine.phi_vector(&inst, v, 2).unwrap();
        }
        assert!(stats.nodes_evaluated() > 100);
        assert_eq!(stats.violations(), 0, "{:?}", stats.first_violation());
    }
}
