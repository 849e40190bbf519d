//! Admissibility conditions and threshold constants for the counting regime.

use crate::instance::ColoringInstance;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThresholdError {
    #[error("alpha * exp(-1/alpha) = c has no solution for c = {0} (need c > 0)")]
    NoSolution(f64),
}

/// Left side of the list-size margin requirement
/// `(1 - 1/beta) * alpha * exp(-(1/alpha)(1 + 1/beta)) > 2`.
pub fn beta_condition_lhs(alpha: f64, beta: f64) -> f64 {
    (1.0 - 1.0 / beta) * alpha * (-(1.0 / alpha) * (1.0 + 1.0 / beta)).exp()
}

/// Holds iff the `(alpha, beta)` pair gives enough margin for the decay
/// constants to exist.
pub fn beta_condition_holds(alpha: f64, beta: f64) -> bool {
    beta_condition_lhs(alpha, beta) > 2.0
}

/// Solves `alpha * exp(-1/alpha) = c` by bisection on the strictly
/// increasing left side; the result satisfies `|alpha e^{-1/alpha} - c| <= 1e-9`.
pub fn solve_alpha_threshold(c: f64) -> Result<f64, ThresholdError> {
    if !(c > 0.0) {
        return Err(ThresholdError::NoSolution(c));
    }
    let f = |a: f64| a * (-1.0 / a).exp();
    let mut lo = 1e-6_f64;
    let mut hi = 10.0_f64.max(10.0 * c);
    debug_assert!(f(lo) < c && f(hi) > c);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < c {
            lo = mid;
        } else {
            hi = mid;
        }
        if (f(mid) - c).abs() <= 1e-12 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Snapshot of all derived constants and admissibility verdicts for an
/// instance/parameter combination.
///
/// `epsilon0`/`epsilon` are present only when the beta condition holds;
/// `gamma`, `c_f`, `c_phi` are populated for MRF-side checks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon0: Option<f64>,
    pub epsilon: Option<f64>,
    pub gamma: Option<f64>,
    pub c_f: Option<f64>,
    pub c_phi: Option<f64>,
    pub delta_max: usize,
    pub list_size_ok: bool,
    pub beta_ok: bool,
    pub gamma_ok: Option<bool>,
}

impl ConditionReport {
    /// All verdicts that are present hold.
    pub fn passes(&self) -> bool {
        self.list_size_ok && self.beta_ok && self.gamma_ok.unwrap_or(true)
    }
}

/// Checks the per-node list-size requirement `|L(v)| >= alpha * deg(v) + beta`
/// and the beta margin condition, reporting verdicts rather than failing.
pub fn check_list_condition(inst: &ColoringInstance, alpha: f64, beta: f64) -> ConditionReport {
    assert!(alpha > 0.0 && beta > 0.0, "alpha and beta must be positive");
    let list_size_ok = (0..inst.node_count()).all(|v| {
        inst.list(v).len() as f64 >= alpha * inst.graph().degree(v) as f64 + beta
    });
    let beta_ok = beta_condition_holds(alpha, beta);
    let (epsilon0, epsilon) = if beta_ok {
        match crate::decay::derive_constants(alpha, beta) {
            Ok(c) => (Some(c.epsilon0), Some(c.epsilon)),
            Err(_) => (None, None),
        }
    } else {
        (None, None)
    };
    ConditionReport {
        alpha,
        beta,
        epsilon0,
        epsilon,
        gamma: None,
        c_f: None,
        c_phi: None,
        delta_max: inst.graph().max_degree(),
        list_size_ok,
        beta_ok,
        gamma_ok: None,
    }
}
