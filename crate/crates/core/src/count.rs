//! The partition-function counting loop for list colorings: telescope the
//! clamped recursion through a node-elimination chain.

use crate::conditions::{check_list_condition, ConditionReport};
use crate::decay::theoretical_error_bound;
use crate::instance::ColoringInstance;
use crate::mrf::GammaReport;
use crate::oracle::{Oracle, OracleError};
use crate::phi::{PhiEngine, PhiError};
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CountError {
    #[error("admissibility conditions failed (use force to count anyway)")]
    ConditionViolated(ConditionReport),
    #[error("list of node {0} exhausted during elimination (out-of-regime input)")]
    EmptyListEncountered(usize),
    #[error("marginal estimate vanished at node {node}, color {value}")]
    ZeroMarginalEstimate { node: usize, value: usize },
    #[error(transparent)]
    Phi(#[from] PhiError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Mrf(#[from] crate::mrf::MrfError),
}

/// One elimination step: the node removed, the color (or symbol index) fixed
/// for it, and the recursion's marginal estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountStep {
    pub node: usize,
    pub value: usize,
    pub p_hat: f64,
}

/// Which admissibility report a count ran under.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RegimeReport {
    Coloring(ConditionReport),
    Mrf(GammaReport),
}

/// Output of a counting run: the log-domain estimate, the full step trace,
/// and the admissibility metadata. `log_z_hat` always equals
/// `log_prefactor - sum(ln p_hat)` over the steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountResult {
    pub log_z_hat: f64,
    pub steps: Vec<CountStep>,
    pub depth_used: usize,
    pub report: RegimeReport,
    pub theoretical_error: Option<f64>,
    pub log_prefactor: f64,
}

impl CountResult {
    /// `Z_hat` itself; infinite when the estimate exceeds f64 range.
    pub fn z_hat(&self) -> f64 {
        self.log_z_hat.exp()
    }
}

/// Counts list colorings by eliminating nodes in ascending index order,
/// fixing for each node the color chosen by an up-front greedy coloring and
/// estimating its marginal with the depth-`d` clamped recursion.
///
/// Fails unless the admissibility verdicts pass or `force` is set.
pub fn count_color(
    inst: &ColoringInstance,
    d: usize,
    engine: &PhiEngine,
    force: bool,
) -> Result<CountResult, CountError> {
    let constants = *engine.constants();
    let report = check_list_condition(inst, constants.alpha, constants.beta);
    if !report.passes() && !force {
        return Err(CountError::ConditionViolated(report));
    }
    let colors = inst
        .greedy_coloring()
        .map_err(|stuck| CountError::EmptyListEncountered(stuck.0))?;

    let mut residual = inst.clone();
    let mut log_z_hat = 0.0;
    let mut steps = Vec::with_capacity(inst.node_count());
    let mut theoretical_error = constants.derived.map(|_| 0.0);
    for (node, &color) in colors.iter().enumerate() {
        // ascending elimination keeps the current node at index 0
        let estimates = engine.phi_vector(&residual, 0, d)?;
        let pos = residual
            .list(0)
            .binary_search(&color)
            .expect("the greedy color survives earlier eliminations");
        let p_hat = estimates[pos];
        if p_hat <= 0.0 {
            return Err(CountError::ZeroMarginalEstimate { node, value: color });
        }
        log_z_hat -= p_hat.ln();
        steps.push(CountStep {
            node,
            value: color,
            p_hat,
        });
        if let (Some(total), Some(dc)) = (theoretical_error.as_mut(), constants.derived) {
            *total += theoretical_error_bound(
                residual.q(),
                residual.graph().max_degree(),
                dc.beta,
                dc.epsilon,
                d,
                residual.graph().degree(0),
            );
        }
        residual = residual.strike_and_remove(0, color);
    }
    Ok(CountResult {
        log_z_hat,
        steps,
        depth_used: d,
        report: RegimeReport::Coloring(report),
        theoretical_error,
        log_prefactor: 0.0,
    })
}

/// One row of a convergence profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileRow {
    pub depth: usize,
    pub max_abs_log_error: f64,
}

/// Worst `|ln P - ln Phi(d)|` over every node/color pair of the intact
/// instance, for each depth up to `d_max`. The trend is reported, never
/// asserted.
pub fn marginal_error_profile(
    inst: &ColoringInstance,
    engine: &PhiEngine,
    d_max: usize,
    oracle: &Oracle,
) -> Result<Vec<ProfileRow>, CountError> {
    let mut exact: Vec<Vec<f64>> = Vec::with_capacity(inst.node_count());
    for v in 0..inst.node_count() {
        let row = inst
            .list(v)
            .iter()
            .map(|&i| {
                self::to_f64(&oracle.exact_marginal_coloring(inst, v, i)?)
                    .ok_or(OracleError::ZeroPartition)
            })
            .collect::<Result<Vec<_>, _>>()?;
        exact.push(row);
    }
    let mut rows = Vec::with_capacity(d_max + 1);
    for depth in 0..=d_max {
        let mut worst = 0.0_f64;
        for v in 0..inst.node_count() {
            let estimates = engine.phi_vector(inst, v, depth)?;
            for (pos, &e) in estimates.iter().enumerate() {
                worst = worst.max((exact[v][pos].ln() - e.ln()).abs());
            }
        }
        rows.push(ProfileRow {
            depth,
            max_abs_log_error: worst,
        });
    }
    Ok(rows)
}

fn to_f64(r: &num_rational::BigRational) -> Option<f64> {
    r.to_f64()
}
