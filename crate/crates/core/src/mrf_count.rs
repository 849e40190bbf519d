//! The truncated marginal recursion and partition-function loop for MRFs.

use crate::count::{CountError, CountResult, CountStep, ProfileRow, RegimeReport};
use crate::decay::mrf_error_bound;
use crate::graph::shifted_index;
use crate::mrf::{gamma_condition, MrfError, MrfInstance};
use crate::oracle::Oracle;
use rayon::prelude::*;

/// Depth-`d` estimate of `P(X_v = x)`: depth zero is the constant 1, deeper
/// levels evaluate the exact marginal recursion over conditioned
/// sub-instances with the children truncated at `d - 1`. No clamping is
/// applied; positivity of the potentials keeps every value in `(0, 1)`.
pub fn phi_mrf(m: &MrfInstance, v: usize, x: usize, d: usize) -> Result<f64, CountError> {
    if x >= m.alphabet() {
        return Err(CountError::Mrf(MrfError::SymbolOutOfRange {
            symbol: x,
            alphabet: m.alphabet(),
        }));
    }
    if d == 0 {
        require_positive(m)?;
        if v >= m.node_count() {
            return Err(CountError::Mrf(MrfError::NodeAbsent(v)));
        }
        return Ok(1.0);
    }
    Ok(phi_mrf_vector(m, v, d)?[x])
}

/// Estimates for every symbol at once; for `d >= 1` the vector sums to one
/// because the recursion normalizes over the outer symbol.
pub fn phi_mrf_vector(m: &MrfInstance, v: usize, d: usize) -> Result<Vec<f64>, CountError> {
    require_positive(m)?;
    if v >= m.node_count() {
        return Err(CountError::Mrf(MrfError::NodeAbsent(v)));
    }
    assert!(d >= 1, "the depth-zero estimate is the constant 1");
    let k = m.alphabet();
    let neighbors = m.graph().neighbors(v).to_vec();
    let scores: Vec<f64> = if neighbors.is_empty() {
        m.phi(v).to_vec()
    } else {
        let deleted = m.remove_node_plain(v)?;
        let neighbor_idx: Vec<usize> = neighbors.iter().map(|&u| shifted_index(u, v)).collect();
        let weights = assignment_weights(&deleted, &neighbor_idx, d - 1)?;
        let strides: Vec<usize> = (0..neighbors.len())
            .map(|step| k.pow((neighbors.len() - 1 - step) as u32))
            .collect();
        (0..k)
            .map(|x0| {
                let mut total = 0.0;
                for (a, w) in weights.iter().enumerate() {
                    let mut coupling = 1.0;
                    for (step, &u) in neighbors.iter().enumerate() {
                        let digit = (a / strides[step]) % k;
                        coupling *= m.f_between(v, x0, u, digit);
                    }
                    total += coupling * w;
                }
                m.phi(v)[x0] * total
            })
            .collect()
    };
    let denominator: f64 = scores.iter().sum();
    if denominator <= 0.0 {
        return Err(CountError::Phi(crate::phi::PhiError::ZeroDenominator));
    }
    Ok(scores.iter().map(|s| s / denominator).collect())
}

/// Weight of each neighbor assignment `(x_1..x_m)` in ascending lexicographic
/// order: the product over `k` of the depth-`d_child` estimate for `x_k` at
/// the k-th neighbor within the sub-instance that pins the first `k - 1`.
fn assignment_weights(
    current: &MrfInstance,
    neighbors: &[usize],
    d_child: usize,
) -> Result<Vec<f64>, CountError> {
    let Some((&first, rest)) = neighbors.split_first() else {
        return Ok(vec![1.0]);
    };
    let k = current.alphabet();
    let branch = |x: usize| -> Result<Vec<f64>, CountError> {
        let value = if d_child == 0 {
            1.0
        } else {
            phi_mrf_vector(current, first, d_child)?[x]
        };
        let conditioned = current.condition_on(&[(first, x)])?;
        let rest_idx: Vec<usize> = rest.iter().map(|&u| shifted_index(u, first)).collect();
        Ok(assignment_weights(&conditioned, &rest_idx, d_child)?
            .into_iter()
            .map(|w| value * w)
            .collect())
    };
    // branches are independent; results are concatenated in symbol order so
    // the flattened vector is identical with or without parallelism
    let branches: Vec<Vec<f64>> = if rest.len() >= 1 && d_child >= 2 {
        (0..k).into_par_iter().map(branch).collect::<Result<_, _>>()?
    } else {
        (0..k).map(branch).collect::<Result<_, _>>()?
    };
    Ok(branches.into_iter().flatten().collect())
}

fn require_positive(m: &MrfInstance) -> Result<(), CountError> {
    if m.is_relaxed() {
        return Err(CountError::Mrf(MrfError::PositivityViolated(
            "the truncated recursion requires strictly positive potentials".into(),
        )));
    }
    Ok(())
}

/// Estimates the partition function by eliminating nodes in ascending index
/// order, fixing symbol 0 at every step. The interaction-strength report is
/// recorded but not required to pass.
pub fn compute_z(m: &MrfInstance, d: usize) -> Result<CountResult, CountError> {
    require_positive(m)?;
    let report = gamma_condition(m);
    let mut residual = m.clone();
    let mut log_z_hat = 0.0;
    let mut steps = Vec::with_capacity(m.node_count());
    let mut theoretical_error = Some(0.0);
    for node in 0..m.node_count() {
        let p_hat = phi_mrf(&residual, 0, 0, d)?;
        if p_hat <= 0.0 {
            return Err(CountError::ZeroMarginalEstimate { node, value: 0 });
        }
        log_z_hat -= p_hat.ln();
        steps.push(CountStep {
            node,
            value: 0,
            p_hat,
        });
        if let Some(total) = theoretical_error.as_mut() {
            let step_report = gamma_condition(&residual);
            if step_report.gamma < 1.0 {
                *total += mrf_error_bound(
                    step_report.c_f,
                    residual.c_phi(),
                    step_report.delta_max,
                    residual.alphabet(),
                    step_report.gamma,
                    d,
                );
            } else {
                theoretical_error = None;
            }
        }
        residual = residual.reduce_node(0, 0)?;
    }
    // the empty residual keeps the leftover mass in its prefactor
    let log_prefactor = residual.log_prefactor();
    log_z_hat += log_prefactor;
    Ok(CountResult {
        log_z_hat,
        steps,
        depth_used: d,
        report: RegimeReport::Mrf(report),
        theoretical_error,
        log_prefactor,
    })
}

/// Worst `|ln P - ln Phi(d)|` over every node/symbol pair of the intact
/// instance, for each depth up to `d_max`.
pub fn mrf_marginal_error_profile(
    m: &MrfInstance,
    d_max: usize,
    oracle: &Oracle,
) -> Result<Vec<ProfileRow>, CountError> {
    let mut exact = Vec::with_capacity(m.node_count());
    for v in 0..m.node_count() {
        let row: Vec<f64> = (0..m.alphabet())
            .map(|x| oracle.exact_marginal_mrf(m, v, x))
            .collect::<Result<_, _>>()?;
        exact.push(row);
    }
    let mut rows = Vec::with_capacity(d_max + 1);
    for depth in 0..=d_max {
        let mut worst = 0.0_f64;
        for v in 0..m.node_count() {
            for x in 0..m.alphabet() {
                let estimate = phi_mrf(m, v, x, depth)?;
                worst = worst.max((exact[v][x].ln() - estimate.ln()).abs());
            }
        }
        rows.push(ProfileRow {
            depth,
            max_abs_log_error: worst,
        });
    }
    Ok(rows)
}
