//! Decay constants derived from `(alpha, beta)` and the error-bound formulas
//! they imply.

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstantsError {
    #[error("margin condition violated: (1-1/beta)*alpha*exp(-(1/alpha)(1+1/beta)) = {lhs} <= 2")]
    ConditionViolated { lhs: f64 },
    #[error("epsilon0 = {epsilon0} outside (0, 0.1); pick a larger beta")]
    Epsilon0OutOfRange { epsilon0: f64 },
}

/// Constants controlling the clamped marginal recursion and its contraction
/// rate. Constructed only through [`derive_constants`], so the relations
/// `2(1+epsilon0) = alpha*exp(-(1/alpha)(1+1/beta))` and
/// `1-epsilon = 1/((1-1/beta)(1+epsilon0))` hold exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayConstants {
    pub alpha: f64,
    pub beta: f64,
    /// In (0, 0.1); margin in the degree clamp `1/(2(1+epsilon0) m)`.
    pub epsilon0: f64,
    /// In (0, 1); per-level contraction factor is `1 - epsilon`.
    pub epsilon: f64,
    /// The probability clamp `1/beta`.
    pub clamp_beta: f64,
}

/// Derives `(epsilon0, epsilon)` from `(alpha, beta)`.
///
/// Fails with [`ConstantsError::ConditionViolated`] when the margin condition
/// does not hold, and with [`ConstantsError::Epsilon0OutOfRange`] when the
/// derived `epsilon0` is not below 0.1 (reported, never clamped).
pub fn derive_constants(alpha: f64, beta: f64) -> Result<DecayConstants, ConstantsError> {
    let core = alpha * (-(1.0 / alpha) * (1.0 + 1.0 / beta)).exp();
    let lhs = (1.0 - 1.0 / beta) * core;
    if !(lhs > 2.0) {
        return Err(ConstantsError::ConditionViolated { lhs });
    }
    let epsilon0 = core / 2.0 - 1.0;
    if epsilon0 >= 0.1 {
        return Err(ConstantsError::Epsilon0OutOfRange { epsilon0 });
    }
    let epsilon = 1.0 - 1.0 / ((1.0 - 1.0 / beta) * (1.0 + epsilon0));
    debug_assert!(epsilon0 > 0.0 && epsilon > 0.0 && epsilon < 1.0);
    Ok(DecayConstants {
        alpha,
        beta,
        epsilon0,
        epsilon,
        clamp_beta: 1.0 / beta,
    })
}

/// Recursion depth needed for an `n^{-4}` contraction residue:
/// `ceil(4 ln n / ln(1/(1-epsilon)))`.
pub fn required_depth(n: usize, epsilon: f64) -> usize {
    assert!(n >= 2, "instance size must be at least 2");
    assert!(epsilon > 0.0 && epsilon < 1.0, "epsilon must be in (0,1)");
    let d = 4.0 * (n as f64).ln() / (1.0 / (1.0 - epsilon)).ln();
    d.ceil() as usize
}

/// Upper bound on the max-over-colors log-marginal error after `d` levels of
/// the clamped recursion at a node of degree `m`:
/// `m * (ln q + delta * ln(beta/(beta-1))) * (1-epsilon)^d`.
pub fn theoretical_error_bound(
    q: usize,
    delta_max: usize,
    beta: f64,
    epsilon: f64,
    d: usize,
    m: usize,
) -> f64 {
    assert!(beta > 1.0, "beta must exceed 1");
    let depth_zero_gap = (q as f64).ln() + delta_max as f64 * (beta / (beta - 1.0)).ln();
    m as f64 * depth_zero_gap * (1.0 - epsilon).powi(d as i32)
}

/// MRF analogue: `gamma^d * (delta*(d+1)*ln c_f + ln k + ln c_phi)`.
pub fn mrf_error_bound(
    c_f: f64,
    c_phi: f64,
    delta_max: usize,
    alphabet: usize,
    gamma: f64,
    d: usize,
) -> f64 {
    let depth_zero_gap = delta_max as f64 * (d as f64 + 1.0) * c_f.ln()
        + (alphabet as f64).ln()
        + c_phi.ln();
    gamma.powi(d as i32) * depth_zero_gap
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_at_3_20() {
        let c = derive_constants(3.0, 20.0).unwrap();
        assert!((c.epsilon0 - 0.0570321).abs() < 1e-6, "{}", c.epsilon0);
        assert!((c.epsilon - 0.0041631).abs() < 1e-6, "{}", c.epsilon);
        assert_eq!(c.clamp_beta, 0.05);
        // construction identities hold to roundoff
        let core = 2.0 * (1.0 + c.epsilon0);
        let expect = 3.0 * (-(1.0_f64 / 3.0) * (1.0 + 1.0 / 20.0)).exp();
        assert!((core - expect).abs() < 1e-14);
        let one_minus_eps = 1.0 / ((1.0 - 1.0 / 20.0) * (1.0 + c.epsilon0));
        assert!((1.0 - c.epsilon - one_minus_eps).abs() < 1e-14);
    }

    #[test]
    fn condition_violated_at_3_15() {
        match derive_constants(3.0, 15.0) {
            Err(ConstantsError::ConditionViolated { lhs }) => {
                assert!((lhs - 1.96217).abs() < 1e-4);
            }
            other => panic!("expected ConditionViolated, got {other:?}"),
        }
    }

    #[test]
    fn large_beta_limit() {
        let c = derive_constants(3.0, 1e9).unwrap();
        // limit value 3 exp(-1/3)/2 - 1
        let limit = 3.0 * (-1.0_f64 / 3.0).exp() / 2.0 - 1.0;
        assert!((c.epsilon0 - limit).abs() < 1e-6, "{} vs {}", c.epsilon0, limit);
        assert!((c.epsilon0 - 0.0747970).abs() < 1e-5);
    }

    #[test]
    fn epsilon0_out_of_range_reported() {
        // alpha far above the threshold drives epsilon0 past 0.1
        match derive_constants(4.0, 100.0) {
            Err(ConstantsError::Epsilon0OutOfRange { epsilon0 }) => assert!(epsilon0 >= 0.1),
            other => panic!("expected Epsilon0OutOfRange, got {other:?}"),
        }
    }

    #[test]
    fn depth_formula_small_cases() {
        assert_eq!(required_depth(10, 0.5), 14);
        // epsilon = 1 - 1/e makes ln(1/(1-eps)) = 1, so depth = ceil(4 ln 2) = 3
        assert_eq!(required_depth(2, 1.0 - (-1.0_f64).exp()), 3);
    }

    #[test]
    fn depth_with_derived_epsilon_is_impractically_deep() {
        // With the (3, 20) constants the proof-grade depth runs to thousands,
        // which is why empirical depths are used for desk-scale runs.
        let c = derive_constants(3.0, 20.0).unwrap();
        let d = required_depth(10, c.epsilon);
        assert_eq!(d, 2208);
    }

    #[test]
    fn error_bound_values() {
        let b = theoretical_error_bound(26, 2, 20.0, 0.5, 0, 1);
        assert!((b - 3.3606831).abs() < 1e-6, "{b}");
        // epsilon near 1 kills the bound for any positive depth
        let tiny = theoretical_error_bound(26, 2, 20.0, 1.0 - 1e-12, 1, 1);
        assert!(tiny < 1e-11);
        // doubling depth multiplies by (1-eps)^d
        let eps = 0.3;
        let d = 5;
        let b1 = theoretical_error_bound(26, 2, 20.0, eps, d, 2);
        let b2 = theoretical_error_bound(26, 2, 20.0, eps, 2 * d, 2);
        assert!((b2 - b1 * (1.0 - eps).powi(d as i32)).abs() < 1e-12);
    }
}
