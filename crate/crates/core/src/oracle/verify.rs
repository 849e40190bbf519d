//! Identity checks tying the oracle to the cavity products and marginal
//! recursions that the counting algorithms are built on.

use super::{Oracle, OracleError};
use crate::graph::shifted_index;
use crate::instance::ColoringInstance;
use crate::mrf::MrfInstance;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

impl Oracle {
    /// Telescopes the greedy coloring through the elimination chain and
    /// compares the product of inverse marginals with the exact count.
    /// Returns the relative defect, which is exactly zero in rational
    /// arithmetic.
    pub fn verify_cavity_coloring(&self, inst: &ColoringInstance) -> Result<f64, OracleError> {
        let colors = inst
            .greedy_coloring()
            .map_err(|s| OracleError::GreedyStuck(s.0))?;
        let z = BigRational::from_integer(BigInt::from(self.exact_z_coloring(inst)?));
        let mut residual = inst.clone();
        let mut product = BigRational::one();
        for &color in &colors {
            // ascending elimination keeps the next node at index 0
            let marginal = self.exact_marginal_coloring(&residual, 0, color)?;
            product *= marginal.recip();
            residual = residual.strike_and_remove(0, color);
        }
        let defect = ((product - &z) / &z).abs();
        Ok(defect.to_f64().unwrap_or(f64::NAN))
    }

    /// Telescopes the all-zeros assignment through the node-elimination
    /// operator and compares the product of inverse marginals with the exact
    /// partition function. Returns the relative defect.
    pub fn verify_cavity_mrf(&self, m: &MrfInstance) -> Result<f64, OracleError> {
        if m.is_relaxed() {
            return Err(OracleError::PositivityRequired);
        }
        let log_z = self.exact_log_z_mrf(m)?;
        let mut residual = m.clone();
        let mut log_product = 0.0;
        for _ in 0..m.node_count() {
            let p = self.exact_marginal_mrf(&residual, 0, 0)?;
            log_product -= p.ln();
            residual = residual.reduce_node(0, 0)?;
        }
        // the empty residual holds the leftover mass in its prefactor
        let log_identity = log_product + residual.log_prefactor();
        Ok(((log_identity - log_z).exp() - 1.0).abs())
    }

    /// Evaluates the marginal recursion with oracle marginals of the reduced
    /// pairs on both sides and returns the worst absolute defect over the
    /// colors of `v` (exactly zero in rational arithmetic).
    pub fn verify_marginal_recursion(
        &self,
        inst: &ColoringInstance,
        v: usize,
    ) -> Result<f64, OracleError> {
        let degree = inst.graph().degree(v);
        if degree == 0 {
            return Err(OracleError::IsolatedNode(v));
        }
        let neighbors = inst.graph().neighbors(v).to_vec();
        let colors = inst.list(v).to_vec();
        let mut products: Vec<BigRational> = Vec::with_capacity(colors.len());
        for &j in &colors {
            let mut product = BigRational::one();
            for (rank0, &u) in neighbors.iter().enumerate() {
                let pair = inst.reduced_pair(v, rank0 + 1, j)?;
                let p = self.exact_marginal_coloring(&pair, shifted_index(u, v), j)?;
                product *= BigRational::one() - p;
            }
            products.push(product);
        }
        let denominator: BigRational = products.iter().sum();
        if denominator.is_zero() {
            return Err(OracleError::RecursionDenominatorZero);
        }
        let mut worst = BigRational::zero();
        for (&i, product) in colors.iter().zip(&products) {
            let lhs = self.exact_marginal_coloring(inst, v, i)?;
            let rhs = product / &denominator;
            let defect = (lhs - rhs).abs();
            if defect > worst {
                worst = defect;
            }
        }
        Ok(worst.to_f64().unwrap_or(f64::NAN))
    }

    /// MRF analogue of the marginal recursion check: the recursion is
    /// evaluated with oracle marginals of the conditioned sub-instances and
    /// compared against the oracle marginal of `v` for every symbol.
    pub fn verify_marginal_recursion_mrf(
        &self,
        m: &MrfInstance,
        v: usize,
    ) -> Result<f64, OracleError> {
        if m.is_relaxed() {
            return Err(OracleError::PositivityRequired);
        }
        let k = m.alphabet();
        let neighbors = m.graph().neighbors(v).to_vec();
        let deleted = m.remove_node_plain(v)?;
        let neighbor_idx: Vec<usize> = neighbors.iter().map(|&u| shifted_index(u, v)).collect();
        let weights = self.oracle_assignment_weights(&deleted, &neighbor_idx)?;

        let score = |x0: usize| -> f64 {
            let mut total = 0.0;
            for (a, w) in weights.iter().enumerate() {
                let mut coupling = 1.0;
                let mut rest = a;
                // decode assignment in lexicographic order, first neighbor first
                for step in 0..neighbors.len() {
                    let digit = rest / k.pow((neighbors.len() - 1 - step) as u32);
                    rest %= k.pow((neighbors.len() - 1 - step) as u32);
                    coupling *= m.f_between(v, x0, neighbors[step], digit);
                }
                total += coupling * w;
            }
            m.phi(v)[x0] * total
        };
        let scores: Vec<f64> = (0..k).map(score).collect();
        let denominator: f64 = scores.iter().sum();

        let mut worst = 0.0_f64;
        for x0 in 0..k {
            let lhs = self.exact_marginal_mrf(m, v, x0)?;
            worst = worst.max((lhs - scores[x0] / denominator).abs());
        }
        Ok(worst)
    }

    /// Weight of each neighbor assignment under nested conditioning, using
    /// oracle marginals: `w(x_1..x_m) = prod_k P_{sub_k}(X_{v_k} = x_k)`,
    /// where `sub_k` pins the first `k-1` neighbors.
    fn oracle_assignment_weights(
        &self,
        current: &MrfInstance,
        neighbors: &[usize],
    ) -> Result<Vec<f64>, OracleError> {
        let Some((&first, rest)) = neighbors.split_first() else {
            return Ok(vec![1.0]);
        };
        let k = current.alphabet();
        let mut out = Vec::with_capacity(k.pow(neighbors.len() as u32));
        for x in 0..k {
            let p = self.exact_marginal_mrf(current, first, x)?;
            let conditioned = current.condition_on(&[(first, x)])?;
            let rest_idx: Vec<usize> = rest.iter().map(|&u| shifted_index(u, first)).collect();
            for w in self.oracle_assignment_weights(&conditioned, &rest_idx)? {
                out.push(p * w);
            }
        }
        Ok(out)
    }
}
