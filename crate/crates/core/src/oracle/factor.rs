//! Dense discrete factors and the elimination engine behind the oracle.
//!
//! One engine serves two value types: exact big integers for list-coloring
//! counts and doubles (with overflow-guarded rescaling) for MRF partition
//! functions.

use num_bigint::BigUint;
use num_traits::{One, Zero};

/// Values a factor table can hold.
pub(crate) trait FactorValue: Clone {
    fn zero() -> Self;
    fn one() -> Self;
    fn add_assign_val(&mut self, rhs: &Self);
    fn mul_val(&self, rhs: &Self) -> Self;

    /// Hook applied after each elimination step; may rescale the table and
    /// return a log-domain correction. Default: no-op.
    fn rescale(_values: &mut [Self]) -> f64 {
        0.0
    }
}

impl FactorValue for BigUint {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add_assign_val(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn mul_val(&self, rhs: &Self) -> Self {
        self * rhs
    }
}

impl FactorValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add_assign_val(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn mul_val(&self, rhs: &Self) -> Self {
        self * rhs
    }

    /// Divides the table by its maximum once values leave `[1e-100, 1e100]`,
    /// returning `ln(max)`. The threshold keeps moderate integer-valued
    /// tables bit-exact while still preventing overflow and underflow on
    /// wide-range potentials.
    fn rescale(values: &mut [Self]) -> f64 {
        let max = values.iter().cloned().fold(0.0_f64, f64::max);
        if max > 0.0 && !(1e-100..=1e100).contains(&max) {
            for v in values.iter_mut() {
                *v /= max;
            }
            max.ln()
        } else {
            0.0
        }
    }
}

/// A factor over a sorted scope of node indices. Values are stored row-major
/// with the last scope variable varying fastest; the per-node cardinalities
/// live outside the factor.
#[derive(Debug, Clone)]
pub(crate) struct Factor<T> {
    pub scope: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: FactorValue> Factor<T> {
    pub fn constant(value: T) -> Self {
        Factor {
            scope: Vec::new(),
            values: vec![value],
        }
    }

    pub fn over_one(var: usize, values: Vec<T>) -> Self {
        Factor {
            scope: vec![var],
            values,
        }
    }

    pub fn over_two(u: usize, v: usize, cards: &[usize], entry: impl Fn(usize, usize) -> T) -> Self {
        debug_assert!(u < v);
        let mut values = Vec::with_capacity(cards[u] * cards[v]);
        for a in 0..cards[u] {
            for b in 0..cards[v] {
                values.push(entry(a, b));
            }
        }
        Factor {
            scope: vec![u, v],
            values,
        }
    }
}

fn merge_scopes(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Index of `digits` (aligned with `scope`) in a row-major table.
fn encode(scope: &[usize], digits: &[usize], cards: &[usize]) -> usize {
    let mut idx = 0;
    for (&var, &d) in scope.iter().zip(digits) {
        idx = idx * cards[var] + d;
    }
    idx
}

fn multiply<T: FactorValue>(a: &Factor<T>, b: &Factor<T>, cards: &[usize]) -> Factor<T> {
    let scope = merge_scopes(&a.scope, &b.scope);
    let dims: Vec<usize> = scope.iter().map(|&v| cards[v]).collect();
    let total: usize = dims.iter().product();
    let pos = |sub: &[usize]| -> Vec<usize> {
        sub.iter()
            .map(|v| scope.iter().position(|w| w == v).unwrap())
            .collect()
    };
    let pos_a = pos(&a.scope);
    let pos_b = pos(&b.scope);

    let mut digits = vec![0usize; scope.len()];
    let mut values = Vec::with_capacity(total);
    for _ in 0..total {
        let da: Vec<usize> = pos_a.iter().map(|&p| digits[p]).collect();
        let db: Vec<usize> = pos_b.iter().map(|&p| digits[p]).collect();
        let ia = encode(&a.scope, &da, cards);
        let ib = encode(&b.scope, &db, cards);
        values.push(a.values[ia].mul_val(&b.values[ib]));
        // odometer increment, last digit fastest
        for p in (0..digits.len()).rev() {
            digits[p] += 1;
            if digits[p] < dims[p] {
                break;
            }
            digits[p] = 0;
        }
    }
    Factor { scope, values }
}

fn sum_out<T: FactorValue>(f: &Factor<T>, var: usize, cards: &[usize]) -> Factor<T> {
    let p = f
        .scope
        .iter()
        .position(|&v| v == var)
        .expect("variable must be in scope");
    let out_scope: Vec<usize> = f
        .scope
        .iter()
        .copied()
        .filter(|&v| v != var)
        .collect();
    let out_size: usize = out_scope.iter().map(|&v| cards[v]).product();
    let mut out_values = vec![T::zero(); out_size];

    let dims: Vec<usize> = f.scope.iter().map(|&v| cards[v]).collect();
    let mut digits = vec![0usize; f.scope.len()];
    for value in &f.values {
        let kept: Vec<usize> = digits
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != p)
            .map(|(_, &d)| d)
            .collect();
        let oi = encode(&out_scope, &kept, cards);
        out_values[oi].add_assign_val(value);
        for q in (0..digits.len()).rev() {
            digits[q] += 1;
            if digits[q] < dims[q] {
                break;
            }
            digits[q] = 0;
        }
    }
    Factor {
        scope: out_scope,
        values: out_values,
    }
}

/// Eliminates every node along `order`, returning the resulting scalar and
/// the accumulated rescaling correction (so the true scalar is
/// `scalar * exp(correction)`).
pub(crate) fn eliminate_all<T: FactorValue>(
    mut factors: Vec<Factor<T>>,
    cards: &[usize],
    order: &[usize],
) -> (T, f64) {
    let mut correction = 0.0;
    for &v in order {
        let (with_v, rest): (Vec<_>, Vec<_>) =
            factors.into_iter().partition(|f| f.scope.contains(&v));
        factors = rest;
        debug_assert!(!with_v.is_empty(), "every node carries a factor");
        let mut product = Factor::constant(T::one());
        for f in &with_v {
            product = multiply(&product, f, cards);
        }
        let mut summed = sum_out(&product, v, cards);
        correction += T::rescale(&mut summed.values);
        factors.push(summed);
    }
    let mut scalar = T::one();
    for f in &factors {
        debug_assert!(f.scope.is_empty());
        scalar = scalar.mul_val(&f.values[0]);
    }
    (scalar, correction)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eliminate_independent_nodes_multiplies_cardinalities() {
        let cards = vec![3usize, 4];
        let factors = vec![
            Factor::over_one(0, vec![1.0; 3]),
            Factor::over_one(1, vec![1.0; 4]),
        ];
        let (z, corr) = eliminate_all(factors, &cards, &[0, 1]);
        assert_eq!(z, 12.0);
        assert_eq!(corr, 0.0);
    }

    #[test]
    fn chain_sum_matches_direct_enumeration() {
        // two binary nodes, edge factor [0,1] with arbitrary entries
        let cards = vec![2usize, 2];
        let table = [1.5, 0.5, 2.0, 3.0];
        let factors = vec![
            Factor::over_one(0, vec![1.0, 2.0]),
            Factor::over_one(1, vec![3.0, 1.0]),
            Factor::over_two(0, 1, &cards, |a, b| table[a * 2 + b]),
        ];
        let (z, corr) = eliminate_all(factors, &cards, &[1, 0]);
        let mut direct = 0.0;
        let phi0 = [1.0, 2.0];
        let phi1 = [3.0, 1.0];
        for a in 0..2 {
            for b in 0..2 {
                direct += phi0[a] * phi1[b] * table[a * 2 + b];
            }
        }
        assert!((z * corr.exp() - direct).abs() < 1e-12);
    }

    #[test]
    fn rescale_triggers_only_outside_threshold() {
        let mut moderate = vec![1.0, 6.0, 7.0];
        assert_eq!(<f64 as FactorValue>::rescale(&mut moderate), 0.0);
        assert_eq!(moderate, vec![1.0, 6.0, 7.0]);
        let mut huge = vec![1e120, 2e120];
        let corr = <f64 as FactorValue>::rescale(&mut huge);
        assert!(corr > 0.0);
        assert_eq!(huge[1], 1.0);
    }
}
