//! Dynamic-range conditions for multi-integer recovery and the spread bound
//! on elementary symmetric values of zero-sum tuples.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;

use super::symmetric::{binomial, elementary_symmetric};
use crate::error::{RcrtError, Result};
use crate::residue::GammaModuli;

/// One inequality `product > bound`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Clause {
    pub name: String,
    #[serde(with = "crate::format::rational")]
    pub bound: BigRational,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DynamicRangeReport {
    /// Upper bound on the folding-number spread, `(B + 2δ)/Γ + 1`.
    #[serde(with = "crate::format::rational")]
    pub d_bound: BigRational,
    /// Upper bound on `Σq̃_i`, `⌊(ΣX + δ)/Γ⌋ + 2N`.
    #[serde(with = "crate::format::decimal")]
    pub sum_bound: BigInt,
    /// `∏M_l`.
    #[serde(with = "crate::format::decimal")]
    pub product: BigInt,
    /// `∏M_l` above the sum bound.
    pub sum_clause: Clause,
    /// `∏M_l > 2·C(N,k)·(d/2)^k` for `k = 2..N`.
    pub symmetric_clauses: Vec<Clause>,
    /// The looser `∏M_l > 2·C(N,k)·d^k`, for reference.
    pub loose_clauses: Vec<Clause>,
    /// With repeated residues: the product of the `⌈L/N⌉` smallest parts
    /// above `⌊max X/Γ⌋ + 1`, taking `max X ≤ (ΣX + (N−1)B)/N`.
    pub repeated_clause: Clause,
    /// Sum clause and all symmetric clauses hold.
    pub pass: bool,
}

/// Evaluates the dynamic-range conditions for `n` non-negative integers of
/// bandwidth `bandwidth` (max − min) and sum `sum_x`.
pub fn dynamic_range_check(
    n: usize,
    bandwidth: &BigInt,
    delta: &BigRational,
    gm: &GammaModuli,
    sum_x: &BigInt,
) -> DynamicRangeReport {
    let gamma = BigRational::from_integer(gm.gamma().clone());
    let product = gm.parts_product();
    let product_q = BigRational::from_integer(product.clone());
    let two = BigRational::from_integer(BigInt::from(2));
    let count = BigInt::from(n.max(1));

    let d_bound = (BigRational::from_integer(bandwidth.clone()) + &two * delta) / &gamma + BigRational::from_integer(1.into());
    let sum_bound = ((BigRational::from_integer(sum_x.clone()) + delta) / &gamma).floor().to_integer() + &count * 2u32;
    let clause = |name: String, bound: BigRational| Clause { pass: product_q > bound, name, bound };

    let sum_clause = clause("sum".into(), BigRational::from_integer(sum_bound.clone()));
    let half = &d_bound / &two;
    let mut symmetric_clauses = Vec::new();
    let mut loose_clauses = Vec::new();
    for k in 2..=n {
        let c = BigRational::from_integer(binomial(n, k) * 2u32);
        symmetric_clauses.push(clause(format!("k={k}"), &c * num_traits::pow(half.clone(), k)));
        loose_clauses.push(clause(format!("k={k}"), &c * num_traits::pow(d_bound.clone(), k)));
    }

    let max_x = (sum_x + (&count - 1u32) * bandwidth).div_floor(&count);
    let groups = gm.parts().len().div_ceil(n.max(1));
    let small: BigInt = gm.parts()[..groups].iter().product();
    let repeated_bound = max_x.div_floor(gm.gamma()) + 1u32;
    let repeated_clause = Clause {
        name: "repeated".into(),
        pass: small > repeated_bound,
        bound: BigRational::from_integer(repeated_bound),
    };

    let pass = sum_clause.pass && symmetric_clauses.iter().all(|c| c.pass);
    DynamicRangeReport {
        d_bound,
        sum_bound,
        product,
        sum_clause,
        symmetric_clauses,
        loose_clauses,
        repeated_clause,
        pass,
    }
}

/// `|e_V|` against `C(N,V)·(d/2)^V` for one order `V`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymmetricBound {
    #[serde(serialize_with = "crate::format::display")]
    pub order: usize,
    #[serde(with = "crate::format::rational")]
    pub value: BigRational,
    #[serde(with = "crate::format::rational")]
    pub bound: BigRational,
    pub holds: bool,
}

/// Checks `|e_V(Z)| ≤ C(N,V)·(d/2)^V` for `V = 2..N`, where `ΣZ = 0` and the
/// spread of `Z` is at most `d`.
pub fn symmetric_bound_check(values: &[BigRational], d: &BigRational) -> Result<Vec<SymmetricBound>> {
    if values.is_empty() {
        return Err(RcrtError::Domain("need at least one value".into()));
    }
    let total: BigRational = values.iter().sum();
    if !total.is_zero() {
        return Err(RcrtError::Domain(format!("values sum to {total}, not 0")));
    }
    let max = values.iter().max().expect("non-empty");
    let min = values.iter().min().expect("non-empty");
    if max - min > *d {
        return Err(RcrtError::Domain(format!("spread {} exceeds d = {d}", max - min)));
    }
    let n = values.len();
    let e = elementary_symmetric(values);
    let half = d / BigRational::from_integer(BigInt::from(2));
    Ok((2..=n)
        .map(|v| {
            let bound = BigRational::from_integer(binomial(n, v)) * num_traits::pow(half.clone(), v);
            SymmetricBound { order: v, holds: e[v].abs() <= bound, value: e[v].clone(), bound }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    #[test]
    fn worked_example_parameters_pass() {
        let gm = GammaModuli::from_u64s(50, &[7, 9, 11, 13]).unwrap();
        let report = dynamic_range_check(3, &BigInt::from(906), &q(4), &gm, &BigInt::from(1110 + 1995 + 2016));
        assert_eq!(report.product, BigInt::from(9009));
        assert_eq!(report.d_bound, BigRational::new(BigInt::from(964), BigInt::from(50)));
        // floor(5125/50) + 6
        assert_eq!(report.sum_bound, BigInt::from(108));
        assert!(report.pass);
        // the d^k form is too coarse for this instance
        assert!(report.loose_clauses[0].pass);
        assert!(!report.loose_clauses[1].pass);
        assert!(report.repeated_clause.pass);
    }

    #[test]
    fn wide_spread_fails() {
        let gm = GammaModuli::from_u64s(50, &[7, 9, 11, 13]).unwrap();
        let report = dynamic_range_check(3, &BigInt::from(40_000), &q(4), &gm, &BigInt::from(60_000));
        assert!(!report.pass);
        let zero = dynamic_range_check(2, &BigInt::zero(), &q(4), &gm, &BigInt::from(200));
        assert_eq!(zero.d_bound, BigRational::new(BigInt::from(29), BigInt::from(25)));
        assert!(zero.pass);
    }

    #[test]
    fn balanced_tuple_is_extremal() {
        let values = [q(-12), q(6), q(6)];
        let checks = symmetric_bound_check(&values, &q(18)).unwrap();
        assert_eq!(checks[0].value, q(-108));
        assert_eq!(checks[0].bound, q(243));
        assert_eq!(checks[1].value, q(-432));
        assert_eq!(checks[1].bound, q(729));
        assert!(checks.iter().all(|c| c.holds));

        let balanced = [q(-3), q(-3), q(3), q(3)];
        // equality is reached at the top order only
        let checks = symmetric_bound_check(&balanced, &q(6)).unwrap();
        assert_eq!(checks[0].value, q(-18));
        assert_eq!(checks[0].bound, q(54));
        assert_eq!(checks[1].value, q(0));
        assert_eq!(checks[2].value, q(81));
        assert_eq!(checks[2].bound, q(81));
    }

    #[test]
    fn preconditions_enforced() {
        assert!(symmetric_bound_check(&[q(1), q(1)], &q(5)).is_err());
        assert!(symmetric_bound_check(&[q(-4), q(4)], &q(5)).is_err());
    }
}
