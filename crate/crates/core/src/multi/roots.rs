//! Exact integer roots of monic integer polynomials whose roots are all
//! integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{RcrtError, Result};

/// Windows up to this width are scanned directly.
const SCAN_WIDTH: u64 = 1 << 16;

/// How [`integer_roots_with`] looks for roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RootStrategy {
    /// Scan narrow windows, otherwise descend with Newton steps.
    #[default]
    Auto,
    /// Test every integer from `bound` down to `−bound`.
    Scan,
    /// Integer Newton iteration from `bound` downwards.
    Newton,
}

/// Value at `x` of the polynomial with descending coefficients.
pub fn evaluate(coeffs: &[BigInt], x: &BigInt) -> BigInt {
    coeffs.iter().fold(BigInt::zero(), |acc, c| acc * x + c)
}

fn derivative(coeffs: &[BigInt]) -> Vec<BigInt> {
    let degree = coeffs.len() - 1;
    coeffs[..degree]
        .iter()
        .enumerate()
        .map(|(i, c)| c * BigInt::from(degree - i))
        .collect()
}

/// Divides by `(x − root)`, which must be exact.
fn deflate(coeffs: &[BigInt], root: &BigInt) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(coeffs.len() - 1);
    let mut carry = BigInt::zero();
    for c in &coeffs[..coeffs.len() - 1] {
        carry = carry * root + c;
        out.push(carry.clone());
    }
    out
}

/// All roots, with multiplicity, ascending, of a monic polynomial whose roots
/// are integers in `[−bound, bound]`.
pub fn integer_roots(coeffs: &[BigInt], bound: &BigInt) -> Result<Vec<BigInt>> {
    integer_roots_with(coeffs, bound, RootStrategy::Auto)
}

pub fn integer_roots_with(coeffs: &[BigInt], bound: &BigInt, strategy: RootStrategy) -> Result<Vec<BigInt>> {
    if coeffs.first().is_none_or(|c| !c.is_one()) {
        return Err(RcrtError::Internal("root finder needs a monic polynomial".into()));
    }
    let bound = bound.abs();
    let narrow = &bound * 2u32 < BigInt::from(SCAN_WIDTH);
    let mut roots = match strategy {
        RootStrategy::Scan => scan(coeffs, &bound)?,
        RootStrategy::Newton => newton(coeffs, &bound)?,
        RootStrategy::Auto if narrow => scan(coeffs, &bound)?,
        RootStrategy::Auto => newton(coeffs, &bound)?,
    };
    roots.reverse();
    Ok(roots)
}

fn not_split(found: usize, degree: usize, bound: &BigInt) -> RcrtError {
    RcrtError::BoundViolation(format!(
        "only {found} of {degree} roots are integers in [-{bound}, {bound}]; the dynamic range condition fails"
    ))
}

/// Roots in descending order.
fn scan(coeffs: &[BigInt], bound: &BigInt) -> Result<Vec<BigInt>> {
    let degree = coeffs.len() - 1;
    let mut poly = coeffs.to_vec();
    let mut roots = Vec::with_capacity(degree);
    let mut x = bound.clone();
    let low = -bound;
    while poly.len() > 1 && x >= low {
        if evaluate(&poly, &x).is_zero() {
            poly = deflate(&poly, &x);
            roots.push(x.clone());
        } else {
            x -= 1u32;
        }
    }
    if poly.len() > 1 {
        return Err(not_split(roots.len(), degree, bound));
    }
    Ok(roots)
}

/// Roots in descending order.
///
/// Above the largest root a real-rooted monic polynomial is positive,
/// increasing and convex, so a Newton step never passes that root. Flooring
/// keeps the iterate above it as well, since the root is an integer. Each
/// step lowers `x` by at least one, and every hit is deflated in place.
fn newton(coeffs: &[BigInt], bound: &BigInt) -> Result<Vec<BigInt>> {
    let degree = coeffs.len() - 1;
    let mut poly = coeffs.to_vec();
    let mut roots = Vec::with_capacity(degree);
    let mut x = bound.clone();
    let low = -bound;
    while poly.len() > 1 {
        let value = evaluate(&poly, &x);
        if value.is_zero() {
            poly = deflate(&poly, &x);
            roots.push(x.clone());
            continue;
        }
        let slope = evaluate(&derivative(&poly), &x);
        if !value.is_positive() || !slope.is_positive() {
            return Err(not_split(roots.len(), degree, bound));
        }
        x -= Integer::div_ceil(&value, &slope);
        if x < low {
            return Err(not_split(roots.len(), degree, bound));
        }
    }
    Ok(roots)
}

/// Monic coefficients, descending, of `∏(x − r)`.
pub fn from_roots(roots: &[BigInt]) -> Vec<BigInt> {
    let mut coeffs = vec![BigInt::one()];
    for r in roots {
        coeffs.push(BigInt::zero());
        for i in (1..coeffs.len()).rev() {
            let prev = coeffs[i - 1].clone();
            coeffs[i] -= prev * r;
        }
    }
    coeffs
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn bigs(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| big(x)).collect()
    }

    #[test]
    fn cubic_from_the_worked_example() {
        let coeffs = bigs(&[1, 0, -108, 432]);
        for strategy in [RootStrategy::Scan, RootStrategy::Newton, RootStrategy::Auto] {
            assert_eq!(integer_roots_with(&coeffs, &big(19), strategy).unwrap(), bigs(&[-12, 6, 6]));
        }
        assert_eq!(from_roots(&bigs(&[-12, 6, 6])), coeffs);
    }

    #[test]
    fn strategies_agree_on_wide_windows() {
        let roots = bigs(&[-900_000, -5, -5, 0, 3, 3, 3, 1_234_567]);
        let coeffs = from_roots(&roots);
        let bound = big(2_000_000);
        assert_eq!(integer_roots_with(&coeffs, &bound, RootStrategy::Newton).unwrap(), roots);
        assert_eq!(integer_roots(&coeffs, &bound).unwrap(), roots);
        let near = from_roots(&bigs(&[-40, 2, 2, 39]));
        assert_eq!(
            integer_roots_with(&near, &big(40), RootStrategy::Scan).unwrap(),
            integer_roots_with(&near, &big(40), RootStrategy::Newton).unwrap()
        );
    }

    #[test]
    fn rejects_polynomials_without_integer_roots() {
        // x^2 - 2 and x^2 + 1
        for coeffs in [bigs(&[1, 0, -2]), bigs(&[1, 0, 1]), from_roots(&bigs(&[50, 1]))] {
            for strategy in [RootStrategy::Scan, RootStrategy::Newton] {
                assert!(matches!(
                    integer_roots_with(&coeffs, &big(10), strategy),
                    Err(RcrtError::BoundViolation(_))
                ));
            }
        }
    }

    #[test]
    fn linear_and_constant() {
        assert_eq!(integer_roots(&bigs(&[1, 7]), &big(7)).unwrap(), bigs(&[-7]));
        assert_eq!(integer_roots(&bigs(&[1]), &big(0)).unwrap(), Vec::<BigInt>::new());
    }
}
