//! Symmetric-polynomial recovery of an unordered integer multiset from its
//! residue multisets modulo pairwise-coprime parts.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::roots::integer_roots;
use super::FoldingTable;
use crate::error::{RcrtError, Result};
use crate::residue::{round_half_up, CrtPlan};

/// `e_0, ..., e_N` of the values, by expanding `∏(1 + v·t)`.
pub fn elementary_symmetric(values: &[BigRational]) -> Vec<BigRational> {
    let mut e = vec![BigRational::zero(); values.len() + 1];
    e[0] = BigRational::one();
    for (n, v) in values.iter().enumerate() {
        for k in (1..=n + 1).rev() {
            let term = &e[k - 1] * v;
            e[k] += term;
        }
    }
    e
}

/// Power sums `p_1, ..., p_n`.
pub fn power_sums(values: &[BigRational], n: usize) -> Vec<BigRational> {
    let mut sums = vec![BigRational::zero(); n];
    for v in values {
        let mut power = BigRational::one();
        for s in sums.iter_mut() {
            power *= v;
            *s += &power;
        }
    }
    sums
}

/// Newton's identities: `e_0 = 1` and
/// `e_i = (1/i)·Σ_{j=1..i} (−1)^{j−1}·p_j·e_{i−j}`.
pub fn newton_elementary(power_sums: &[BigRational]) -> Vec<BigRational> {
    let mut e = vec![BigRational::one()];
    for i in 1..=power_sums.len() {
        let mut acc = BigRational::zero();
        for j in 1..=i {
            let term = &power_sums[j - 1] * &e[i - j];
            if j % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        e.push(acc / BigInt::from(i));
    }
    e
}

/// `e_1, ..., e_n` of the values modulo `m`.
///
/// Uses Newton's identities on modular power sums when `1..n` are all
/// invertible modulo `m`, and the product expansion otherwise.
pub fn elementary_mod(values: &[BigInt], m: &BigInt, n: usize) -> Vec<BigInt> {
    let invertible = m > &BigInt::one() && (1..=n).all(|i| BigInt::from(i).gcd(m).is_one());
    if !invertible {
        let mut e = vec![BigInt::zero(); n + 1];
        e[0] = BigInt::one().mod_floor(m);
        for (count, v) in values.iter().enumerate() {
            for k in (1..=(count + 1).min(n)).rev() {
                e[k] = (&e[k] + &e[k - 1] * v).mod_floor(m);
            }
        }
        return e[1..].to_vec();
    }
    let mut sums = vec![BigInt::zero(); n];
    for v in values {
        let mut power = BigInt::one();
        for s in sums.iter_mut() {
            power = (power * v).mod_floor(m);
            *s = (&*s + &power).mod_floor(m);
        }
    }
    let mut e = vec![BigInt::one()];
    for i in 1..=n {
        let mut acc = BigInt::zero();
        for j in 1..=i {
            let term = &sums[j - 1] * &e[i - j];
            acc = if j % 2 == 1 { acc + term } else { acc - term };
        }
        let inv = BigInt::from(i).modinv(m).expect("checked invertible");
        e.push((acc * inv).mod_floor(m));
    }
    e[1..].to_vec()
}

/// Binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    (0..k.min(n - k)).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

/// Intermediate quantities of the symmetric-polynomial recovery.
///
/// With `S_1 = Σq̃_i`, `c = ⌊S_1/N⌋` and `t = S_1/N − c`, the shifted values
/// `w_i = q̃_i − c` are integers and `z_i = w_i − t` are the centered values
/// (they sum to zero). `e_k(w)` is known modulo `∏M_l`; the centered
/// `e_k(z)` are small (bounded by `C(N,k)(d/2)^k`), which fixes the lift.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymmetricProfile {
    #[serde(serialize_with = "crate::format::display")]
    pub n: usize,
    /// `∏M_l`.
    #[serde(with = "crate::format::decimal")]
    pub product: BigInt,
    /// `⟨Σ_i q̃_il⟩_{M_l}` for each modulus.
    #[serde(with = "crate::format::decimal_vec")]
    pub sum_residues: Vec<BigInt>,
    /// `S_1 = Σq̃_i`, read from `[−N, ∏M_l − N)`.
    #[serde(with = "crate::format::decimal")]
    pub s1: BigInt,
    /// `S_1/N`.
    #[serde(with = "crate::format::rational")]
    pub center: BigRational,
    /// `c = ⌊S_1/N⌋`.
    #[serde(with = "crate::format::decimal")]
    pub base: BigInt,
    /// Per modulus, `p_1..p_N` of `w` modulo `M_l`.
    #[serde(with = "crate::format::decimal_rows")]
    pub power_sum_residues: Vec<Vec<BigInt>>,
    /// Per modulus, `e_1..e_N` of `w` modulo `M_l`.
    #[serde(with = "crate::format::decimal_rows")]
    pub elementary_residues: Vec<Vec<BigInt>>,
    /// `p_1..p_N` of `w` as integers.
    #[serde(with = "crate::format::decimal_vec")]
    pub power_sums: Vec<BigInt>,
    /// `e_1..e_N` of `w`, lifted to integers.
    #[serde(with = "crate::format::decimal_vec")]
    pub elementary_shifted: Vec<BigInt>,
    /// `e_1..e_N` of the centered values `z`.
    #[serde(with = "crate::format::rational_vec")]
    pub elementary: Vec<BigRational>,
    /// Coefficients of `P(x) = Σ(−1)^k e_k(z) x^{N−k}`, leading first.
    #[serde(with = "crate::format::rational_vec")]
    pub polynomial: Vec<BigRational>,
    /// Roots of `P`, ascending: `q̃_i − S_1/N`.
    #[serde(with = "crate::format::rational_vec")]
    pub roots: Vec<BigRational>,
    /// `q̃_i`, ascending.
    #[serde(with = "crate::format::decimal_vec")]
    pub folding: Vec<BigInt>,
    /// `d = max q̃ − min q̃`.
    #[serde(with = "crate::format::decimal")]
    pub spread: BigInt,
    pub diagnostics: Vec<String>,
}

/// Recovers the folding numbers `q̃_1..q̃_N` from their unordered residues.
pub fn symmetric_gcrt(ft: &FoldingTable) -> Result<SymmetricProfile> {
    let parts = ft.parts();
    let rows = ft.folding();
    let n = rows[0].len();
    let plan = CrtPlan::new(parts);
    let product: BigInt = parts.iter().product();
    let count = BigInt::from(n);

    let sum_residues: Vec<BigInt> = rows
        .iter()
        .zip(parts)
        .map(|(row, m)| row.iter().sum::<BigInt>().mod_floor(m))
        .collect();
    let raw = plan.solve(&sum_residues)?;
    let s1 = if raw >= &product - &count { raw - &product } else { raw };
    let center = BigRational::new(s1.clone(), count.clone());
    let base = s1.div_floor(&count);
    let shift = BigRational::new(&s1 - &base * &count, count.clone());

    let mut power_sum_residues = Vec::with_capacity(parts.len());
    let mut elementary_residues = Vec::with_capacity(parts.len());
    for (row, m) in rows.iter().zip(parts) {
        let w: Vec<BigInt> = row.iter().map(|q| (q - &base).mod_floor(m)).collect();
        let mut sums = vec![BigInt::zero(); n];
        for v in &w {
            let mut power = BigInt::one();
            for s in sums.iter_mut() {
                power = (power * v).mod_floor(m);
                *s = (&*s + &power).mod_floor(m);
            }
        }
        power_sum_residues.push(sums);
        elementary_residues.push(elementary_mod(&w, m, n));
    }

    // Lift e_k(w) one order at a time: e_k(w) = known_k + e_k(z), where
    // known_k only involves lower orders of z.
    let mut centered = vec![BigRational::one()];
    let mut lifted = Vec::with_capacity(n);
    for k in 1..=n {
        let residues: Vec<BigInt> = elementary_residues.iter().map(|e| e[k - 1].clone()).collect();
        let residue = plan.solve(&residues)?;
        let mut known = BigRational::zero();
        for (j, e) in centered.iter().enumerate() {
            known += e * BigRational::from_integer(binomial(n - j, k - j)) * num_traits::pow(shift.clone(), k - j);
        }
        let steps = round_half_up(&((&known - BigRational::from_integer(residue.clone())) / BigRational::from_integer(product.clone())));
        let value = residue + steps * &product;
        centered.push(BigRational::from_integer(value.clone()) - known);
        lifted.push(value);
    }

    let mut coeffs = vec![BigInt::one()];
    for (k, e) in lifted.iter().enumerate() {
        coeffs.push(if k % 2 == 0 { -e } else { e.clone() });
    }
    let square_sum = &lifted[0] * &lifted[0] - (if n >= 2 { &lifted[1] * 2u32 } else { BigInt::zero() });
    if square_sum.is_negative() {
        return Err(RcrtError::BoundViolation(format!(
            "lifted symmetric values give a negative sum of squares ({square_sum}); the dynamic range condition fails"
        )));
    }
    let w_roots = integer_roots(&coeffs, &square_sum.sqrt())?;
    let folding: Vec<BigInt> = w_roots.iter().map(|w| w + &base).collect();
    let mut power_sums = vec![BigInt::zero(); n];
    for w in &w_roots {
        let mut power = BigInt::one();
        for s in power_sums.iter_mut() {
            power *= w;
            *s += &power;
        }
    }

    for (l, (row, m)) in rows.iter().zip(parts).enumerate() {
        let mut expected: Vec<BigInt> = folding.iter().map(|q| q.mod_floor(m)).collect();
        let mut given = row.clone();
        expected.sort();
        given.sort();
        if expected != given {
            return Err(RcrtError::BoundViolation(format!(
                "recovered folding numbers do not reproduce the residues modulo M_{} = {m}; \
                 the dynamic range condition fails",
                l + 1
            )));
        }
    }

    let spread = folding.last().expect("N >= 1") - folding.first().expect("N >= 1");
    let mut diagnostics = Vec::new();
    let half_spread = BigRational::new(spread.clone(), BigInt::from(2));
    for (k, e) in centered.iter().enumerate().take(n + 1).skip(2) {
        let bound = BigRational::from_integer(binomial(n, k)) * num_traits::pow(half_spread.clone(), k);
        if e.abs() > bound {
            diagnostics.push(format!("|e_{k}| = {} exceeds C(N,k)(d/2)^k = {bound}", e.abs()));
        }
        let needed = &bound * BigInt::from(2);
        if BigRational::from_integer(product.clone()) <= needed {
            return Err(RcrtError::BoundViolation(format!(
                "product of coprime parts {product} is not above 2·C({n},{k})·(d/2)^{k} = {needed} for the recovered spread d = {spread}"
            )));
        }
    }

    let roots: Vec<BigRational> = w_roots.iter().map(|w| BigRational::from_integer(w.clone()) - &shift).collect();
    let mut polynomial = vec![BigRational::one()];
    for (k, e) in centered.iter().enumerate().skip(1) {
        polynomial.push(if k % 2 == 1 { -e.clone() } else { e.clone() });
    }
    Ok(SymmetricProfile {
        n,
        product,
        sum_residues,
        s1,
        center,
        base,
        power_sum_residues,
        elementary_residues,
        power_sums,
        elementary_shifted: lifted,
        elementary: centered[1..].to_vec(),
        polynomial,
        roots,
        folding,
        spread,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }

    #[test]
    fn newton_matches_direct_expansion() {
        let values: Vec<BigRational> = [3, -1, 4, 1, -5, 9].iter().map(|&v| q(v)).collect();
        let direct = elementary_symmetric(&values);
        assert_eq!(newton_elementary(&power_sums(&values, values.len())), direct);
        assert_eq!(direct[1], q(11));
        assert_eq!(direct[6], q(540));
    }

    #[test]
    fn modular_forms_agree() {
        let values = [5i64, 17, 23, 2, 40];
        let exact = elementary_symmetric(&values.iter().map(|&v| q(v)).collect::<Vec<_>>());
        // 11 admits Newton's identities for n = 5; 12 and 9 do not
        for m in [11i64, 12, 9, 1] {
            let m = BigInt::from(m);
            let reduced: Vec<BigInt> = values.iter().map(|&v| BigInt::from(v).mod_floor(&m)).collect();
            let got = elementary_mod(&reduced, &m, values.len());
            let want: Vec<BigInt> = exact[1..].iter().map(|e| e.to_integer().mod_floor(&m)).collect();
            assert_eq!(got, want, "m = {m}");
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 2), BigInt::from(3));
        assert_eq!(binomial(8, 4), BigInt::from(70));
        assert_eq!(binomial(2, 3), BigInt::zero());
    }
}
