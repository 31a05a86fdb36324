//! Prime modulus selection: capacity of prime sets, random selection with
//! success-probability bounds, and common-factor reduction.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{RcrtError, Result};
use crate::primes::{is_prime, primes_in_range};
use crate::range::{capacity_at_least, capacity_for_delta_with_budget, DEFAULT_SCAN_BUDGET};
use crate::residue::{CrtPlan, ModulusSet};

/// Largest `β` whose interval `[2^{β−1}, 2^β]` is sieved by default.
pub const MAX_SIEVE_BETA: u32 = 26;

/// Capacity of a prime set: `x − 1` for the smallest `x ≥ delta4` such that
/// `∏p_l` divides `(x − delta4 + 1)···x`.
///
/// For primes the divisibility means each `p_l` hits the window, i.e.
/// `x ≡ a_l (mod p_l)` for some offsets `a_l < delta4`. Each offset pattern has
/// one solution modulo `∏p_l`; the answer is the least of them (lifted by
/// `∏p_l` when it falls below `delta4`). `budget` caps the `delta4^L` patterns.
pub fn prime_capacity(primes: &ModulusSet, delta4: &BigInt, budget: u64) -> Result<BigInt> {
    if let Some(p) = primes.moduli().iter().find(|p| !is_prime(p)) {
        return Err(RcrtError::InvalidModuli(format!("{p} is not prime")));
    }
    let smallest = primes.min_modulus();
    if delta4 < &BigInt::one() || delta4 >= smallest {
        return Err(RcrtError::Domain(format!(
            "delta4 = {delta4} must lie in [1, {smallest}) for a prime set"
        )));
    }
    let width = delta4.to_u64().expect("delta4 is below a modulus that fits the budget check");
    let patterns = BigInt::from(width).pow(primes.len() as u32);
    if patterns > BigInt::from(budget) {
        return Err(RcrtError::Budget(format!(
            "{patterns} offset patterns exceed the budget of {budget}"
        )));
    }
    let plan = CrtPlan::new(primes.moduli());
    let product = primes.lcm();
    let mut offsets = vec![0u64; primes.len()];
    let mut best: Option<BigInt> = None;
    loop {
        let residues: Vec<BigInt> = offsets.iter().map(|&a| BigInt::from(a)).collect();
        let mut x = plan.solve(&residues)?;
        if &x < delta4 {
            x += product;
        }
        if best.as_ref().is_none_or(|b| &x < b) {
            best = Some(x);
        }
        let mut i = 0;
        while i < offsets.len() && offsets[i] + 1 == width {
            offsets[i] = 0;
            i += 1;
        }
        if i == offsets.len() {
            break;
        }
        offsets[i] += 1;
    }
    Ok(best.expect("at least one pattern") - 1u32)
}

/// Parameters of a random prime selection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelectionSpec {
    /// Primes are drawn from `[2^{β−1}, 2^β]`.
    #[serde(serialize_with = "crate::format::display")]
    pub beta: u32,
    /// Number of primes `L`.
    #[serde(serialize_with = "crate::format::display")]
    pub count: usize,
    /// Target `Δ = 4δ`.
    #[serde(with = "crate::format::decimal")]
    pub delta4: BigInt,
    /// Required dynamic range.
    #[serde(with = "crate::format::decimal")]
    pub k_target: BigInt,
}

impl SelectionSpec {
    pub fn new(beta: u32, count: usize, delta4: BigInt, k_target: BigInt) -> Result<Self> {
        if beta < 3 {
            return Err(RcrtError::Domain(format!("beta must be >= 3, got {beta}")));
        }
        if count < 2 {
            return Err(RcrtError::Domain(format!("need at least two primes, got {count}")));
        }
        if delta4 < BigInt::one() {
            return Err(RcrtError::Domain(format!("delta4 must be >= 1, got {delta4}")));
        }
        if k_target < BigInt::zero() {
            return Err(RcrtError::Domain(format!("K target must be >= 0, got {k_target}")));
        }
        Ok(Self { beta, count, delta4, k_target })
    }

    /// `4δ·log₂K < 2^{β−1}`, the regime where the bounds say something.
    pub fn is_informative(&self) -> bool {
        let k = self.k_target.to_f64().unwrap_or(f64::INFINITY).max(1.0);
        self.delta4.to_f64().unwrap_or(f64::INFINITY) * k.log2() < 2f64.powi(self.beta as i32 - 1)
    }
}

/// A probability lower bound, before and after clamping to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundValue {
    #[serde(serialize_with = "crate::format::display")]
    pub raw: f64,
    #[serde(serialize_with = "crate::format::display")]
    pub value: f64,
    /// False outside the informative regime, where the bound is vacuous.
    pub informative: bool,
}

impl BoundValue {
    fn new(raw: f64, informative: bool) -> Self {
        let value = if raw.is_nan() { 0.0 } else { raw.clamp(0.0, 1.0) };
        Self { raw, value, informative }
    }
}

/// `1 − ⌊K/p_L⌋·(4δ·log₂K / 2^{β−1})^L`.
pub fn prob_bound_simple(spec: &SelectionSpec, p_l: &BigInt, k: &BigInt) -> BoundValue {
    let folds = (k / p_l).to_f64().unwrap_or(f64::INFINITY);
    let log_k = k.to_f64().unwrap_or(f64::INFINITY).max(1.0).log2();
    let ratio = spec.delta4.to_f64().unwrap_or(f64::INFINITY) * log_k / 2f64.powi(spec.beta as i32 - 1);
    BoundValue::new(1.0 - folds * ratio.powi(spec.count as i32), spec.is_informative())
}

/// `Γ(s, z) = (s−1)!·e^{−z}·Σ_{k<s} z^k/k!` for integer `s ≥ 1`; any real `z`.
pub fn upper_incomplete_gamma(s: u32, z: f64) -> f64 {
    assert!(s >= 1, "integer order must be >= 1");
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut factorial = 1.0;
    for k in 1..s {
        term *= z / k as f64;
        sum += term;
        factorial *= k as f64;
    }
    factorial * (-z).exp() * sum
}

/// `1 − (4δ)^{L+1}·(Γ(L+1, a) − Γ(L+1, b)) / (p_L·ln^L 2·2^{L(β−1)}·(−1)^L)`
/// with `a = −ln((⌊K/p_L⌋ + 1)·p_L)` and `b = −ln p_L`.
///
/// The numerator is `(−1)^L·∫ ln^L x dx` over `[p_L, (⌊K/p_L⌋+1)·p_L]`, which
/// is where the sign factor comes from.
pub fn prob_bound_gamma(spec: &SelectionSpec, p_l: &BigInt, k: &BigInt) -> BoundValue {
    let l = spec.count as i32;
    let p = p_l.to_f64().unwrap_or(f64::INFINITY);
    let top = ((k / p_l) + 1u32).to_f64().unwrap_or(f64::INFINITY) * p;
    let (a, b) = (-top.ln(), -p.ln());
    let order = spec.count as u32 + 1;
    let integral = upper_incomplete_gamma(order, a) - upper_incomplete_gamma(order, b);
    let delta4 = spec.delta4.to_f64().unwrap_or(f64::INFINITY);
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    let denominator = p * std::f64::consts::LN_2.powi(l) * 2f64.powi(l * (spec.beta as i32 - 1)) * sign;
    BoundValue::new(1.0 - delta4.powi(l + 1) * integral / denominator, spec.is_informative())
}

/// Result of [`random_select`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionReport {
    pub spec: SelectionSpec,
    #[serde(serialize_with = "crate::format::display")]
    pub seed: u64,
    /// The first draw.
    #[serde(with = "crate::format::decimal_vec")]
    pub primes: Vec<BigInt>,
    /// Capacity of the first draw for `delta4`.
    #[serde(with = "crate::format::decimal")]
    pub achieved_k: BigInt,
    pub success: bool,
    /// The `p_L` plugged into the bounds: the smallest prime of the interval,
    /// the most conservative choice since `⌊K/p_L⌋` is then largest.
    #[serde(with = "crate::format::decimal")]
    pub bound_p_l: BigInt,
    pub bound_simple: BoundValue,
    pub bound_gamma: BoundValue,
    /// True when every `L`-subset of the interval was evaluated.
    pub exhaustive: bool,
    #[serde(serialize_with = "crate::format::display")]
    pub trials: u64,
    #[serde(serialize_with = "crate::format::display")]
    pub successes: u64,
    #[serde(serialize_with = "crate::format::display")]
    pub empirical_rate: f64,
}

fn interval_primes(beta: u32) -> Result<Vec<u64>> {
    if beta > MAX_SIEVE_BETA {
        return Err(RcrtError::Budget(format!(
            "beta = {beta} exceeds the sieve limit of {MAX_SIEVE_BETA}"
        )));
    }
    Ok(primes_in_range(1 << (beta - 1), 1 << beta))
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let mut acc: u64 = 1;
    for i in 0..k.min(n - k.min(n)) {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(if k > n { 0 } else { acc })
}

/// Capacity of a prime set, by whichever characterization is cheaper.
pub fn achieved_capacity(primes: &ModulusSet, delta4: &BigInt) -> Result<BigInt> {
    let patterns = delta4.pow(primes.len() as u32);
    let multiples = primes.lcm() / primes.max_modulus();
    if patterns <= multiples {
        prime_capacity(primes, delta4, DEFAULT_SCAN_BUDGET)
    } else {
        capacity_for_delta_with_budget(primes, delta4, DEFAULT_SCAN_BUDGET)
    }
}

/// Draws `L` distinct primes from `[2^{β−1}, 2^β]`, reports the first draw,
/// and estimates the success rate over `trials` draws. When the interval has
/// at most `trials` subsets of size `L`, all of them are evaluated instead.
pub fn random_select(spec: &SelectionSpec, seed: u64, trials: u64) -> Result<SelectionReport> {
    let pool = interval_primes(spec.beta)?;
    if pool.len() < spec.count {
        return Err(RcrtError::Domain(format!(
            "only {} primes in [2^{}, 2^{}], need {}",
            pool.len(),
            spec.beta - 1,
            spec.beta,
            spec.count
        )));
    }
    if spec.delta4 >= BigInt::from(pool[0]) {
        return Err(RcrtError::Domain(format!(
            "delta4 = {} must be below the smallest prime {}",
            spec.delta4, pool[0]
        )));
    }
    if trials == 0 {
        return Err(RcrtError::Domain("at least one trial is required".into()));
    }
    let to_set = |idx: &[usize]| {
        let mut ps: Vec<u64> = idx.iter().map(|&i| pool[i]).collect();
        ps.sort_unstable();
        ModulusSet::from_u64s(&ps)
    };
    let succeeds = |set: &ModulusSet| capacity_at_least(set, &spec.delta4, &spec.k_target, DEFAULT_SCAN_BUDGET);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first = to_set(&sample(&mut rng, pool.len(), spec.count).into_vec())?;
    let achieved_k = achieved_capacity(&first, &spec.delta4)?;

    let subsets = binomial(pool.len() as u64, spec.count as u64);
    let exhaustive = subsets.is_some_and(|n| n <= trials);
    let (mut done, mut successes) = (0u64, 0u64);
    if exhaustive {
        let mut idx: Vec<usize> = (0..spec.count).collect();
        loop {
            successes += succeeds(&to_set(&idx)?)? as u64;
            done += 1;
            // next combination in lexicographic order
            let n = pool.len();
            let Some(i) = (0..spec.count).rev().find(|&i| idx[i] < n - spec.count + i) else {
                break;
            };
            idx[i] += 1;
            for j in i + 1..spec.count {
                idx[j] = idx[j - 1] + 1;
            }
        }
    } else {
        successes += succeeds(&first)? as u64;
        done = 1;
        while done < trials {
            successes += succeeds(&to_set(&sample(&mut rng, pool.len(), spec.count).into_vec())?)? as u64;
            done += 1;
        }
    }

    let bound_p_l = BigInt::from(pool[0]);
    Ok(SelectionReport {
        spec: spec.clone(),
        seed,
        primes: first.moduli().to_vec(),
        success: achieved_k >= spec.k_target,
        achieved_k,
        bound_simple: prob_bound_simple(spec, &bound_p_l, &spec.k_target),
        bound_gamma: prob_bound_gamma(spec, &bound_p_l, &spec.k_target),
        bound_p_l,
        exhaustive,
        trials: done,
        successes,
        empirical_rate: successes as f64 / done as f64,
    })
}

/// `(⌈K/Γ⌉, ⌈delta4/Γ⌉)`: the problem left after factoring out `Γ`. Ceilings
/// keep the reduced problem at least as hard as the original.
pub fn gamma_reduce(k: &BigInt, delta4: &BigInt, gamma: &BigInt) -> Result<(BigInt, BigInt)> {
    if gamma < &BigInt::one() {
        return Err(RcrtError::Domain(format!("gamma must be >= 1, got {gamma}")));
    }
    Ok((Integer::div_ceil(k, gamma), Integer::div_ceil(delta4, gamma)))
}
