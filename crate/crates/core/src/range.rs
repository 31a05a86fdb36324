//! Shift pseudo-metric, minimum distance `Δ(K)`, the dynamic-range
//! staircase and capacity bounds.
//!
//! Distances are kept on the integer `Δ = 4δ` scale throughout.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{RcrtError, Result};
use crate::primes::is_prime;
use crate::residue::{ModulusSet, ResidueVector};

/// Default cap on the number of integers a linear scan may visit.
pub const DEFAULT_SCAN_BUDGET: u64 = 100_000_000;

/// A value of the shift pseudo-metric.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MetricValue(pub BigInt);

impl MetricValue {
    pub fn value(&self) -> &BigInt {
        &self.0
    }
}

/// `ρ(x, y) = max_{l,j} |(x_l − x_j) − (y_l − y_j)|`.
///
/// With `d_l = x_l − y_l` this is `max d − min d`, which avoids the pair loop.
pub fn shift_rho(x: &ResidueVector, y: &ResidueVector) -> Result<MetricValue> {
    if x.set() != y.set() {
        return Err(RcrtError::ModulusMismatch(format!(
            "cannot compare vectors over {} and {}",
            x.set(),
            y.set()
        )));
    }
    let diffs = x.residues().iter().zip(y.residues()).map(|(a, b)| a - b);
    let (lo, hi) = diffs.fold((None::<BigInt>, None::<BigInt>), |(lo, hi), d| {
        let lo = Some(lo.map_or(d.clone(), |v| v.min(d.clone())));
        let hi = Some(hi.map_or(d.clone(), |v| v.max(d)));
        (lo, hi)
    });
    Ok(MetricValue(hi.unwrap_or_default() - lo.unwrap_or_default()))
}

/// One stair of the profile: `Δ(K) = delta4` for `k ≤ K < next k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileStep {
    #[serde(rename = "K", with = "crate::format::decimal")]
    pub k: BigInt,
    #[serde(with = "crate::format::decimal")]
    pub delta4: BigInt,
}

impl ProfileStep {
    fn new(k: impl Into<BigInt>, delta4: impl Into<BigInt>) -> Self {
        Self { k: k.into(), delta4: delta4.into() }
    }
}

/// The staircase of `(K_n, Δ_n)` pairs for a modulus set.
///
/// `K_n` is the smallest `X` at which the running minimum first reaches
/// `Δ_n`, so `Δ(K) = Δ_n` for `K_n ≤ K < K_{n+1}` and the last step extends
/// to `lcm − 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeProfile {
    set: ModulusSet,
    steps: Vec<ProfileStep>,
    diagnostics: Vec<String>,
}

impl RangeProfile {
    pub fn set(&self) -> &ModulusSet {
        &self.set
    }

    pub fn steps(&self) -> &[ProfileStep] {
        &self.steps
    }

    /// Notes from cross-checks, such as recursion/scan disagreements.
    pub fn diagnostics(&self) -> &[String] {
        &self.diagnostics
    }

    pub fn lcm(&self) -> &BigInt {
        self.set.lcm()
    }

    /// `Δ(K)`, or `None` outside `[m_0, lcm)`.
    pub fn delta4_at(&self, k: &BigInt) -> Option<BigInt> {
        if k >= self.lcm() {
            return None;
        }
        self.steps.iter().rev().find(|s| &s.k <= k).map(|s| s.delta4.clone())
    }

    /// Largest `K < lcm` with `Δ(K) ≥ delta4`, or `None` when `delta4`
    /// exceeds `Δ_1 = m_0`.
    pub fn capacity(&self, delta4: &BigInt) -> Option<BigInt> {
        if self.steps.first().is_none_or(|s| &s.delta4 < delta4) {
            return None;
        }
        match self.steps.iter().find(|s| &s.delta4 < delta4) {
            Some(s) => Some(&s.k - 1u32),
            None => Some(self.lcm() - 1u32),
        }
    }
}

fn check_budget(count: &BigInt, budget: u64, what: &str) -> Result<()> {
    if count > &BigInt::from(budget) {
        return Err(RcrtError::Budget(format!(
            "{what} would visit {count} integers, above the scan budget of {budget}; \
             use the two-moduli recursion or raise the budget"
        )));
    }
    Ok(())
}

/// Scans `X = m_0, m_0 + 1, ..., end` keeping the running minimum of
/// `max_l ⟨X⟩_{m_l}` and records every strict decrease. Stops at `Δ = 1`.
fn scan_steps(set: &ModulusSet, end: &BigInt, budget: u64) -> Result<Vec<ProfileStep>> {
    let start = set.min_modulus();
    if end < start {
        return Ok(Vec::new());
    }
    if let (Some((moduli, _)), Some(end)) = (set.as_u64(), end.to_u64()) {
        let start = moduli[0];
        check_budget(&BigInt::from(end - start + 1), budget, "the scan")?;
        let mut residues: Vec<u64> = moduli.iter().map(|m| start % m).collect();
        let mut best = u64::MAX;
        let mut steps = Vec::new();
        for x in start..=end {
            let worst = residues.iter().copied().max().unwrap_or(0);
            if worst < best {
                best = worst;
                steps.push(ProfileStep::new(x, worst));
                if best == 1 {
                    break;
                }
            }
            for (r, m) in residues.iter_mut().zip(&moduli) {
                *r += 1;
                if *r == *m {
                    *r = 0;
                }
            }
        }
        return Ok(steps);
    }
    check_budget(&(end - start + 1u32), budget, "the scan")?;
    let moduli = set.moduli();
    let mut residues: Vec<BigInt> = moduli.iter().map(|m| start.mod_floor(m)).collect();
    let mut best: Option<BigInt> = None;
    let mut steps = Vec::new();
    let mut x = start.clone();
    while &x <= end {
        let worst = residues.iter().max().cloned().unwrap_or_default();
        if best.as_ref().is_none_or(|b| &worst < b) {
            best = Some(worst.clone());
            let done = worst.is_one();
            steps.push(ProfileStep { k: x.clone(), delta4: worst });
            if done {
                break;
            }
        }
        for (r, m) in residues.iter_mut().zip(moduli) {
            *r += 1u32;
            if &*r == m {
                r.set_zero();
            }
        }
        x += 1u32;
    }
    Ok(steps)
}

/// `Δ(K) = min_{m_0 ≤ X ≤ K} max_l ⟨X⟩_{m_l}`, with the default budget.
pub fn min_distance(set: &ModulusSet, k: &BigInt) -> Result<BigInt> {
    min_distance_with_budget(set, k, DEFAULT_SCAN_BUDGET)
}

pub fn min_distance_with_budget(set: &ModulusSet, k: &BigInt, budget: u64) -> Result<BigInt> {
    if k < set.min_modulus() || k >= set.lcm() {
        return Err(RcrtError::Domain(format!(
            "K = {k} must lie in [{}, {})",
            set.min_modulus(),
            set.lcm()
        )));
    }
    let steps = scan_steps(set, k, budget)?;
    Ok(steps.last().expect("K >= m_0 yields at least one step").delta4.clone())
}

/// Full staircase, with the default budget.
pub fn range_profile(set: &ModulusSet) -> Result<RangeProfile> {
    range_profile_with_budget(set, DEFAULT_SCAN_BUDGET)
}

/// Full staircase up to `lcm − 1`.
///
/// Two moduli use the Euclid-style recursion and are cross-checked against
/// the scan when it fits in the budget; on disagreement the scan wins and
/// the mismatch is recorded in the diagnostics.
pub fn range_profile_with_budget(set: &ModulusSet, budget: u64) -> Result<RangeProfile> {
    let end = set.lcm() - 1u32;
    if set.len() != 2 {
        let steps = scan_steps(set, &end, budget)?;
        return Ok(RangeProfile { set: set.clone(), steps, diagnostics: Vec::new() });
    }
    let mut profile = two_moduli_recursion(&set.moduli()[0], &set.moduli()[1])?;
    match scan_steps(set, &end, budget) {
        Ok(scanned) => {
            if scanned != profile.steps {
                profile.diagnostics.push(format!(
                    "recursion and scan disagree for {set}: recursion {:?}, scan {:?}",
                    pairs(&profile.steps),
                    pairs(&scanned)
                ));
                profile.steps = scanned;
            }
        }
        Err(RcrtError::Budget(_)) => {
            profile.diagnostics.push("scan cross-check skipped: over budget".to_string());
        }
        Err(e) => return Err(e),
    }
    Ok(profile)
}

fn pairs(steps: &[ProfileStep]) -> Vec<(String, String)> {
    steps.iter().map(|s| (s.k.to_string(), s.delta4.to_string())).collect()
}

/// Staircase for two moduli from the remainder recursion
/// `Δ_{n+1} = ⟨Δ_{n−1}⟩_{Δ_n}`,
/// `K_{n+1} = K_{n−1} + (K_n − Δ_n)·⌊Δ_{n−1}/Δ_n⌋`,
/// seeded with `Δ_0 = K_0 = m_2`, `Δ_1 = K_1 = m_1`, `K_2 = m_2`.
pub fn two_moduli_recursion(m1: &BigInt, m2: &BigInt) -> Result<RangeProfile> {
    if m1 == m2 {
        return Err(RcrtError::InvalidModuli(format!("degenerate pair: both moduli equal {m1}")));
    }
    let set = ModulusSet::new(vec![m1.clone(), m2.clone()])?;
    let (small, large) = (set.moduli()[0].clone(), set.moduli()[1].clone());

    let mut d = vec![large.clone(), small.clone()];
    let mut k = vec![large.clone(), small.clone(), large.clone()];
    let mut steps = vec![ProfileStep { k: small.clone(), delta4: small.clone() }];
    let mut n = 1;
    loop {
        let next_d = d[n - 1].mod_floor(&d[n]);
        if next_d.is_zero() {
            break;
        }
        if n >= 2 {
            let quotient = &d[n - 1] / &d[n];
            let next_k = &k[n - 1] + (&k[n] - &d[n]) * quotient;
            k.push(next_k);
        }
        steps.push(ProfileStep { k: k[n + 1].clone(), delta4: next_d.clone() });
        d.push(next_d);
        n += 1;
    }
    Ok(RangeProfile { set, steps, diagnostics: Vec::new() })
}

/// Largest `K` with `Δ(K) ≥ delta4`, with the default budget.
pub fn capacity_for_delta(set: &ModulusSet, delta4: &BigInt) -> Result<BigInt> {
    capacity_for_delta_with_budget(set, delta4, DEFAULT_SCAN_BUDGET)
}

/// Returns `x − 1` for the smallest `x ≥ delta4` whose window
/// `[x − delta4 + 1, x]` holds a multiple of every modulus, i.e. every
/// `⟨x⟩_{m_l} < delta4`.
///
/// `budget` caps the number of multiples of the largest modulus visited.
pub fn capacity_for_delta_with_budget(set: &ModulusSet, delta4: &BigInt, budget: u64) -> Result<BigInt> {
    let x = first_short_window(set, delta4, set.lcm(), budget)?.expect("x = lcm always qualifies");
    Ok(x - 1u32)
}

/// Whether `Δ(K) ≥ delta4`, i.e. the capacity for `delta4` reaches `k`.
/// Only windows up to `k` are examined.
pub fn capacity_at_least(set: &ModulusSet, delta4: &BigInt, k: &BigInt, budget: u64) -> Result<bool> {
    if k >= set.lcm() {
        return Ok(false);
    }
    Ok(first_short_window(set, delta4, k, budget)?.is_none())
}

/// Smallest `x ≤ stop` (with `x ≥ m_0`) having every `⟨x⟩_{m_l} < delta4`.
///
/// Such an `x` sits within `delta4` of a multiple `jM` of the largest
/// modulus, so only those windows are examined.
fn first_short_window(set: &ModulusSet, delta4: &BigInt, stop: &BigInt, budget: u64) -> Result<Option<BigInt>> {
    let m0 = set.min_modulus();
    if delta4 < &BigInt::one() || delta4 > m0 {
        return Err(RcrtError::Domain(format!(
            "delta4 = {delta4} must lie in [1, {m0}]; no positive dynamic range otherwise"
        )));
    }
    check_budget(&(stop / set.max_modulus()), budget, "the capacity search")?;
    if let (Some((moduli, _)), Some(stop), Some(delta4)) = (set.as_u64(), stop.to_u64(), delta4.to_u64()) {
        return Ok(first_short_window_u64(&moduli, delta4, stop).map(BigInt::from));
    }
    Ok(first_short_window_big(set, delta4, stop))
}

fn first_short_window_big(set: &ModulusSet, delta4: &BigInt, stop: &BigInt) -> Option<BigInt> {
    let big = set.max_modulus().clone();
    let others = &set.moduli()[..set.len() - 1];
    let steps: Vec<BigInt> = others.iter().map(|m| big.mod_floor(m)).collect();
    let mut offsets = steps.clone();
    let mut base = big.clone();
    while &base <= stop {
        let mut candidates = vec![BigInt::zero()];
        candidates.extend(others.iter().zip(&offsets).map(|(m, s)| (m - s).mod_floor(m)));
        candidates.retain(|t| t < delta4);
        candidates.sort();
        let hit = candidates.into_iter().find(|t| {
            others
                .iter()
                .zip(&offsets)
                .all(|(m, s)| &(s + t).mod_floor(m) < delta4)
        });
        if let Some(t) = hit {
            let x = &base + t;
            return (&x <= stop).then_some(x);
        }
        base += &big;
        for ((s, step), m) in offsets.iter_mut().zip(&steps).zip(others) {
            *s += step;
            if &*s >= m {
                *s -= m;
            }
        }
    }
    None
}

/// [`first_short_window`] in machine words.
fn first_short_window_u64(moduli: &[u64], delta4: u64, stop: u64) -> Option<u64> {
    let (&big, others) = moduli.split_last().expect("at least two moduli");
    let steps: Vec<u64> = others.iter().map(|m| big % m).collect();
    let mut offsets = steps.clone();
    let mut base = big;
    while base <= stop {
        let hit = std::iter::once(0)
            .chain(others.iter().zip(&offsets).map(|(m, s)| (m - s) % m))
            .filter(|&t| t < delta4)
            .filter(|&t| others.iter().zip(&offsets).all(|(m, s)| (s + t) % m < delta4))
            .min();
        if let Some(t) = hit {
            return (base + t <= stop).then_some(base + t);
        }
        base = base.checked_add(big)?;
        for ((s, step), m) in offsets.iter_mut().zip(&steps).zip(others) {
            *s += step;
            if *s >= *m {
                *s -= m;
            }
        }
    }
    None
}

/// `(⌈lcm^{1/delta4}⌉, upper)` where `upper = ⌊∏p_l / (1 + 2δ)^L⌋` is
/// reported only for all-prime sets.
pub fn capacity_bounds(set: &ModulusSet, delta4: &BigInt) -> Result<(BigInt, Option<BigInt>)> {
    if delta4 < &BigInt::one() {
        return Err(RcrtError::Domain(format!("delta4 must be >= 1, got {delta4}")));
    }
    let lcm = set.lcm();
    let lower = match delta4.to_u32() {
        Some(n) => {
            let root = lcm.nth_root(n);
            if root.pow(n) < *lcm {
                root + 1u32
            } else {
                root
            }
        }
        // lcm^(1/n) < 2 for any n this large
        None => BigInt::from(2),
    };
    let upper = set.moduli().iter().all(is_prime).then(|| {
        let l = set.len() as u32;
        let product: BigInt = set.moduli().iter().product();
        (product << l) / (delta4 + 2u32).pow(l)
    });
    Ok((lower, upper))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::residue::residue_vector;

    fn set(ms: &[u64]) -> ModulusSet {
        ModulusSet::from_u64s(ms).unwrap()
    }

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn window_search_word_and_bigint_paths_agree() {
        for ms in [&[10u64, 7][..], &[9, 11, 14], &[165, 264, 341], &[101, 103, 107]] {
            let s = set(ms);
            let lcm = s.lcm().to_u64().unwrap();
            for delta4 in 1..=*ms.iter().min().unwrap() {
                for stop in [lcm / 3, lcm - 1, lcm] {
                    let word = first_short_window_u64(s.moduli().iter().map(|m| m.to_u64().unwrap()).collect::<Vec<_>>().as_slice(), delta4, stop);
                    let wide = first_short_window_big(&s, &BigInt::from(delta4), &BigInt::from(stop));
                    assert_eq!(word.map(BigInt::from), wide, "{ms:?} Δ={delta4} stop={stop}");
                }
            }
        }
    }

    fn steps(p: &RangeProfile) -> Vec<(i64, i64)> {
        p.steps().iter().map(|s| (s.k.to_i64().unwrap(), s.delta4.to_i64().unwrap())).collect()
    }

    /// Direct transcription of the pairwise definition.
    fn rho_pairs(x: &[i64], y: &[i64]) -> i64 {
        let mut best = 0;
        for l in 0..x.len() {
            for j in 0..x.len() {
                best = best.max(((x[l] - x[j]) - (y[l] - y[j])).abs());
            }
        }
        best
    }

    fn residues(x: i64, ms: &[u64]) -> Vec<i64> {
        ms.iter().map(|&m| x.rem_euclid(m as i64)).collect()
    }

    /// Multiples of any modulus in `[0, k]`.
    fn anchors(ms: &[u64], k: i64) -> Vec<i64> {
        (0..=k).filter(|x| ms.iter().any(|&m| x % m as i64 == 0)).collect()
    }

    #[test]
    fn rho_examples() {
        let s = set(&[10, 7]);
        let zero = residue_vector(&big(0), &s);
        assert_eq!(shift_rho(&zero, &zero).unwrap().0, big(0));
        assert_eq!(shift_rho(&residue_vector(&big(70), &s), &zero).unwrap().0, big(0));
        assert_eq!(shift_rho(&residue_vector(&big(10), &s), &zero).unwrap().0, big(3));
        let other = residue_vector(&big(0), &set(&[10, 9]));
        assert!(matches!(shift_rho(&zero, &other), Err(RcrtError::ModulusMismatch(_))));
    }

    #[test]
    fn rho_matches_pairwise_definition_and_axioms() {
        for ms in [&[10u64, 7][..], &[4, 6, 9]] {
            let s = set(ms);
            let lcm = s.lcm().to_i64().unwrap();
            let vecs: Vec<_> = (0..lcm).map(|x| residue_vector(&big(x), &s)).collect();
            let rho = |a: usize, b: usize| shift_rho(&vecs[a], &vecs[b]).unwrap().0.to_i64().unwrap();
            for x in 0..lcm as usize {
                assert_eq!(rho(x, x), 0);
                for y in 0..lcm as usize {
                    let r = rho(x, y);
                    assert_eq!(r, rho_pairs(&residues(x as i64, ms), &residues(y as i64, ms)));
                    assert_eq!(r, rho(y, x));
                    // each d_l lies in (−m_l, m_l), so the spread stays below the two largest moduli combined
                    assert!(r < (ms[ms.len() - 1] + ms[ms.len() - 2]) as i64);
                }
            }
            for x in (0..lcm as usize).step_by(3) {
                for y in 0..lcm as usize {
                    for z in (0..lcm as usize).step_by(5) {
                        assert!(rho(x, z) <= rho(x, y) + rho(y, z));
                    }
                }
            }
        }
    }

    #[test]
    fn zero_distance_iff_same_anchor() {
        for ms in [&[10u64, 7][..], &[4, 6], &[3, 5, 7]] {
            let s = set(ms);
            let lcm = s.lcm().to_i64().unwrap();
            let all = anchors(ms, lcm - 1);
            let anchor = |x: i64| *all.iter().rev().find(|&&a| a <= x).unwrap();
            for x in 0..lcm {
                for y in 0..lcm {
                    let rho = shift_rho(&residue_vector(&big(x), &s), &residue_vector(&big(y), &s)).unwrap();
                    assert_eq!(rho.0.is_zero(), anchor(x) == anchor(y), "x={x} y={y} ms={ms:?}");
                }
            }
        }
    }

    #[test]
    fn small_errors_move_less_than_two_delta() {
        let ms = [9u64, 11, 14];
        let s = set(&ms);
        for x in 0..1386i64 {
            let clean = residue_vector(&big(x), &s);
            for e0 in -2..=2i64 {
                for e1 in -2..=2i64 {
                    for e2 in -2..=2i64 {
                        let errs = [e0, e1, e2];
                        let noisy: Vec<i64> = residues(x, &ms).iter().zip(errs).map(|(r, e)| r + e).collect();
                        if noisy.iter().zip(&ms).any(|(&r, &m)| r < 0 || r >= m as i64) {
                            continue;
                        }
                        let noisy = ResidueVector::new(s.clone(), noisy.into_iter().map(BigInt::from).collect()).unwrap();
                        // δ = 3: every error is below δ, so ρ < 2δ = 6
                        assert!(shift_rho(&noisy, &clean).unwrap().0 < big(6));
                    }
                }
            }
        }
    }

    #[test]
    fn anchor_distances_match_min_distance() {
        let cases: [(&[u64], Vec<i64>); 2] = [
            (&[10, 7], (7..70).collect()),
            (&[9, 11, 14], vec![9, 13, 14, 44, 45, 55, 56, 98, 99, 500, 1385]),
        ];
        for (ms, ks) in cases {
            let s = set(ms);
            for k in ks {
                let anchors = anchors(ms, k);
                let mut pair_min = i64::MAX;
                for (i, &a) in anchors.iter().enumerate() {
                    for &b in &anchors[i + 1..] {
                        pair_min = pair_min.min(rho_pairs(&residues(a, ms), &residues(b, ms)));
                    }
                }
                let zero_min = anchors[1..]
                    .iter()
                    .map(|&a| rho_pairs(&residues(a, ms), &residues(0, ms)))
                    .min()
                    .unwrap();
                assert_eq!(pair_min, zero_min, "K={k}");
                assert_eq!(big(zero_min), min_distance(&s, &big(k)).unwrap(), "K={k}");
            }
        }
    }

    #[test]
    fn rho_of_a_multiple_is_its_largest_residue() {
        let ms = [9u64, 11, 14];
        let s = set(&ms);
        for &m in &ms {
            for x in (0..1386i64).step_by(m as usize) {
                let rho = shift_rho(&residue_vector(&big(x), &s), &residue_vector(&big(0), &s)).unwrap();
                assert_eq!(rho.0, big(*residues(x, &ms).iter().max().unwrap()));
            }
        }
    }

    #[test]
    fn min_distance_examples() {
        let s = set(&[165, 341, 264]);
        assert_eq!(min_distance(&s, &big(165)).unwrap(), big(165));
        assert_eq!(min_distance(&s, &big(10571)).unwrap(), big(11));
        assert_eq!(min_distance(&set(&[10, 7]), &big(10)).unwrap(), big(3));
        assert!(matches!(min_distance(&s, &big(164)), Err(RcrtError::Domain(_))));
        assert!(matches!(min_distance(&s, &big(40920)), Err(RcrtError::Domain(_))));
    }

    #[test]
    fn staircase_of_three_moduli() {
        let p = range_profile(&set(&[165, 341, 264])).unwrap();
        assert_eq!(steps(&p), vec![(165, 165), (341, 77), (1056, 66), (1364, 44), (4785, 33), (10571, 11)]);
        assert_eq!(p.lcm(), &big(40920));
        assert_eq!(p.delta4_at(&big(1055)), Some(big(77)));
        assert_eq!(p.delta4_at(&big(40919)), Some(big(11)));
        assert_eq!(p.delta4_at(&big(40920)), None);
        assert_eq!(p.delta4_at(&big(100)), None);
    }

    #[test]
    fn staircase_of_two_moduli() {
        let p = range_profile(&set(&[10, 7])).unwrap();
        assert_eq!(steps(&p), vec![(7, 7), (10, 3), (21, 1)]);
        assert!(p.diagnostics().is_empty());
        let p = range_profile(&set(&[9, 11, 14])).unwrap();
        assert_eq!(steps(&p), vec![(9, 9), (14, 5), (45, 3), (56, 2), (99, 1)]);
    }

    #[test]
    fn recursion_examples() {
        let p = two_moduli_recursion(&big(7), &big(10)).unwrap();
        assert_eq!(steps(&p), vec![(7, 7), (10, 3), (21, 1)]);
        let p = two_moduli_recursion(&big(12), &big(13)).unwrap();
        assert_eq!(steps(&p), vec![(12, 12), (13, 1)]);
        assert!(two_moduli_recursion(&big(7), &big(7)).is_err());
    }

    #[test]
    fn recursion_matches_scan_on_small_pairs() {
        for a in 2u64..60 {
            for b in a + 1..70 {
                let s = set(&[a, b]);
                let rec = two_moduli_recursion(&big(a as i64), &big(b as i64)).unwrap();
                let scan = scan_steps(&s, &(s.lcm() - 1u32), DEFAULT_SCAN_BUDGET).unwrap();
                assert_eq!(rec.steps(), &scan[..], "pair ({a}, {b})");
            }
        }
    }

    #[test]
    fn scaling_by_a_common_factor() {
        let base = set(&[15, 31, 24]);
        let scaled = base.scaled(&big(11)).unwrap();
        assert_eq!(scaled, set(&[165, 341, 264]));
        let p = range_profile(&base).unwrap();
        let q = range_profile(&scaled).unwrap();
        let scaled_steps: Vec<_> = steps(&p).into_iter().map(|(k, d)| (11 * k, 11 * d)).collect();
        assert_eq!(steps(&q), scaled_steps);
        for k in [15i64, 30, 31, 95, 96, 124, 435, 961, 3719] {
            assert_eq!(
                min_distance(&scaled, &big(11 * k + 10)).unwrap(),
                min_distance(&base, &big(k)).unwrap() * 11u32,
                "K={k}"
            );
        }
    }

    #[test]
    fn capacity_examples() {
        let s = set(&[165, 341, 264]);
        assert_eq!(capacity_for_delta(&s, &big(11)).unwrap(), big(40919));
        assert_eq!(capacity_for_delta(&s, &big(165)).unwrap(), big(340));
        assert_eq!(capacity_for_delta(&s, &big(12)).unwrap(), big(10570));
        assert_eq!(capacity_for_delta(&set(&[10, 7]), &big(3)).unwrap(), big(20));
        assert!(matches!(capacity_for_delta(&s, &big(166)), Err(RcrtError::Domain(_))));
        assert!(matches!(capacity_for_delta(&s, &big(0)), Err(RcrtError::Domain(_))));
    }

    #[test]
    fn capacity_agrees_with_profile_and_min_distance() {
        for ms in [&[10u64, 7][..], &[9, 11, 14], &[4, 6, 9], &[12, 18, 20], &[5, 7, 11, 13]] {
            let s = set(ms);
            let p = range_profile(&s).unwrap();
            for delta4 in 1..=s.min_modulus().to_i64().unwrap() {
                let k = capacity_for_delta(&s, &big(delta4)).unwrap();
                assert_eq!(Some(k.clone()), p.capacity(&big(delta4)), "{ms:?} delta4={delta4}");
                assert!(min_distance(&s, &k).unwrap() >= big(delta4));
                if &k + 1u32 < *s.lcm() {
                    assert!(min_distance(&s, &(&k + 1u32)).unwrap() < big(delta4));
                }
            }
        }
    }

    #[test]
    fn capacity_threshold_check() {
        let s = set(&[165, 341, 264]);
        for delta4 in [11i64, 12, 33, 100, 165] {
            let cap = capacity_for_delta(&s, &big(delta4)).unwrap();
            for k in [big(165), &cap - 1u32, cap.clone(), &cap + 1u32, big(40919)] {
                assert_eq!(capacity_at_least(&s, &big(delta4), &k, DEFAULT_SCAN_BUDGET).unwrap(), k <= cap, "Δ={delta4} K={k}");
            }
        }
    }

    #[test]
    fn bounds_examples() {
        let (lower, upper) = capacity_bounds(&set(&[165, 341, 264]), &big(11)).unwrap();
        assert_eq!((lower, upper), (big(3), None));
        let (lower, upper) = capacity_bounds(&set(&[7, 11, 13]), &big(4)).unwrap();
        assert_eq!(upper, Some(big(37)));
        assert_eq!(lower, big(6));
        let (lower, _) = capacity_bounds(&set(&[9, 11, 14]), &big(1)).unwrap();
        assert_eq!(lower, big(1386));
    }

    #[test]
    fn scan_budget_is_enforced() {
        let s = set(&[1_000_003, 1_000_033, 1_000_037]);
        assert!(matches!(range_profile_with_budget(&s, 1000), Err(RcrtError::Budget(_))));
    }
}
