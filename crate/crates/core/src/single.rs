//! Robust reconstruction of a single integer from erroneous residues.
//!
//! Two decoders:
//! - [`closed_form_rcrt`] recovers the folding number `k_1` of the smallest
//!   modulus from rounded residue differences and averages the per-modulus
//!   estimates.
//! - [`search_decode`] looks up the CRT image of the noisy vector in a sorted
//!   list of CRT images of every bounded error vector ([`ErrorList`]).

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{RcrtError, Result};
use crate::range::shift_rho;
use crate::residue::{round_half_up, CrtPlan, GammaModuli, ModulusSet, ResidueVector};

/// Default cap on the number of error vectors an [`ErrorList`] may hold.
pub const DEFAULT_LIST_BUDGET: u64 = 1 << 22;

const LIST_FORMAT: &str = "rcrt-error-list";
const LIST_VERSION: u32 = 1;

/// Outcome of a single-integer decode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    /// `X̂`, the rounded mean of the candidate reconstructions.
    pub estimate: BigInt,
    /// Start of the line the input was projected onto: a multiple of some
    /// modulus. The search decoder picks, among the anchors of its candidates,
    /// the one nearest the input in the shift pseudo-metric; the closed-form
    /// decoder reports the largest multiple not above its estimate.
    pub anchor: BigInt,
    /// Folding number of the smallest modulus (closed-form decoder only).
    pub folding: Option<BigInt>,
    /// Number of distinct list entries hit (search decoder only).
    pub matches: Option<usize>,
    /// Integer comparisons spent in the binary searches (search decoder only).
    pub comparisons: u64,
}

fn anchor_of(set: &ModulusSet, x: &BigInt) -> BigInt {
    if x.sign() == num_bigint::Sign::Minus {
        return BigInt::zero();
    }
    set.moduli().iter().map(|m| x - x.mod_floor(m)).max().unwrap_or_default()
}

/// Closed-form decoder for moduli sharing a common factor.
pub fn closed_form_rcrt(gm: &GammaModuli, noisy: &ResidueVector) -> Result<DecodeResult> {
    closed_form_decode(gm.set(), noisy)
}

/// Closed-form decoder over any modulus set, using the smallest modulus `m_1`
/// as reference.
///
/// With `g_l = gcd(m_1, m_l)`, the rounded difference `q_l = [(r̃_l − r̃_1)/g_l]`
/// satisfies `k_1·(m_1/g_l) ≡ q_l (mod m_l/g_l)` whenever
/// `|Δr_l − Δr_1| < g_l/2`. Solving these congruences gives `k_1`; each modulus
/// then contributes `k_1·m_1 − g_l·q_l + r̃_l`, and the estimate is their rounded
/// mean, reduced into `[0, lcm)`.
pub fn closed_form_decode(set: &ModulusSet, noisy: &ResidueVector) -> Result<DecodeResult> {
    if noisy.set() != set {
        return Err(RcrtError::ModulusMismatch(format!("vector over {} decoded with {set}", noisy.set())));
    }
    let moduli = set.moduli();
    let r = noisy.residues();
    let m1 = &moduli[0];

    let mut reduced = Vec::with_capacity(moduli.len() - 1);
    let mut targets = Vec::with_capacity(moduli.len() - 1);
    let mut rounded = Vec::with_capacity(moduli.len() - 1);
    for (m, rl) in moduli.iter().zip(r).skip(1) {
        let g = m1.gcd(m);
        let q = round_half_up(&BigRational::new(rl - &r[0], g.clone()));
        let modulus = m / &g;
        let k = if modulus.is_one() {
            BigInt::zero()
        } else {
            let inv = (m1 / &g).modinv(&modulus).expect("m_1/g is coprime to m_l/g");
            (&q * inv).mod_floor(&modulus)
        };
        targets.push(k);
        reduced.push(modulus);
        rounded.push((g, q));
    }
    let k1 = CrtPlan::new(&reduced).solve(&targets).map_err(|e| {
        RcrtError::DecodeFailure(format!("rounded residue differences disagree ({e}); the error bound was exceeded"))
    })?;

    let base = &k1 * m1;
    let mut total = &base + &r[0];
    for ((g, q), rl) in rounded.iter().zip(&r[1..]) {
        total += &base - g * q + rl;
    }
    let estimate = round_half_up(&BigRational::new(total, BigInt::from(moduli.len()))).mod_floor(set.lcm());
    Ok(DecodeResult {
        anchor: anchor_of(set, &estimate),
        estimate,
        folding: Some(k1),
        matches: None,
        comparisons: 0,
    })
}

/// One distinct CRT image together with every error vector that produces it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorEntry {
    #[serde(rename = "E", with = "crate::format::decimal")]
    pub value: BigInt,
    pub alphas: Vec<Vec<i64>>,
}

/// Sorted CRT images `E_α` of all error vectors `α` with `|α_l| ≤ ⌈δ⌉ − 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErrorList {
    set: ModulusSet,
    delta4: BigInt,
    radius: i64,
    tau: u64,
    entries: Vec<ErrorEntry>,
}

#[derive(Serialize, Deserialize)]
struct ErrorListFile {
    format: String,
    version: u32,
    #[serde(with = "crate::format::decimal_vec")]
    moduli: Vec<BigInt>,
    #[serde(with = "crate::format::decimal")]
    delta4: BigInt,
    tau: u64,
    entries: Vec<ErrorEntry>,
}

impl ErrorList {
    pub fn set(&self) -> &ModulusSet {
        &self.set
    }

    pub fn delta4(&self) -> &BigInt {
        &self.delta4
    }

    /// `⌈δ⌉ − 1`, the largest error magnitude enumerated.
    pub fn radius(&self) -> i64 {
        self.radius
    }

    /// Number of error vectors enumerated, `(2⌈δ⌉ − 1)^L`.
    pub fn tau(&self) -> u64 {
        self.tau
    }

    pub fn entries(&self) -> &[ErrorEntry] {
        &self.entries
    }

    pub fn to_json(&self) -> String {
        let file = ErrorListFile {
            format: LIST_FORMAT.to_string(),
            version: LIST_VERSION,
            moduli: self.set.moduli().to_vec(),
            delta4: self.delta4.clone(),
            tau: self.tau,
            entries: self.entries.clone(),
        };
        serde_json::to_string(&file).expect("error lists always serialize")
    }

    /// Loads a list written by [`ErrorList::to_json`], re-checking every entry.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ErrorListFile =
            serde_json::from_str(text).map_err(|e| RcrtError::Format(format!("error list: {e}")))?;
        if file.format != LIST_FORMAT || file.version != LIST_VERSION {
            return Err(RcrtError::Format(format!(
                "expected {LIST_FORMAT} version {LIST_VERSION}, found {} version {}",
                file.format, file.version
            )));
        }
        let set = ModulusSet::new(file.moduli)?;
        let radius = list_radius(&file.delta4)?;
        let mut seen = 0u64;
        for (i, entry) in file.entries.iter().enumerate() {
            if i > 0 && file.entries[i - 1].value >= entry.value {
                return Err(RcrtError::Format("error list entries are not strictly ascending".into()));
            }
            for alpha in &entry.alphas {
                if alpha.len() != set.len() || alpha.iter().any(|a| a.abs() > radius) {
                    return Err(RcrtError::Format(format!("error vector {alpha:?} outside the list radius")));
                }
                if image(&set, alpha)? != entry.value {
                    return Err(RcrtError::Format(format!("entry {} does not match vector {alpha:?}", entry.value)));
                }
                seen += 1;
            }
        }
        let consistent_total = file.tau;
        if seen > consistent_total {
            return Err(RcrtError::Format(format!("{seen} vectors listed but tau = {consistent_total}")));
        }
        Ok(Self { set, delta4: file.delta4, radius, tau: file.tau, entries: file.entries })
    }
}

fn list_radius(delta4: &BigInt) -> Result<i64> {
    if delta4 < &BigInt::one() {
        return Err(RcrtError::Domain(format!("delta4 must be >= 1, got {delta4}")));
    }
    // ⌈δ⌉ − 1 = ⌈Δ/4⌉ − 1
    let ceil: BigInt = Integer::div_ceil(delta4, &BigInt::from(4));
    (ceil - 1u32)
        .to_i64()
        .ok_or_else(|| RcrtError::Budget(format!("delta4 = {delta4} is far too large to enumerate")))
}

fn image(set: &ModulusSet, alpha: &[i64]) -> Result<BigInt> {
    let residues: Vec<BigInt> = alpha
        .iter()
        .zip(set.moduli())
        .map(|(&a, m)| BigInt::from(a).mod_floor(m))
        .collect();
    set.plan().solve(&residues)
}

pub fn build_error_list(set: &ModulusSet, delta4: &BigInt) -> Result<ErrorList> {
    build_error_list_with_budget(set, delta4, DEFAULT_LIST_BUDGET)
}

/// Enumerates every error vector on the grid `[−(⌈δ⌉−1), ⌈δ⌉−1]^L`.
///
/// For non-coprime moduli, vectors whose residues are not jointly consistent
/// have no CRT image and are skipped; `tau` still counts the full grid.
pub fn build_error_list_with_budget(set: &ModulusSet, delta4: &BigInt, budget: u64) -> Result<ErrorList> {
    let radius = list_radius(delta4)?;
    let side = BigInt::from(2 * radius + 1);
    let tau_big = side.pow(set.len() as u32);
    let tau = tau_big
        .to_u64()
        .filter(|&t| t <= budget)
        .ok_or_else(|| {
            RcrtError::Budget(format!("error list would hold tau = {tau_big} vectors, above the budget of {budget}"))
        })?;

    let mut raw: Vec<(BigInt, Vec<i64>)> = Vec::with_capacity(tau as usize);
    let mut alpha = vec![-radius; set.len()];
    loop {
        if let Ok(e) = image(set, &alpha) {
            raw.push((e, alpha.clone()));
        }
        let mut i = 0;
        while i < alpha.len() && alpha[i] == radius {
            alpha[i] = -radius;
            i += 1;
        }
        if i == alpha.len() {
            break;
        }
        alpha[i] += 1;
    }
    raw.sort();

    let mut entries: Vec<ErrorEntry> = Vec::new();
    for (value, alpha) in raw {
        match entries.last_mut() {
            Some(last) if last.value == value => last.alphas.push(alpha),
            _ => entries.push(ErrorEntry { value, alphas: vec![alpha] }),
        }
    }
    Ok(ErrorList { set: set.clone(), delta4: delta4.clone(), radius, tau, entries })
}

/// First index whose value is `>= target`, counting comparisons.
fn lower_bound(entries: &[ErrorEntry], target: &BigInt, comparisons: &mut u64) -> usize {
    entries.partition_point(|e| {
        *comparisons += 1;
        &e.value < target
    })
}

/// First index whose value is `> target`, counting comparisons.
fn upper_bound(entries: &[ErrorEntry], target: &BigInt, comparisons: &mut u64) -> usize {
    entries.partition_point(|e| {
        *comparisons += 1;
        &e.value <= target
    })
}

/// Search decoder: every list entry with `0 ≤ ⟨X̃ − E⟩_lcm ≤ K` gives a
/// candidate `⟨X̃ − E⟩_lcm`, and the estimate is their rounded mean.
///
/// The hits form at most two contiguous runs of the sorted list, found by
/// binary search.
pub fn search_decode(list: &ErrorList, noisy: &ResidueVector, k: &BigInt) -> Result<DecodeResult> {
    let set = list.set();
    if noisy.set() != set {
        return Err(RcrtError::ModulusMismatch(format!("vector over {} decoded with a list over {set}", noisy.set())));
    }
    if k.sign() == num_bigint::Sign::Minus || k >= set.lcm() {
        return Err(RcrtError::Domain(format!("K = {k} must lie in [0, {})", set.lcm())));
    }
    let x_tilde = set
        .plan()
        .solve(noisy.residues())
        .map_err(|e| RcrtError::DecodeFailure(format!("noisy residues have no CRT image: {e}")))?;
    let lcm = set.lcm();
    let entries = list.entries();
    let mut comparisons = 0u64;

    let low = &x_tilde - k;
    let mut runs = Vec::with_capacity(2);
    if low.sign() != num_bigint::Sign::Minus {
        runs.push((lower_bound(entries, &low, &mut comparisons), upper_bound(entries, &x_tilde, &mut comparisons)));
    } else {
        runs.push((0, upper_bound(entries, &x_tilde, &mut comparisons)));
        runs.push((lower_bound(entries, &(low + lcm), &mut comparisons), entries.len()));
    }

    let mut total = BigInt::zero();
    let mut candidates = Vec::new();
    for (start, end) in runs {
        for entry in &entries[start..end.max(start)] {
            let candidate = (&x_tilde - &entry.value).mod_floor(lcm);
            total += &candidate;
            candidates.push(candidate);
        }
    }
    if candidates.is_empty() {
        return Err(RcrtError::DecodeFailure(format!(
            "no error-list entry within [0, {k}] of the noisy image {x_tilde}; the error bound or K was exceeded"
        )));
    }
    let hits = candidates.len();
    let estimate = round_half_up(&BigRational::new(total, BigInt::from(hits)));
    Ok(DecodeResult {
        anchor: nearest_anchor(noisy, &candidates),
        estimate,
        folding: None,
        matches: Some(hits),
        comparisons,
    })
}

/// The anchor of a candidate that lies closest to `noisy` in the shift
/// pseudo-metric; ties go to the smaller anchor.
fn nearest_anchor(noisy: &ResidueVector, candidates: &[BigInt]) -> BigInt {
    let set = noisy.set();
    let mut anchors: Vec<BigInt> = candidates.iter().map(|c| anchor_of(set, c)).collect();
    anchors.sort();
    anchors.dedup();
    anchors
        .into_iter()
        .min_by_key(|a| shift_rho(noisy, &set.residue_vector(a)).map(|m| m.0).unwrap_or_default())
        .unwrap_or_default()
}
