//! Robust reconstruction of several integers from unordered residue sets.
//!
//! All moduli share a factor `Γ`: `m_l = Γ·M_l` with the `M_l` pairwise
//! coprime. Each modulus contributes the unordered multiset of the `N`
//! residues `⟨X_i + Δr_il⟩_{m_l}`, with `|Δr_il| ≤ δ < Γ/(4N)`. Decoding
//! finds a gap in the residues modulo `Γ` to separate the integers, folds the
//! table down to residues of the quotients `q̃_i`, recovers those quotients
//! through their symmetric polynomials and averages the matched residues.

mod bounds;
mod roots;
mod symmetric;

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

pub use bounds::{dynamic_range_check, symmetric_bound_check, Clause, DynamicRangeReport, SymmetricBound};
pub use roots::{evaluate, from_roots, integer_roots, integer_roots_with, RootStrategy};
pub use symmetric::{
    binomial, elementary_mod, elementary_symmetric, newton_elementary, power_sums, symmetric_gcrt, SymmetricProfile,
};

use crate::error::{RcrtError, Result};
use crate::residue::{round_half_up, GammaModuli};

/// Search nodes allowed when matching roots to residues.
pub const MATCH_BUDGET: u64 = 1_000_000;

/// For each modulus, the unordered residues of the `N` integers.
///
/// Rows follow the ascending order of the coprime parts in the
/// [`GammaModuli`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueTable {
    gm: GammaModuli,
    rows: Vec<Vec<BigInt>>,
}

#[derive(Serialize, Deserialize)]
struct TableFile {
    #[serde(with = "crate::format::decimal_rows")]
    rows: Vec<Vec<BigInt>>,
}

impl ResidueTable {
    pub fn new(gm: GammaModuli, rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let moduli = gm.set().moduli();
        if rows.len() != moduli.len() {
            return Err(RcrtError::ModulusMismatch(format!(
                "{} residue rows for {} moduli",
                rows.len(),
                moduli.len()
            )));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(RcrtError::Domain("residue rows are empty".into()));
        }
        for (row, m) in rows.iter().zip(moduli) {
            if row.len() != n {
                return Err(RcrtError::Domain(format!("rows have {} and {} entries", n, row.len())));
            }
            if let Some(r) = row.iter().find(|r| r.is_negative() || *r >= m) {
                return Err(RcrtError::ResidueOutOfRange { residue: r.clone(), modulus: m.clone() });
            }
        }
        Ok(ResidueTable { gm, rows })
    }

    /// Exact residues of `xs`, each row sorted.
    pub fn encode(gm: GammaModuli, xs: &[BigInt]) -> Result<Self> {
        let zeros = vec![vec![BigInt::zero(); gm.parts().len()]; xs.len()];
        Self::with_errors(gm, xs, &zeros)
    }

    /// Residues of `X_i + errors[i][l]`, each row sorted.
    pub fn with_errors(gm: GammaModuli, xs: &[BigInt], errors: &[Vec<BigInt>]) -> Result<Self> {
        let moduli = gm.set().moduli();
        if errors.len() != xs.len() || errors.iter().any(|e| e.len() != moduli.len()) {
            return Err(RcrtError::Domain("need one error per integer and modulus".into()));
        }
        let rows = moduli
            .iter()
            .enumerate()
            .map(|(l, m)| {
                let mut row: Vec<BigInt> = xs.iter().zip(errors).map(|(x, e)| (x + &e[l]).mod_floor(m)).collect();
                row.sort();
                row
            })
            .collect();
        Self::new(gm, rows)
    }

    /// Parses `{"rows": [["r", ...], ...]}`.
    pub fn from_json(gm: GammaModuli, text: &str) -> Result<Self> {
        let file: TableFile = serde_json::from_str(text).map_err(|e| RcrtError::Format(e.to_string()))?;
        Self::new(gm, file.rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&TableFile { rows: self.rows.clone() }).expect("serializable")
    }

    pub fn gamma_moduli(&self) -> &GammaModuli {
        &self.gm
    }

    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    /// Number of integers.
    pub fn n(&self) -> usize {
        self.rows[0].len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case {
    /// The chosen gap wraps around `Γ`; no residue is shifted.
    I,
    /// The chosen gap is interior; residues above it are shifted down by `Γ`.
    II,
}

/// Gap structure of the common residues `⟨r̃_il⟩_Γ`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommonResidueAnalysis {
    #[serde(with = "crate::format::decimal")]
    pub gamma: BigInt,
    #[serde(with = "crate::format::rational")]
    pub delta: BigRational,
    /// `⟨r̃_il⟩_Γ`, aligned with the table rows.
    #[serde(with = "crate::format::decimal_rows")]
    pub common: Vec<Vec<BigInt>>,
    /// Distinct common residues, ascending.
    #[serde(with = "crate::format::decimal_vec")]
    pub gammas: Vec<BigInt>,
    #[serde(serialize_with = "crate::format::display")]
    pub kappa: usize,
    /// 1-based index of the value just below the chosen gap.
    #[serde(serialize_with = "crate::format::display")]
    pub xi: usize,
    #[serde(with = "crate::format::decimal")]
    pub gap_size: BigInt,
    pub case_tag: Case,
    /// Whether `δ < Γ/(4N)`.
    pub feasible: bool,
}

fn feasible(delta: &BigRational, gamma: &BigInt, n: usize) -> bool {
    delta * BigRational::from_integer(BigInt::from(4 * n)) < BigRational::from_integer(gamma.clone())
}

/// Finds the widest cyclic gap above `2δ` between common residues, preferring
/// the smallest index on ties.
pub fn analyze_common_residues(rt: &ResidueTable, delta: &BigRational) -> Result<CommonResidueAnalysis> {
    if delta.is_negative() {
        return Err(RcrtError::Domain(format!("delta must be non-negative, got {delta}")));
    }
    let gamma = rt.gm.gamma().clone();
    let common: Vec<Vec<BigInt>> =
        rt.rows.iter().map(|row| row.iter().map(|r| r.mod_floor(&gamma)).collect()).collect();
    let gammas: Vec<BigInt> = common.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
    let kappa = gammas.len();
    let twice = delta * BigRational::from_integer(BigInt::from(2));
    let mut best: Option<(usize, BigInt)> = None;
    for i in 0..kappa {
        let gap = if i + 1 == kappa { &gammas[0] - &gammas[i] + &gamma } else { &gammas[i + 1] - &gammas[i] };
        if BigRational::from_integer(gap.clone()) > twice && best.as_ref().is_none_or(|(_, g)| gap > *g) {
            best = Some((i, gap));
        }
    }
    let feasible = feasible(delta, &gamma, rt.n());
    let Some((index, gap_size)) = best else {
        let reason = if feasible {
            format!("δ < Γ/(4N) holds, so some residue error exceeds δ = {delta}")
        } else {
            format!("the precondition δ < Γ/(4N) = {} is violated", BigRational::new(gamma.clone(), BigInt::from(4 * rt.n())))
        };
        return Err(RcrtError::NoGap(format!("no gap between common residues exceeds 2δ = {twice}; {reason}")));
    };
    Ok(CommonResidueAnalysis {
        gamma,
        delta: delta.clone(),
        common,
        gammas,
        kappa,
        xi: index + 1,
        gap_size,
        case_tag: if index + 1 == kappa { Case::I } else { Case::II },
        feasible,
    })
}

/// Folding residues `q̃_il` and shifted common residues `r̂_il`, aligned with
/// the table rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldingTable {
    #[serde(with = "crate::format::decimal_vec")]
    parts: Vec<BigInt>,
    #[serde(with = "crate::format::decimal_rows")]
    folding: Vec<Vec<BigInt>>,
    #[serde(with = "crate::format::decimal_rows")]
    shifted: Vec<Vec<BigInt>>,
}

impl FoldingTable {
    /// Builds a table directly from folding residues, with zero shifts.
    pub fn from_folding(parts: Vec<BigInt>, folding: Vec<Vec<BigInt>>) -> Result<Self> {
        if parts.len() != folding.len() || folding.is_empty() || folding[0].is_empty() {
            return Err(RcrtError::ModulusMismatch("one non-empty folding row per part is required".into()));
        }
        let n = folding[0].len();
        for (row, m) in folding.iter().zip(&parts) {
            if row.len() != n {
                return Err(RcrtError::Domain("folding rows differ in length".into()));
            }
            if let Some(r) = row.iter().find(|r| r.is_negative() || *r >= m) {
                return Err(RcrtError::ResidueOutOfRange { residue: r.clone(), modulus: m.clone() });
            }
        }
        let shifted = folding.iter().map(|row| vec![BigInt::zero(); row.len()]).collect();
        Ok(FoldingTable { parts, folding, shifted })
    }

    pub fn parts(&self) -> &[BigInt] {
        &self.parts
    }

    pub fn folding(&self) -> &[Vec<BigInt>] {
        &self.folding
    }

    pub fn shifted(&self) -> &[Vec<BigInt>] {
        &self.shifted
    }
}

/// Shifts the common residues above the gap down by `Γ` (Case II) and folds
/// each residue to `q̃_il = ⟨(r̃_il − r̂_il)/Γ⟩_{M_l}`.
pub fn shift_common_residues(analysis: &CommonResidueAnalysis, rt: &ResidueTable) -> Result<FoldingTable> {
    let gamma = &analysis.gamma;
    let threshold = &analysis.gammas[analysis.xi - 1];
    let parts = rt.gm.parts().to_vec();
    let mut folding = Vec::with_capacity(parts.len());
    let mut shifted = Vec::with_capacity(parts.len());
    for ((row, common), m) in rt.rows.iter().zip(&analysis.common).zip(&parts) {
        let mut q_row = Vec::with_capacity(row.len());
        let mut s_row = Vec::with_capacity(row.len());
        for (r, c) in row.iter().zip(common) {
            let hat = if analysis.case_tag == Case::I || c <= threshold { c.clone() } else { c - gamma };
            let (quotient, rest) = (r - &hat).div_rem(gamma);
            if !rest.is_zero() {
                return Err(RcrtError::Internal(format!("{r} - {hat} is not a multiple of {gamma}")));
            }
            q_row.push(quotient.mod_floor(m));
            s_row.push(hat);
        }
        folding.push(q_row);
        shifted.push(s_row);
    }
    Ok(FoldingTable { parts, folding, shifted })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GrcrtResult {
    /// `X̃_i`, ascending.
    #[serde(with = "crate::format::decimal_vec")]
    pub estimates: Vec<BigInt>,
    /// `q̃_i`, aligned with the estimates.
    #[serde(with = "crate::format::decimal_vec")]
    pub folding: Vec<BigInt>,
    /// Per integer, the matched shifted common residue `r̂_il` of each modulus.
    #[serde(with = "crate::format::decimal_rows")]
    pub common: Vec<Vec<BigInt>>,
    /// Per integer, the matched input residue `r̃_il` of each modulus.
    #[serde(with = "crate::format::decimal_rows")]
    pub residues: Vec<Vec<BigInt>>,
    /// Whether exactly one residue assignment keeps every cluster within
    /// `2δ`. Otherwise the tightest assignment was used.
    pub unique_assignment: bool,
    pub analysis: CommonResidueAnalysis,
    pub profile: SymmetricProfile,
    pub diagnostics: Vec<String>,
}

/// Decodes `N` integers from their unordered erroneous residues.
pub fn grcrt_decode(rt: &ResidueTable, delta: &BigRational) -> Result<GrcrtResult> {
    for (l, (row, m)) in rt.rows.iter().zip(rt.gm.set().moduli()).enumerate() {
        let distinct: BTreeSet<&BigInt> = row.iter().collect();
        if distinct.len() < row.len() {
            return Err(RcrtError::RepeatedResidue(format!(
                "modulus m_{} = {m} has repeated residues; decoding with repeated residues \
                 (the ⌈L/N⌉-moduli regime) is not supported",
                l + 1
            )));
        }
    }
    let analysis = analyze_common_residues(rt, delta)?;
    let ft = shift_common_residues(&analysis, rt)?;
    let profile = symmetric_gcrt(&ft)?;

    let mut diagnostics = Vec::new();
    if !analysis.feasible {
        diagnostics.push(format!(
            "δ = {delta} is not below Γ/(4N) = {}; robustness is not guaranteed",
            BigRational::new(analysis.gamma.clone(), BigInt::from(4 * rt.n()))
        ));
    }
    diagnostics.push(format!(
        "gap of {} above common residue {} (case {:?}, κ = {})",
        analysis.gap_size,
        analysis.gammas[analysis.xi - 1],
        analysis.case_tag,
        analysis.kappa
    ));
    for w in profile.folding.windows(2) {
        if w[0] == w[1] && diagnostics.last().is_none_or(|d| !d.ends_with(&format!("q̃ = {}", w[0]))) {
            diagnostics.push(format!("repeated root q̃ = {}", w[0]));
        }
    }
    diagnostics.extend(profile.diagnostics.iter().cloned());

    let (assignment, feasible, note) = match_residues(&ft, &profile.folding, delta, &analysis.gamma)?;
    diagnostics.extend(note);
    let count = BigInt::from(rt.gm.parts().len());
    let mut decoded: Vec<(BigInt, BigInt, Vec<BigInt>, Vec<BigInt>)> = profile
        .folding
        .iter()
        .zip(&assignment)
        .map(|(q, picks)| {
            let common: Vec<BigInt> = picks.iter().enumerate().map(|(l, &j)| ft.shifted[l][j].clone()).collect();
            let residues: Vec<BigInt> = picks.iter().enumerate().map(|(l, &j)| rt.rows[l][j].clone()).collect();
            let total: BigInt = common.iter().sum();
            let estimate = round_half_up(&(BigRational::from_integer(q * &analysis.gamma) + BigRational::new(total, count.clone())));
            (estimate, q.clone(), common, residues)
        })
        .collect();
    decoded.sort_by(|a, b| a.0.cmp(&b.0));
    let mut result = GrcrtResult {
        estimates: Vec::new(),
        folding: Vec::new(),
        common: Vec::new(),
        residues: Vec::new(),
        unique_assignment: feasible == 1,
        analysis,
        profile,
        diagnostics,
    };
    for (estimate, q, common, residues) in decoded {
        result.estimates.push(estimate);
        result.folding.push(q);
        result.common.push(common);
        result.residues.push(residues);
    }
    Ok(result)
}

struct Matcher<'a> {
    ft: &'a FoldingTable,
    roots: &'a [BigInt],
    twice: BigRational,
    gamma: &'a BigInt,
    used: Vec<Vec<bool>>,
    picks: Vec<Vec<usize>>,
    /// Running (min, max) of each cluster's shifted common residues.
    ranges: Vec<Option<(BigInt, BigInt)>>,
    nodes: u64,
    feasible: u64,
    best: Option<(BigInt, Vec<Vec<usize>>)>,
    best_estimates: BTreeSet<Vec<BigInt>>,
    all_estimates: BTreeSet<Vec<BigInt>>,
}

/// Candidate lists beyond this size are not enumerated in diagnostics.
const LISTED_ALTERNATIVES: usize = 4;

impl Matcher<'_> {
    fn estimates_for(&self, picks: &[Vec<usize>]) -> Vec<BigInt> {
        let count = BigInt::from(self.ft.parts.len());
        let mut out: Vec<BigInt> = self
            .roots
            .iter()
            .zip(picks)
            .map(|(q, p)| {
                let total: BigInt = p.iter().enumerate().map(|(l, &j)| &self.ft.shifted[l][j]).sum();
                round_half_up(&(BigRational::from_integer(q * self.gamma) + BigRational::new(total, count.clone())))
            })
            .collect();
        out.sort();
        out
    }

    fn cost(&self) -> BigInt {
        self.ranges.iter().flatten().map(|(lo, hi)| hi - lo).sum()
    }

    fn search(&mut self, i: usize, l: usize) -> Result<()> {
        self.nodes += 1;
        if self.nodes > MATCH_BUDGET {
            return Err(RcrtError::Budget(format!("residue matching exceeded {MATCH_BUDGET} search nodes")));
        }
        let cost = self.cost();
        // prune only once uniqueness is settled
        if self.feasible > 1 && self.best.as_ref().is_some_and(|(b, _)| cost > *b) {
            return Ok(());
        }
        if i == self.roots.len() {
            self.feasible += 1;
            let picks = self.picks.clone();
            let estimates = self.estimates_for(&picks);
            if self.all_estimates.len() <= LISTED_ALTERNATIVES {
                self.all_estimates.insert(estimates.clone());
            }
            match self.best.as_ref().map(|(b, _)| cost.cmp(b)) {
                None | Some(Ordering::Less) => {
                    self.best = Some((cost, picks));
                    self.best_estimates.clear();
                    self.best_estimates.insert(estimates);
                }
                Some(Ordering::Equal) => {
                    self.best_estimates.insert(estimates);
                }
                Some(Ordering::Greater) => {}
            }
            return Ok(());
        }
        let parts = self.ft.parts.len();
        let (next_i, next_l) = if l + 1 == parts { (i + 1, 0) } else { (i, l + 1) };
        let target = self.roots[i].mod_floor(&self.ft.parts[l]);
        for j in 0..self.ft.folding[l].len() {
            if self.used[l][j] || self.ft.folding[l][j] != target {
                continue;
            }
            if l == 0 && i > 0 && self.roots[i - 1] == self.roots[i] && j <= self.picks[i - 1][0] {
                continue;
            }
            let value = &self.ft.shifted[l][j];
            let range = match &self.ranges[i] {
                None => (value.clone(), value.clone()),
                Some((lo, hi)) => (lo.min(value).clone(), hi.max(value).clone()),
            };
            if BigRational::from_integer(&range.1 - &range.0) > self.twice {
                continue;
            }
            let saved = self.ranges[i].replace(range);
            self.used[l][j] = true;
            self.picks[i].push(j);
            self.search(next_i, next_l)?;
            self.picks[i].pop();
            self.used[l][j] = false;
            self.ranges[i] = saved;
        }
        Ok(())
    }
}

fn list(estimates: &BTreeSet<Vec<BigInt>>) -> String {
    estimates
        .iter()
        .map(|e| format!("[{}]", e.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")))
        .collect::<Vec<_>>()
        .join(" and ")
}

/// For each root, the entry of each row it owns. Entries must agree with the
/// root modulo `M_l` and keep the root's common residues within `2δ`; among
/// such assignments the one with the smallest total cluster spread wins.
/// Also returns how many assignments were complete and a note when other
/// assignments would give other estimates.
fn match_residues(
    ft: &FoldingTable,
    roots: &[BigInt],
    delta: &BigRational,
    gamma: &BigInt,
) -> Result<(Vec<Vec<usize>>, u64, Option<String>)> {
    let mut matcher = Matcher {
        ft,
        roots,
        twice: delta * BigRational::from_integer(BigInt::from(2)),
        gamma,
        used: ft.folding.iter().map(|row| vec![false; row.len()]).collect(),
        picks: vec![Vec::new(); roots.len()],
        ranges: vec![None; roots.len()],
        nodes: 0,
        feasible: 0,
        best: None,
        best_estimates: BTreeSet::new(),
        all_estimates: BTreeSet::new(),
    };
    matcher.search(0, 0)?;
    if matcher.best_estimates.len() > 1 {
        return Err(RcrtError::Ambiguous(format!(
            "residue assignment is ambiguous; candidate estimates include {}",
            list(&matcher.best_estimates)
        )));
    }
    let note = (matcher.all_estimates.len() > 1)
        .then(|| format!("alternative residue assignments within 2δ give estimates {}", list(&matcher.all_estimates)));
    let (_, picks) = matcher.best.ok_or_else(|| {
        RcrtError::Ambiguous("no residue assignment keeps every cluster of common residues within 2δ".into())
    })?;
    Ok((picks, matcher.feasible, note))
}
