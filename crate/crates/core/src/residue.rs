//! Modulus sets, residue vectors and generalized CRT reconstruction.
//!
//! All values are unbounded integers. Moduli need not be coprime: the
//! reconstruction merges congruences one at a time and checks each pair for
//! consistency modulo their gcd.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{RcrtError, Result};

/// `⟨x⟩_m` with floor semantics, so the result is always in `[0, m)`.
pub fn mod_reduce(x: &BigInt, m: &BigInt) -> Result<BigInt> {
    if !m.is_positive() {
        return Err(RcrtError::InvalidModulus(format!("modulus must be >= 1, got {m}")));
    }
    Ok(x.mod_floor(m))
}

/// Nearest integer with ties rounded up: `[x] = ⌊x + 1/2⌋`.
pub fn round_half_up(x: &BigRational) -> BigInt {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    (x + half).floor().to_integer()
}

/// Precomputed merge schedule for a list of positive moduli.
#[derive(Debug, Clone)]
pub(crate) struct CrtPlan {
    moduli: Vec<BigInt>,
    steps: Vec<MergeStep>,
}

#[derive(Debug, Clone)]
struct MergeStep {
    prefix: BigInt,
    gcd: BigInt,
    reduced: BigInt,
    inverse: BigInt,
}

impl CrtPlan {
    pub(crate) fn new(moduli: &[BigInt]) -> Self {
        let mut prefix = BigInt::one();
        let mut steps = Vec::with_capacity(moduli.len());
        for m in moduli {
            let gcd = prefix.gcd(m);
            let reduced = m / &gcd;
            let inverse = if reduced.is_one() {
                BigInt::zero()
            } else {
                (&prefix / &gcd)
                    .mod_floor(&reduced)
                    .modinv(&reduced)
                    .expect("prefix/gcd is coprime to m/gcd")
            };
            steps.push(MergeStep { prefix: prefix.clone(), gcd, reduced, inverse });
            prefix = prefix.lcm(m);
        }
        Self { moduli: moduli.to_vec(), steps }
    }

    /// Unique solution in `[0, lcm)`; residues must already be reduced.
    pub(crate) fn solve(&self, residues: &[BigInt]) -> Result<BigInt> {
        debug_assert_eq!(residues.len(), self.moduli.len());
        let mut x = BigInt::zero();
        for (l, (step, r)) in self.steps.iter().zip(residues).enumerate() {
            let diff = r - &x;
            if !diff.is_multiple_of(&step.gcd) {
                return Err(self.violating_pair(residues, l));
            }
            if !step.reduced.is_one() {
                let t = ((diff / &step.gcd) * &step.inverse).mod_floor(&step.reduced);
                x += &step.prefix * t;
            }
        }
        Ok(x)
    }

    fn violating_pair(&self, residues: &[BigInt], l: usize) -> RcrtError {
        for j in 0..l {
            let g = self.moduli[j].gcd(&self.moduli[l]);
            if !(&residues[l] - &residues[j]).is_multiple_of(&g) {
                return RcrtError::Inconsistent {
                    first: j,
                    second: l,
                    first_residue: residues[j].clone(),
                    second_residue: residues[l].clone(),
                    gcd: g,
                };
            }
        }
        // Pairwise consistency implies solvability, so some pair must fail.
        RcrtError::Internal(format!("merge failed at index {l} without a violating pair"))
    }
}

#[derive(Debug)]
struct ModulusSetInner {
    moduli: Vec<BigInt>,
    lcm: BigInt,
    pairwise_gcd: Vec<Vec<BigInt>>,
    plan: CrtPlan,
}

/// An ascending list of at least two distinct moduli, each `>= 2`.
///
/// Cloning is cheap; the lcm, pairwise gcd table and CRT merge plan are
/// computed once at construction.
#[derive(Clone)]
pub struct ModulusSet {
    inner: Arc<ModulusSetInner>,
}

impl ModulusSet {
    /// Sorts the moduli ascending; rejects duplicates, moduli below 2 and
    /// sets with fewer than two entries.
    pub fn new(mut moduli: Vec<BigInt>) -> Result<Self> {
        if moduli.len() < 2 {
            return Err(RcrtError::InvalidModuli(format!(
                "need at least two moduli, got {}",
                moduli.len()
            )));
        }
        if let Some(bad) = moduli.iter().find(|m| **m < BigInt::from(2)) {
            return Err(RcrtError::InvalidModulus(format!("every modulus must be >= 2, got {bad}")));
        }
        moduli.sort();
        if let Some(w) = moduli.windows(2).find(|w| w[0] == w[1]) {
            return Err(RcrtError::InvalidModuli(format!("duplicate modulus {}", w[0])));
        }
        let lcm = moduli.iter().fold(BigInt::one(), |acc, m| acc.lcm(m));
        let pairwise_gcd = moduli
            .iter()
            .map(|a| moduli.iter().map(|b| a.gcd(b)).collect())
            .collect();
        let plan = CrtPlan::new(&moduli);
        Ok(Self { inner: Arc::new(ModulusSetInner { moduli, lcm, pairwise_gcd, plan }) })
    }

    pub fn from_u64s(moduli: &[u64]) -> Result<Self> {
        Self::new(moduli.iter().map(|&m| BigInt::from(m)).collect())
    }

    pub fn moduli(&self) -> &[BigInt] {
        &self.inner.moduli
    }

    pub fn len(&self) -> usize {
        self.inner.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lcm(&self) -> &BigInt {
        &self.inner.lcm
    }

    pub fn gcd(&self, l: usize, j: usize) -> &BigInt {
        &self.inner.pairwise_gcd[l][j]
    }

    pub fn pairwise_gcd(&self) -> &[Vec<BigInt>] {
        &self.inner.pairwise_gcd
    }

    /// The smallest modulus, `m_0`.
    pub fn min_modulus(&self) -> &BigInt {
        &self.inner.moduli[0]
    }

    pub fn max_modulus(&self) -> &BigInt {
        self.inner.moduli.last().expect("at least two moduli")
    }

    pub fn is_pairwise_coprime(&self) -> bool {
        let n = self.len();
        (0..n).all(|l| (l + 1..n).all(|j| self.gcd(l, j).is_one()))
    }

    /// Machine-word moduli and lcm, when everything fits in `u64`.
    pub fn as_u64(&self) -> Option<(Vec<u64>, u64)> {
        let moduli = self.moduli().iter().map(|m| m.to_u64()).collect::<Option<Vec<_>>>()?;
        Some((moduli, self.lcm().to_u64()?))
    }

    /// The set with every modulus multiplied by `gamma`.
    pub fn scaled(&self, gamma: &BigInt) -> Result<Self> {
        if !gamma.is_positive() {
            return Err(RcrtError::InvalidModulus(format!("scale factor must be >= 1, got {gamma}")));
        }
        Self::new(self.moduli().iter().map(|m| m * gamma).collect())
    }

    pub(crate) fn plan(&self) -> &CrtPlan {
        &self.inner.plan
    }

    pub fn residue_vector(&self, x: &BigInt) -> ResidueVector {
        residue_vector(x, self)
    }
}

impl PartialEq for ModulusSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.moduli == other.inner.moduli
    }
}

impl Eq for ModulusSet {}

impl fmt::Debug for ModulusSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModulusSet")
            .field("moduli", &self.inner.moduli)
            .field("lcm", &self.inner.lcm)
            .finish()
    }
}

impl fmt::Display for ModulusSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.moduli().iter().map(|m| m.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// The residues of one integer modulo every modulus of a set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResidueVector {
    set: ModulusSet,
    residues: Vec<BigInt>,
}

impl ResidueVector {
    /// Validates `0 <= r_l < m_l` for every component.
    pub fn new(set: ModulusSet, residues: Vec<BigInt>) -> Result<Self> {
        if residues.len() != set.len() {
            return Err(RcrtError::ModulusMismatch(format!(
                "{} residues for {} moduli",
                residues.len(),
                set.len()
            )));
        }
        for (r, m) in residues.iter().zip(set.moduli()) {
            if r.is_negative() || r >= m {
                return Err(RcrtError::ResidueOutOfRange { residue: r.clone(), modulus: m.clone() });
            }
        }
        Ok(Self { set, residues })
    }

    /// Reduces arbitrary integers componentwise.
    pub fn from_unreduced(set: ModulusSet, values: &[BigInt]) -> Result<Self> {
        if values.len() != set.len() {
            return Err(RcrtError::ModulusMismatch(format!(
                "{} values for {} moduli",
                values.len(),
                set.len()
            )));
        }
        let residues = values.iter().zip(set.moduli()).map(|(v, m)| v.mod_floor(m)).collect();
        Ok(Self { set, residues })
    }

    pub fn set(&self) -> &ModulusSet {
        &self.set
    }

    pub fn residues(&self) -> &[BigInt] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }

    /// Componentwise `(self + offsets) mod m_l`.
    pub fn shifted(&self, offsets: &[BigInt]) -> Result<Self> {
        let values: Vec<BigInt> = self.residues.iter().zip(offsets).map(|(r, o)| r + o).collect();
        if offsets.len() != self.len() {
            return Err(RcrtError::ModulusMismatch(format!(
                "{} offsets for {} residues",
                offsets.len(),
                self.len()
            )));
        }
        Self::from_unreduced(self.set.clone(), &values)
    }

    pub fn is_consistent(&self) -> bool {
        self.set.plan().solve(&self.residues).is_ok()
    }
}

pub fn residue_vector(x: &BigInt, set: &ModulusSet) -> ResidueVector {
    let residues = set.moduli().iter().map(|m| x.mod_floor(m)).collect();
    ResidueVector { set: set.clone(), residues }
}

/// Generalized CRT: the unique `X` in `[0, lcm)` with `⟨X⟩_{m_l} = r_l`.
pub fn crt_reconstruct(rv: &ResidueVector) -> Result<BigInt> {
    rv.set.plan().solve(&rv.residues)
}

/// Like [`crt_reconstruct`], but values at or above `lcm/2` are read as
/// negatives.
pub fn crt_signed(rv: &ResidueVector) -> Result<BigInt> {
    let v = crt_reconstruct(rv)?;
    Ok(to_signed(v, rv.set.lcm()))
}

/// Symmetric representative: `v` if `2v < m`, else `v - m`.
pub(crate) fn to_signed(v: BigInt, m: &BigInt) -> BigInt {
    if &v * 2u32 < *m {
        v
    } else {
        v - m
    }
}

/// Moduli factored as `m_l = Γ·M_l` with pairwise-coprime `M_l`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GammaModuli {
    gamma: BigInt,
    parts: Vec<BigInt>,
    set: ModulusSet,
}

impl GammaModuli {
    pub fn new(gamma: BigInt, mut parts: Vec<BigInt>) -> Result<Self> {
        if !gamma.is_positive() {
            return Err(RcrtError::InvalidModulus(format!("gamma must be >= 1, got {gamma}")));
        }
        if let Some(bad) = parts.iter().find(|m| !m.is_positive()) {
            return Err(RcrtError::InvalidModulus(format!("coprime parts must be >= 1, got {bad}")));
        }
        parts.sort();
        for l in 0..parts.len() {
            for j in l + 1..parts.len() {
                let g = parts[l].gcd(&parts[j]);
                if !g.is_one() {
                    return Err(RcrtError::InvalidModuli(format!(
                        "coprime parts {} and {} share the factor {g}",
                        parts[l], parts[j]
                    )));
                }
            }
        }
        let set = ModulusSet::new(parts.iter().map(|m| m * &gamma).collect())?;
        Ok(Self { gamma, parts, set })
    }

    pub fn from_u64s(gamma: u64, parts: &[u64]) -> Result<Self> {
        Self::new(BigInt::from(gamma), parts.iter().map(|&m| BigInt::from(m)).collect())
    }

    /// Recovers `Γ = gcd(m_l)` and the parts from a flat modulus list.
    /// Fails when the quotients are not pairwise coprime.
    pub fn factor(set: &ModulusSet) -> Result<Self> {
        let gamma = set.moduli().iter().fold(BigInt::zero(), |acc, m| acc.gcd(m));
        Self::new(gamma.clone(), set.moduli().iter().map(|m| m / &gamma).collect())
    }

    pub fn gamma(&self) -> &BigInt {
        &self.gamma
    }

    pub fn parts(&self) -> &[BigInt] {
        &self.parts
    }

    pub fn set(&self) -> &ModulusSet {
        &self.set
    }

    /// `∏ M_l`, the range of the folding numbers.
    pub fn parts_product(&self) -> BigInt {
        self.parts.iter().product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    fn set(ms: &[u64]) -> ModulusSet {
        ModulusSet::from_u64s(ms).unwrap()
    }

    #[test]
    fn mod_reduce_examples() {
        assert_eq!(mod_reduce(&big(0), &big(7)).unwrap(), big(0));
        assert_eq!(mod_reduce(&big(1110), &big(350)).unwrap(), big(60));
        assert_eq!(mod_reduce(&big(-3), &big(7)).unwrap(), big(4));
        assert!(matches!(mod_reduce(&big(5), &big(0)), Err(RcrtError::InvalidModulus(_))));
    }

    #[test]
    fn residue_vector_of_worked_example() {
        let ms = set(&[350, 450, 550, 650]);
        let rv = residue_vector(&big(1110), &ms);
        // ⟨1110⟩_550 = 10; the printed table lists 0 there.
        assert_eq!(rv.residues(), &[big(60), big(210), big(10), big(460)]);
        assert!(residue_vector(&big(0), &ms).residues().iter().all(Zero::is_zero));
        assert!(residue_vector(ms.lcm(), &ms).residues().iter().all(Zero::is_zero));
    }

    #[test]
    fn crt_examples() {
        let ms = set(&[7, 9, 11, 13]);
        let rv = |r: &[i64]| ResidueVector::new(ms.clone(), r.iter().map(|&v| big(v)).collect()).unwrap();
        assert_eq!(crt_reconstruct(&rv(&[4, 3, 3, 11])).unwrap(), big(102));
        assert_eq!(crt_reconstruct(&rv(&[0, 0, 0, 0])).unwrap(), big(0));
        assert_eq!(crt_reconstruct(&rv(&[6, 7, 1, 8])).unwrap(), big(34));
        assert_eq!(crt_signed(&rv(&[2, 6, 10, 1])).unwrap(), big(-12));
        assert_eq!(crt_signed(&rv(&[0, 0, 0, 0])).unwrap(), big(0));
        assert_eq!(crt_signed(&residue_vector(&big(6), &ms)).unwrap(), big(6));
    }

    #[test]
    fn inconsistent_residues_name_the_pair() {
        let ms = set(&[350, 450, 550, 650]);
        let rv = ResidueVector::new(ms, vec![big(64), big(206), big(7), big(462)]).unwrap();
        match crt_reconstruct(&rv) {
            Err(RcrtError::Inconsistent { first, second, gcd, .. }) => {
                assert_eq!((first, second), (0, 1));
                assert_eq!(gcd, big(50));
            }
            other => panic!("expected inconsistency, got {other:?}"),
        }
    }

    #[test]
    fn non_coprime_round_trip() {
        let ms = set(&[165, 264, 341]);
        for x in [0i64, 1, 164, 165, 1056, 10571, 40919] {
            assert_eq!(crt_reconstruct(&residue_vector(&big(x), &ms)).unwrap(), big(x));
        }
    }

    #[test]
    fn modulus_set_validation() {
        assert!(ModulusSet::from_u64s(&[7]).is_err());
        assert!(ModulusSet::from_u64s(&[7, 7]).is_err());
        assert!(ModulusSet::from_u64s(&[1, 7]).is_err());
        let ms = set(&[10, 7]);
        assert_eq!(ms.moduli(), &[big(7), big(10)]);
        assert_eq!(ms.lcm(), &big(70));
        let ms = set(&[165, 341, 264]);
        assert_eq!(ms.lcm(), &big(40920));
        for l in 0..3 {
            for j in 0..3 {
                let g = ms.gcd(l, j);
                assert!(ms.moduli()[l].is_multiple_of(g) && ms.moduli()[j].is_multiple_of(g));
            }
        }
    }

    #[test]
    fn residue_vector_rejects_out_of_range() {
        let ms = set(&[7, 9]);
        assert!(ResidueVector::new(ms.clone(), vec![big(7), big(0)]).is_err());
        assert!(ResidueVector::new(ms.clone(), vec![big(-1), big(0)]).is_err());
        assert!(ResidueVector::new(ms, vec![big(1)]).is_err());
    }

    #[test]
    fn gamma_moduli() {
        let gm = GammaModuli::from_u64s(50, &[13, 7, 11, 9]).unwrap();
        assert_eq!(gm.parts(), &[big(7), big(9), big(11), big(13)]);
        assert_eq!(gm.set().lcm(), &(big(50) * big(9009)));
        assert!(GammaModuli::from_u64s(50, &[6, 9]).is_err());
        let factored = GammaModuli::factor(&set(&[650, 350, 550, 450])).unwrap();
        assert_eq!(factored.gamma(), &big(50));
        assert_eq!(factored.parts(), &[big(7), big(9), big(11), big(13)]);
        // 11·15 and 11·24 share a further factor 3.
        assert!(GammaModuli::factor(&set(&[165, 341, 264])).is_err());
    }

    #[test]
    fn round_half_up_ties() {
        let r = |n: i64, d: i64| BigRational::new(big(n), big(d));
        assert_eq!(round_half_up(&r(5, 2)), big(3));
        assert_eq!(round_half_up(&r(-5, 2)), big(-2));
        assert_eq!(round_half_up(&r(-15, 4)), big(-4));
        assert_eq!(round_half_up(&r(29, 4)), big(7));
    }
}
