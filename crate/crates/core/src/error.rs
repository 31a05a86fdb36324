use num_bigint::BigInt;
use thiserror::Error;

/// Errors raised by the reconstruction, analysis and simulation routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RcrtError {
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),

    #[error("invalid moduli: {0}")]
    InvalidModuli(String),

    #[error("modulus set mismatch: {0}")]
    ModulusMismatch(String),

    #[error("residue {residue} out of range for modulus {modulus}")]
    ResidueOutOfRange { residue: BigInt, modulus: BigInt },

    #[error(
        "inconsistent residues: r[{first}] = {first_residue} and r[{second}] = {second_residue} \
         disagree modulo gcd = {gcd}"
    )]
    Inconsistent {
        first: usize,
        second: usize,
        first_residue: BigInt,
        second_residue: BigInt,
        gcd: BigInt,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("decode failure: {0}")]
    DecodeFailure(String),

    #[error("dynamic range violated: {0}")]
    BoundViolation(String),

    #[error("no common-residue gap wider than 2*delta: {0}")]
    NoGap(String),

    #[error("repeated residues: {0}")]
    RepeatedResidue(String),

    #[error("ambiguous residue matching: {0}")]
    Ambiguous(String),

    #[error("internal consistency: {0}")]
    Internal(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, RcrtError>;
