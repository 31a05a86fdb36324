//! Robust Chinese Remainder Theorem reconstruction.
//!
//! - [`residue`]: modulus sets, residue vectors and generalized CRT.
//! - [`range`]: the shift pseudo-metric and the error-bound/dynamic-range
//!   staircase.
//! - [`single`]: robust reconstruction of one integer.
//! - [`select`]: prime modulus selection and success-probability bounds.
//! - [`multi`]: robust reconstruction of several integers from unordered
//!   residue sets.
//! - [`sim`]: a synthetic undersampled multi-tone frequency estimator.

pub mod error;
pub mod format;
pub mod multi;
pub mod primes;
pub mod range;
pub mod residue;
pub mod select;
pub mod sim;
pub mod single;

pub use error::{RcrtError, Result};
pub use multi::{
    analyze_common_residues, dynamic_range_check, grcrt_decode, shift_common_residues, symmetric_bound_check,
    symmetric_gcrt, CommonResidueAnalysis, DynamicRangeReport, FoldingTable, GrcrtResult, ResidueTable,
    SymmetricProfile,
};
pub use range::{
    capacity_at_least, capacity_bounds, capacity_for_delta, min_distance, range_profile, shift_rho, two_moduli_recursion,
    MetricValue, ProfileStep, RangeProfile,
};
pub use residue::{
    crt_reconstruct, crt_signed, mod_reduce, residue_vector, round_half_up, GammaModuli, ModulusSet,
    ResidueVector,
};
pub use sim::{
    estimate_frequencies, sample_and_extract, simulate, FrequencyEstimate, NoiseMode, NoiseSpec, SimulationReport,
    ToneSpec, TrialMetrics,
};
pub use single::{
    build_error_list, closed_form_decode, closed_form_rcrt, search_decode, DecodeResult, ErrorEntry, ErrorList,
};
pub use select::{
    gamma_reduce, prime_capacity, prob_bound_gamma, prob_bound_simple, random_select, BoundValue, SelectionReport,
    SelectionSpec,
};
