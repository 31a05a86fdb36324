//! Synthetic undersampled multi-tone frequency estimation.
//!
//! A sum of complex exponentials `x(t) = Σ A_i·e^{2πi·X_i·t}` is sampled at
//! each rate `m_l` for `m_l` samples. The `m_l`-point DFT of those samples has
//! a peak at bin `⟨X_i⟩_{m_l}` for every tone, so the `N` strongest bins give
//! the residue multiset for that modulus. The DFT is the only floating-point
//! step; bins are integer indices from then on.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{RcrtError, Result};
use crate::multi::{grcrt_decode, GrcrtResult, ResidueTable};
use crate::residue::GammaModuli;

/// Bins below this fraction of the strongest bin do not count as peaks.
pub const PEAK_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ToneSpec {
    frequencies: Vec<BigInt>,
    amplitudes: Vec<Complex64>,
    duration: Option<usize>,
}

impl ToneSpec {
    /// `duration` is the number of samples taken at each rate; `None` takes
    /// exactly `m_l` samples at rate `m_l`.
    pub fn new(frequencies: Vec<BigInt>, amplitudes: Vec<Complex64>, duration: Option<usize>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(RcrtError::Domain("need at least one tone".into()));
        }
        if frequencies.len() != amplitudes.len() {
            return Err(RcrtError::Domain("need one amplitude per frequency".into()));
        }
        if let Some(f) = frequencies.iter().find(|f| !f.is_positive()) {
            return Err(RcrtError::Domain(format!("frequencies must be positive, got {f}")));
        }
        let mut sorted = frequencies.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(RcrtError::Domain("frequencies must be distinct".into()));
        }
        if amplitudes.iter().any(|a| a.norm() == 0.0 || !a.is_finite()) {
            return Err(RcrtError::Domain("amplitudes must be finite and nonzero".into()));
        }
        Ok(ToneSpec { frequencies, amplitudes, duration })
    }

    /// Unit amplitudes.
    pub fn unit(frequencies: Vec<BigInt>) -> Result<Self> {
        let amplitudes = vec![Complex64::new(1.0, 0.0); frequencies.len()];
        Self::new(frequencies, amplitudes, None)
    }

    pub fn frequencies(&self) -> &[BigInt] {
        &self.frequencies
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// `m_l` samples at rate `m_l`, evaluated with the phase reduced exactly
    /// modulo `m_l`.
    pub fn samples(&self, rate: &BigInt) -> Result<Vec<Complex64>> {
        let points = rate.to_usize().ok_or_else(|| RcrtError::Domain(format!("rate {rate} is too large")))?;
        if let Some(duration) = self.duration {
            if duration < points {
                return Err(RcrtError::Domain(format!("duration {duration} is shorter than rate {rate}")));
            }
        }
        let step = std::f64::consts::TAU / points as f64;
        let offsets: Vec<usize> =
            self.frequencies.iter().map(|f| f.mod_floor(rate).to_usize().expect("below rate")).collect();
        Ok((0..points)
            .map(|n| {
                offsets
                    .iter()
                    .zip(&self.amplitudes)
                    .map(|(&k, a)| a * Complex64::from_polar(1.0, step * ((k * n) % points) as f64))
                    .sum()
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiseMode {
    /// Noise-free samples.
    Exact,
    /// Exact residues plus independent integer errors uniform in
    /// `[−bound, bound]`; no waveform is synthesized.
    ResiduePerturbation { bound: BigInt },
    /// Exact residues plus the given errors, one row per tone in input
    /// order, one column per modulus.
    Pattern(Vec<Vec<BigInt>>),
    /// Circular complex Gaussian noise with `E|ω|² = σ²` added to every
    /// sample.
    AdditiveComplex { sigma: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    pub mode: NoiseMode,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn exact() -> Self {
        NoiseSpec { mode: NoiseMode::Exact, seed: 0 }
    }
}

/// The extracted table, plus notes on missed peaks under additive noise.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub table: ResidueTable,
    pub diagnostics: Vec<String>,
}

/// DFT bins in order of decreasing magnitude, ties by lower index.
pub fn strongest_bins(samples: &[Complex64]) -> Vec<(usize, f64)> {
    let mut buffer = samples.to_vec();
    FftPlanner::new().plan_fft_forward(buffer.len()).process(&mut buffer);
    let mut bins: Vec<(usize, f64)> = buffer.iter().map(|c| c.norm()).enumerate().collect();
    bins.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    bins
}

/// Residue table seen by the receiver for each sampling rate `m_l = Γ·M_l`.
pub fn sample_and_extract(ts: &ToneSpec, gm: &GammaModuli, ns: &NoiseSpec) -> Result<Extraction> {
    let moduli = gm.set().moduli();
    let n = ts.frequencies.len();
    let mut rng = ChaCha8Rng::seed_from_u64(ns.seed);
    let errors: Vec<Vec<BigInt>> = match &ns.mode {
        NoiseMode::ResiduePerturbation { bound } => {
            let bound = bound.to_i64().ok_or_else(|| RcrtError::Domain(format!("error bound {bound} is too large")))?;
            if bound < 0 {
                return Err(RcrtError::Domain("error bound must be non-negative".into()));
            }
            (0..n)
                .map(|_| {
                    (0..moduli.len())
                        .map(|_| {
                            let e = rng.random_range(-bound..=bound);
                            assert!(e.abs() <= bound);
                            BigInt::from(e)
                        })
                        .collect()
                })
                .collect()
        }
        NoiseMode::Pattern(errors) => errors.clone(),
        NoiseMode::Exact | NoiseMode::AdditiveComplex { .. } => Vec::new(),
    };
    if !errors.is_empty() {
        let table = ResidueTable::with_errors(gm.clone(), &ts.frequencies, &errors)?;
        check_distinct(&table)?;
        return Ok(Extraction { table, diagnostics: Vec::new() });
    }

    let noise = match ns.mode {
        NoiseMode::AdditiveComplex { sigma } => Some(
            Normal::new(0.0, sigma / std::f64::consts::SQRT_2)
                .map_err(|e| RcrtError::Domain(format!("invalid sigma {sigma}: {e}")))?,
        ),
        _ => None,
    };
    let mut rows = Vec::with_capacity(moduli.len());
    let mut diagnostics = Vec::new();
    for m in moduli {
        let mut samples = ts.samples(m)?;
        if let Some(normal) = &noise {
            for s in samples.iter_mut() {
                *s += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
            }
        }
        let bins = strongest_bins(&samples);
        let floor = bins[0].1 * PEAK_FLOOR;
        let peaks = bins.iter().take_while(|b| b.1 > floor).count();
        if peaks < n {
            return Err(RcrtError::RepeatedResidue(format!(
                "only {peaks} distinguishable DFT peaks at rate {m} for {n} tones"
            )));
        }
        let mut row: Vec<BigInt> = bins[..n].iter().map(|b| BigInt::from(b.0)).collect();
        row.sort();
        let mut truth: Vec<BigInt> = ts.frequencies.iter().map(|f| f.mod_floor(m)).collect();
        truth.sort();
        if row != truth {
            diagnostics.push(format!("peak miss at rate {m}"));
        }
        rows.push(row);
    }
    Ok(Extraction { table: ResidueTable::new(gm.clone(), rows)?, diagnostics })
}

fn check_distinct(table: &ResidueTable) -> Result<()> {
    for (row, m) in table.rows().iter().zip(table.gamma_moduli().set().moduli()) {
        if row.windows(2).any(|w| w[0] == w[1]) {
            return Err(RcrtError::RepeatedResidue(format!("two tones share a residue at rate {m}")));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Sampling,
    Decoding,
}

/// A failure together with the pipeline stage that raised it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageError {
    pub stage: Stage,
    pub error: RcrtError,
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let stage = match self.stage {
            Stage::Sampling => "sampling",
            Stage::Decoding => "decoding",
        };
        write!(f, "{stage}: {}", self.error)
    }
}

impl std::error::Error for StageError {}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrequencyEstimate {
    pub result: GrcrtResult,
    /// True frequencies, ascending.
    #[serde(with = "crate::format::decimal_vec")]
    pub truth: Vec<BigInt>,
    /// `|X̃_i − X_i|` with both sides ascending.
    #[serde(with = "crate::format::decimal_vec")]
    pub abs_errors: Vec<BigInt>,
    #[serde(with = "crate::format::decimal")]
    pub max_error: BigInt,
    /// Every error is at most `δ`.
    pub success: bool,
    pub diagnostics: Vec<String>,
}

/// Samples, extracts residues and decodes.
pub fn estimate_frequencies(
    ts: &ToneSpec,
    gm: &GammaModuli,
    ns: &NoiseSpec,
    delta: &BigRational,
) -> std::result::Result<FrequencyEstimate, StageError> {
    let extraction = sample_and_extract(ts, gm, ns).map_err(|error| StageError { stage: Stage::Sampling, error })?;
    let result =
        grcrt_decode(&extraction.table, delta).map_err(|error| StageError { stage: Stage::Decoding, error })?;
    let mut truth = ts.frequencies.clone();
    truth.sort();
    let abs_errors: Vec<BigInt> = truth.iter().zip(&result.estimates).map(|(x, e)| (x - e).abs()).collect();
    let max_error = abs_errors.iter().max().cloned().unwrap_or_else(BigInt::zero);
    let success = BigRational::from_integer(max_error.clone()) <= *delta;
    Ok(FrequencyEstimate { result, truth, abs_errors, max_error, success, diagnostics: extraction.diagnostics })
}

/// Outcome of one simulated trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialMetrics {
    #[serde(serialize_with = "crate::format::display")]
    pub trial: usize,
    #[serde(serialize_with = "crate::format::display")]
    pub seed: u64,
    pub success: bool,
    #[serde(with = "crate::format::decimal_vec")]
    pub estimates: Vec<BigInt>,
    #[serde(with = "crate::format::decimal_vec")]
    pub abs_errors: Vec<BigInt>,
    #[serde(serialize_with = "max_error")]
    pub max_error: Option<BigInt>,
    pub failed_stage: Option<Stage>,
    pub error: Option<String>,
}

fn max_error<S: serde::Serializer>(v: &Option<BigInt>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    #[serde(with = "crate::format::decimal_vec")]
    pub frequencies: Vec<BigInt>,
    #[serde(with = "crate::format::rational")]
    pub delta: BigRational,
    #[serde(serialize_with = "crate::format::display")]
    pub seed: u64,
    #[serde(serialize_with = "crate::format::display")]
    pub trials: usize,
    #[serde(serialize_with = "crate::format::display")]
    pub successes: usize,
    #[serde(serialize_with = "crate::format::display")]
    pub success_rate: f64,
    pub metrics: Vec<TrialMetrics>,
}

/// Runs `trials` independent trials; trial seeds are drawn from `seed`.
pub fn simulate(ts: &ToneSpec, gm: &GammaModuli, mode: &NoiseMode, delta: &BigRational, trials: usize, seed: u64) -> SimulationReport {
    let mut master = ChaCha8Rng::seed_from_u64(seed);
    let metrics: Vec<TrialMetrics> = (0..trials)
        .map(|trial| {
            let trial_seed = master.next_u64();
            let ns = NoiseSpec { mode: mode.clone(), seed: trial_seed };
            match estimate_frequencies(ts, gm, &ns, delta) {
                Ok(est) => TrialMetrics {
                    trial,
                    seed: trial_seed,
                    success: est.success,
                    estimates: est.result.estimates,
                    abs_errors: est.abs_errors,
                    max_error: Some(est.max_error),
                    failed_stage: None,
                    error: None,
                },
                Err(e) => TrialMetrics {
                    trial,
                    seed: trial_seed,
                    success: false,
                    estimates: Vec::new(),
                    abs_errors: Vec::new(),
                    max_error: None,
                    failed_stage: Some(e.stage),
                    error: Some(e.error.to_string()),
                },
            }
        })
        .collect();
    let successes = metrics.iter().filter(|m| m.success).count();
    let mut frequencies = ts.frequencies.clone();
    frequencies.sort();
    SimulationReport {
        frequencies,
        delta: delta.clone(),
        seed,
        trials,
        successes,
        success_rate: if trials == 0 { 0.0 } else { successes as f64 / trials as f64 },
        metrics,
    }
}
