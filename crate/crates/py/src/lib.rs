//! Python bindings for `rcrt-core`.
//!
//! Integers cross the boundary as Python `int`s of any size. Rationals such
//! as `δ` accept an `int`, a `fractions.Fraction` or a string like `"11/4"`.
//! Reports with many fields come back as dicts built from the same JSON the
//! CLI prints, so every number in them is a decimal string.

use num_bigint::BigInt;
use num_rational::BigRational;
use pyo3::create_exception;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use rcrt_core::format::parse_rational;
use rcrt_core::{NoiseMode, SelectionSpec, ToneSpec};

create_exception!(rcrt, RcrtError, PyValueError);

fn err(e: rcrt_core::RcrtError) -> PyErr {
    RcrtError::new_err(e.to_string())
}

fn rational(value: &Bound<'_, PyAny>) -> PyResult<BigRational> {
    let text = value.str()?.to_string();
    parse_rational(&text).ok_or_else(|| RcrtError::new_err(format!("format error: not a rational: {text:?}")))
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (value.to_string(),))
}

/// A validated set of moduli, sorted ascending.
#[pyclass(frozen)]
struct ModulusSet(rcrt_core::ModulusSet);

#[pymethods]
impl ModulusSet {
    #[new]
    fn new(moduli: Vec<BigInt>) -> PyResult<Self> {
        rcrt_core::ModulusSet::new(moduli).map(Self).map_err(err)
    }

    #[getter]
    fn moduli(&self) -> Vec<BigInt> {
        self.0.moduli().to_vec()
    }

    #[getter]
    fn lcm(&self) -> BigInt {
        self.0.lcm().clone()
    }

    fn residues(&self, x: BigInt) -> Vec<BigInt> {
        self.0.residue_vector(&x).residues().to_vec()
    }

    /// The unique `X` in `[0, lcm)` with the given residues.
    fn reconstruct(&self, residues: Vec<BigInt>) -> PyResult<BigInt> {
        let rv = rcrt_core::ResidueVector::new(self.0.clone(), residues).map_err(err)?;
        rcrt_core::crt_reconstruct(&rv).map_err(err)
    }

    /// Staircase of `(K, 4δ)` pairs.
    fn range_profile(&self) -> PyResult<Vec<(BigInt, BigInt)>> {
        let profile = rcrt_core::range_profile(&self.0).map_err(err)?;
        Ok(profile.steps().iter().map(|s| (s.k.clone(), s.delta4.clone())).collect())
    }

    /// Largest `K` decodable with error bound `δ = delta4/4`.
    fn capacity(&self, delta4: BigInt) -> PyResult<BigInt> {
        rcrt_core::capacity_for_delta(&self.0, &delta4).map_err(err)
    }

    fn min_distance(&self, k: BigInt) -> PyResult<BigInt> {
        rcrt_core::min_distance(&self.0, &k).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __repr__(&self) -> String {
        let moduli: Vec<String> = self.0.moduli().iter().map(|m| m.to_string()).collect();
        format!("ModulusSet([{}])", moduli.join(", "))
    }
}

/// Moduli `Γ·M_l` with pairwise coprime `M_l`.
#[pyclass(frozen)]
struct GammaModuli(rcrt_core::GammaModuli);

#[pymethods]
impl GammaModuli {
    #[new]
    fn new(gamma: BigInt, parts: Vec<BigInt>) -> PyResult<Self> {
        rcrt_core::GammaModuli::new(gamma, parts).map(Self).map_err(err)
    }

    #[staticmethod]
    fn factor(set: &ModulusSet) -> PyResult<Self> {
        rcrt_core::GammaModuli::factor(&set.0).map(Self).map_err(err)
    }

    #[getter]
    fn gamma(&self) -> BigInt {
        self.0.gamma().clone()
    }

    #[getter]
    fn parts(&self) -> Vec<BigInt> {
        self.0.parts().to_vec()
    }

    #[getter]
    fn moduli(&self) -> Vec<BigInt> {
        self.0.set().moduli().to_vec()
    }

    fn modulus_set(&self) -> ModulusSet {
        ModulusSet(self.0.set().clone())
    }

    fn __repr__(&self) -> String {
        let parts: Vec<String> = self.0.parts().iter().map(|m| m.to_string()).collect();
        format!("GammaModuli({}, [{}])", self.0.gamma(), parts.join(", "))
    }
}

/// Unordered residues of several integers: one row per modulus.
#[pyclass(frozen)]
struct ResidueTable(rcrt_core::ResidueTable);

#[pymethods]
impl ResidueTable {
    #[new]
    fn new(moduli: &GammaModuli, rows: Vec<Vec<BigInt>>) -> PyResult<Self> {
        rcrt_core::ResidueTable::new(moduli.0.clone(), rows).map(Self).map_err(err)
    }

    #[staticmethod]
    #[pyo3(signature = (moduli, xs, errors=None))]
    fn encode(moduli: &GammaModuli, xs: Vec<BigInt>, errors: Option<Vec<Vec<BigInt>>>) -> PyResult<Self> {
        match errors {
            Some(errors) => rcrt_core::ResidueTable::with_errors(moduli.0.clone(), &xs, &errors),
            None => rcrt_core::ResidueTable::encode(moduli.0.clone(), &xs),
        }
        .map(Self)
        .map_err(err)
    }

    #[staticmethod]
    fn from_json(moduli: &GammaModuli, text: &str) -> PyResult<Self> {
        rcrt_core::ResidueTable::from_json(moduli.0.clone(), text).map(Self).map_err(err)
    }

    #[getter]
    fn rows(&self) -> Vec<Vec<BigInt>> {
        self.0.rows().to_vec()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }
}

#[pyclass(frozen, get_all)]
struct DecodeResult {
    estimate: BigInt,
    anchor: BigInt,
    folding: Option<BigInt>,
    matches: Option<usize>,
    comparisons: u64,
}

impl From<rcrt_core::DecodeResult> for DecodeResult {
    fn from(r: rcrt_core::DecodeResult) -> Self {
        Self { estimate: r.estimate, anchor: r.anchor, folding: r.folding, matches: r.matches, comparisons: r.comparisons }
    }
}

#[pymethods]
impl DecodeResult {
    fn __repr__(&self) -> String {
        format!("DecodeResult(estimate={}, anchor={})", self.estimate, self.anchor)
    }
}

/// Sorted error list for the search decoder.
#[pyclass(frozen)]
struct ErrorList(rcrt_core::ErrorList);

#[pymethods]
impl ErrorList {
    #[new]
    fn new(set: &ModulusSet, delta4: BigInt) -> PyResult<Self> {
        rcrt_core::build_error_list(&set.0, &delta4).map(Self).map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        rcrt_core::ErrorList::from_json(text).map(Self).map_err(err)
    }

    #[getter]
    fn tau(&self) -> u64 {
        self.0.tau()
    }

    #[getter]
    fn delta4(&self) -> BigInt {
        self.0.delta4().clone()
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    /// Decodes residues given in the set's (ascending) modulus order.
    /// `k` defaults to the capacity for the list's `4δ`.
    #[pyo3(signature = (residues, k=None))]
    fn decode(&self, residues: Vec<BigInt>, k: Option<BigInt>) -> PyResult<DecodeResult> {
        let set = self.0.set();
        let k = match k {
            Some(k) => k,
            None => rcrt_core::capacity_for_delta(set, self.0.delta4()).map_err(err)?,
        };
        let rv = rcrt_core::ResidueVector::new(set.clone(), residues).map_err(err)?;
        rcrt_core::search_decode(&self.0, &rv, &k).map(Into::into).map_err(err)
    }
}

#[pyclass(frozen)]
struct GrcrtResult(rcrt_core::GrcrtResult);

#[pymethods]
impl GrcrtResult {
    #[getter]
    fn estimates(&self) -> Vec<BigInt> {
        self.0.estimates.clone()
    }

    #[getter]
    fn folding(&self) -> Vec<BigInt> {
        self.0.folding.clone()
    }

    #[getter]
    fn common(&self) -> Vec<Vec<BigInt>> {
        self.0.common.clone()
    }

    #[getter]
    fn unique_assignment(&self) -> bool {
        self.0.unique_assignment
    }

    #[getter]
    fn diagnostics(&self) -> Vec<String> {
        self.0.diagnostics.clone()
    }

    /// Full result, including the common-residue analysis and the
    /// symmetric-polynomial profile.
    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        json_to_py(py, &serde_json::to_value(&self.0).expect("serializable"))
    }

    fn __repr__(&self) -> String {
        let xs: Vec<String> = self.0.estimates.iter().map(|x| x.to_string()).collect();
        format!("GrcrtResult(estimates=[{}])", xs.join(", "))
    }
}

/// Closed-form robust reconstruction; residues follow the set's modulus order.
#[pyfunction]
fn closed_form_decode(set: &ModulusSet, residues: Vec<BigInt>) -> PyResult<DecodeResult> {
    let rv = rcrt_core::ResidueVector::new(set.0.clone(), residues).map_err(err)?;
    rcrt_core::closed_form_decode(&set.0, &rv).map(Into::into).map_err(err)
}

#[pyfunction]
fn grcrt_decode(table: &ResidueTable, delta: &Bound<'_, PyAny>) -> PyResult<GrcrtResult> {
    rcrt_core::grcrt_decode(&table.0, &rational(delta)?).map(GrcrtResult).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (beta, count, delta4, k_target, seed, trials=1000))]
fn random_select<'py>(
    py: Python<'py>,
    beta: u32,
    count: usize,
    delta4: BigInt,
    k_target: BigInt,
    seed: u64,
    trials: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = SelectionSpec::new(beta, count, delta4, k_target).map_err(err)?;
    let report = rcrt_core::random_select(&spec, seed, trials).map_err(err)?;
    json_to_py(py, &serde_json::to_value(&report).expect("serializable"))
}

/// `(simple, gamma)` success-probability lower bounds, clamped to `[0, 1]`.
#[pyfunction]
fn prob_bounds(beta: u32, count: usize, delta4: BigInt, k: BigInt, p_l: BigInt) -> PyResult<(f64, f64)> {
    let spec = SelectionSpec::new(beta, count, delta4, k.clone()).map_err(err)?;
    Ok((rcrt_core::prob_bound_simple(&spec, &p_l, &k).value, rcrt_core::prob_bound_gamma(&spec, &p_l, &k).value))
}

/// Multi-tone simulation. `noise` is one of `"exact"`, `"perturbation"`
/// (needs `bound`), `"pattern"` (needs `errors`) or `"additive"` (needs
/// `sigma`).
#[pyfunction]
#[pyo3(signature = (freqs, moduli, delta, seed, trials=1, noise="exact", bound=None, errors=None, sigma=None))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    freqs: Vec<BigInt>,
    moduli: &GammaModuli,
    delta: &Bound<'py, PyAny>,
    seed: u64,
    trials: usize,
    noise: &str,
    bound: Option<BigInt>,
    errors: Option<Vec<Vec<BigInt>>>,
    sigma: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let missing = |what: &str| RcrtError::new_err(format!("domain error: {noise} noise needs {what}"));
    let mode = match noise {
        "exact" => NoiseMode::Exact,
        "perturbation" => NoiseMode::ResiduePerturbation { bound: bound.ok_or_else(|| missing("bound"))? },
        "pattern" => NoiseMode::Pattern(errors.ok_or_else(|| missing("errors"))?),
        "additive" => NoiseMode::AdditiveComplex { sigma: sigma.ok_or_else(|| missing("sigma"))? },
        other => return Err(RcrtError::new_err(format!("domain error: unknown noise mode {other:?}"))),
    };
    let ts = ToneSpec::unit(freqs).map_err(err)?;
    let report = rcrt_core::simulate(&ts, &moduli.0, &mode, &rational(delta)?, trials, seed);
    json_to_py(py, &serde_json::to_value(&report).expect("serializable"))
}

#[pymodule]
fn rcrt(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("RcrtError", m.py().get_type::<RcrtError>())?;
    m.add_class::<ModulusSet>()?;
    m.add_class::<GammaModuli>()?;
    m.add_class::<ResidueTable>()?;
    m.add_class::<DecodeResult>()?;
    m.add_class::<ErrorList>()?;
    m.add_class::<GrcrtResult>()?;
    m.add_function(wrap_pyfunction!(closed_form_decode, m)?)?;
    m.add_function(wrap_pyfunction!(grcrt_decode, m)?)?;
    m.add_function(wrap_pyfunction!(random_select, m)?)?;
    m.add_function(wrap_pyfunction!(prob_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
