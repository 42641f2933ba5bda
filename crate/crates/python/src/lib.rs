//! Python bindings. Complex amplitudes cross the boundary as Python
//! `complex`; reports cross as plain objects or JSON strings.

use eigenprep::harness::{self, ExperimentConfig, FineGrid, QpeSettings};
use eigenprep::phase_estimation::OutcomeDistribution;
use eigenprep::{Error, PotentialSpec, SpectralInstance, StateVector};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(eigenprep_py, InvariantError, PyRuntimeError);

fn to_py(err: Error) -> PyErr {
    let msg = err.to_string();
    match err.root() {
        Error::InvalidArgument(_) => PyValueError::new_err(msg),
        Error::ResourceLimit(_) => PyMemoryError::new_err(msg),
        Error::InvariantViolation { .. } => InvariantError::new_err(msg),
        _ => PyRuntimeError::new_err(msg),
    }
}

fn potential(spec: &str) -> PyResult<PotentialSpec> {
    spec.parse().map_err(to_py)
}

fn instance(phases: Vec<f64>, amplitudes: Vec<Complex64>) -> PyResult<SpectralInstance> {
    SpectralInstance::new(phases, amplitudes).map_err(to_py)
}

#[pyclass(name = "ExperimentConfig", frozen)]
struct PyExperimentConfig {
    inner: ExperimentConfig,
}

#[pymethods]
impl PyExperimentConfig {
    #[new]
    #[pyo3(signature = (n0, potential="zero", k=0, s=None, fine_n=None, bits=8, epsilon=0.25, b=None, shots=0, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n0: Vec<usize>,
        potential: &str,
        k: usize,
        s: Option<u32>,
        fine_n: Option<usize>,
        bits: u32,
        epsilon: f64,
        b: Option<u32>,
        shots: u64,
        seed: u64,
    ) -> PyResult<Self> {
        let fine = match (s, fine_n) {
            (Some(s), None) => FineGrid::Doublings(s),
            (None, Some(n)) => FineGrid::FixedN(n),
            _ => return Err(PyValueError::new_err("give exactly one of s or fine_n")),
        };
        let mut inner = ExperimentConfig::new(self::potential(potential)?, k, n0, fine);
        inner.qpe = QpeSettings { bits, epsilon, b };
        inner.shots = shots;
        inner.rng_seed = seed;
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("plain data")
    }

    fn __repr__(&self) -> String {
        format!("ExperimentConfig({})", self.to_json())
    }
}

#[pyclass(name = "OverlapReport", frozen, get_all)]
struct PyOverlapReport {
    k: usize,
    coefficients: Vec<Complex64>,
    success_probability: f64,
    failure: f64,
    error_norm: f64,
    degenerate_warning: bool,
}

#[pymethods]
impl PyOverlapReport {
    fn __repr__(&self) -> String {
        format!(
            "OverlapReport(k={}, success_probability={}, failure={}, error_norm={})",
            self.k, self.success_probability, self.failure, self.error_norm
        )
    }
}

/// Lowest `count` eigenpairs of the discretized operator, as (values, vectors).
#[pyfunction]
#[pyo3(signature = (potential, n, count=None))]
fn eigensolve(potential: &str, n: usize, count: Option<usize>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let problem = harness::solve_problem(&self::potential(potential)?, n, count.unwrap_or(n)).map_err(to_py)?;
    Ok(problem
        .basis
        .pairs
        .into_iter()
        .map(|p| (p.value, p.vector))
        .unzip())
}

#[pyfunction]
fn replicate(vector: Vec<Complex64>, s: u32) -> PyResult<Vec<Complex64>> {
    let state = StateVector::new(vector).map_err(to_py)?;
    Ok(eigenprep::replicate(&state, s).amplitudes().to_vec())
}

/// Replicates the coarse eigenvector `k` of size `n0` by `s` doublings and
/// expands it in the fine eigenbasis.
#[pyfunction]
fn overlap_analysis(potential: &str, k: usize, n0: usize, s: u32) -> PyResult<PyOverlapReport> {
    let spec = self::potential(potential)?;
    let n = n0 << s;
    let fine = harness::solve_problem(&spec, n, n).map_err(to_py)?;
    let (report, _) = harness::prepare_and_compare(&spec, k, n0, s, &fine).map_err(to_py)?;
    Ok(PyOverlapReport {
        k: report.k,
        coefficients: report.coefficients,
        success_probability: report.success_probability,
        failure: report.failure,
        error_norm: report.error_norm,
        degenerate_warning: report.degenerate_warning,
    })
}

#[pyfunction]
fn g_kernel(phi: f64, j: u64, b: u32) -> Complex64 {
    eigenprep::g_kernel(phi, j, b)
}

#[pyfunction]
fn wrap_distance(phi0: f64, phi1: f64) -> f64 {
    eigenprep::wrap_distance(phi0, phi1)
}

#[pyfunction]
fn choose_b(n: u32, epsilon: f64) -> PyResult<u32> {
    eigenprep::choose_b(n, epsilon).map_err(to_py)
}

#[pyfunction]
fn outcome_distribution(phases: Vec<f64>, amplitudes: Vec<Complex64>, b: u32) -> PyResult<Vec<f64>> {
    let inst = instance(phases, amplitudes)?;
    Ok(eigenprep::outcome_distribution(&inst, b).map_err(to_py)?.probabilities)
}

/// Outcome distribution from the simulated circuit instead of the closed form.
#[pyfunction]
fn statevector_distribution(phases: Vec<f64>, amplitudes: Vec<Complex64>, b: u32) -> PyResult<Vec<f64>> {
    let inst = instance(phases, amplitudes)?;
    Ok(eigenprep::statevector_qpe(&inst, b).map_err(to_py)?.marginal().probabilities)
}

#[pyfunction]
fn collapse(phases: Vec<f64>, amplitudes: Vec<Complex64>, b: u32, outcome: u64) -> PyResult<Vec<Complex64>> {
    let inst = instance(phases, amplitudes)?;
    Ok(eigenprep::collapse(&inst, b, outcome).map_err(to_py)?.coefficients)
}

#[pyfunction]
fn sample_outcomes(probabilities: Vec<f64>, shots: u64, seed: u64) -> PyResult<Vec<u64>> {
    let dist = OutcomeDistribution::new(probabilities).map_err(to_py)?;
    Ok(eigenprep::sample_outcomes(&dist, shots, seed))
}

/// Runs the pipeline and returns the report as a JSON string.
#[pyfunction]
fn run_pipeline(py: Python<'_>, config: PyRef<'_, PyExperimentConfig>) -> PyResult<String> {
    let config = config.inner.clone();
    let report = py.detach(|| harness::run_pipeline(&config)).map_err(to_py)?;
    let mut buf = Vec::new();
    report.write_json(&mut buf).map_err(to_py)?;
    Ok(String::from_utf8(buf).expect("json is utf-8"))
}

/// Runs the sweep and fit and returns the result as a JSON string.
#[pyfunction]
fn sweep_and_fit(py: Python<'_>, config: PyRef<'_, PyExperimentConfig>) -> PyResult<String> {
    let config = config.inner.clone();
    let result = py.detach(|| harness::sweep_and_fit(&config)).map_err(to_py)?;
    let mut buf = Vec::new();
    result.write_json(&mut buf).map_err(to_py)?;
    Ok(String::from_utf8(buf).expect("json is utf-8"))
}

/// Invariant suites as (name, passed, detail) triples.
#[pyfunction]
#[pyo3(signature = (seed=0))]
fn check(py: Python<'_>, seed: u64) -> Vec<(String, bool, String)> {
    py.detach(|| harness::checks::run_all(seed))
        .into_iter()
        .map(|o| (o.name.to_string(), o.passed, o.detail))
        .collect()
}

#[pymodule]
fn eigenprep_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyExperimentConfig>()?;
    m.add_class::<PyOverlapReport>()?;
    m.add("InvariantError", m.py().get_type::<InvariantError>())?;
    m.add_function(wrap_pyfunction!(eigensolve, m)?)?;
    m.add_function(wrap_pyfunction!(replicate, m)?)?;
    m.add_function(wrap_pyfunction!(overlap_analysis, m)?)?;
    m.add_function(wrap_pyfunction!(g_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(wrap_distance, m)?)?;
    m.add_function(wrap_pyfunction!(choose_b, m)?)?;
    m.add_function(wrap_pyfunction!(outcome_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(statevector_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(collapse, m)?)?;
    m.add_function(wrap_pyfunction!(sample_outcomes, m)?)?;
    m.add_function(wrap_pyfunction!(run_pipeline, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_and_fit, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
