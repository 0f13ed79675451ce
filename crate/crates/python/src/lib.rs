//! Python bindings: states, persistency analyses and the reference values.
//! Reports cross the boundary as plain dicts decoded from their JSON form.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use persistency::linalg::CMatrix;
use persistency::persistency::{self as core, Budget, Sections, Topology};
use persistency::separability::entanglement_status;
use persistency::states::{State, StateFile, StateSpec};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn budget(restarts: usize, tol: f64) -> Budget {
    Budget { restarts, strength_tol: tol, ..Budget::default() }
}

#[pyclass(name = "State", module = "persistency", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyState {
    inner: State,
}

#[pymethods]
impl PyState {
    /// Builds a state from a spec such as `"w:4"` or `"grid:2x3:periodic"`.
    #[staticmethod]
    fn from_spec(spec: &str) -> PyResult<Self> {
        let inner = StateSpec::parse(spec).and_then(|s| s.build()).map_err(err)?;
        Ok(PyState { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let file: StateFile = serde_json::from_str(text).map_err(err)?;
        Ok(PyState { inner: file.into_state().map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&StateFile::from_state(&self.inner)).map_err(err)
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.dims().to_vec()
    }

    #[getter]
    fn num_sites(&self) -> usize {
        self.inner.num_sites()
    }

    #[getter]
    fn is_pure(&self) -> bool {
        matches!(self.inner, State::Pure(_))
    }

    /// State vector, or `None` for a mixed state.
    fn amplitudes(&self) -> Option<Vec<Complex64>> {
        self.inner.as_pure().map(|p| p.amplitudes().iter().copied().collect())
    }

    fn density_matrix(&self) -> PyResult<Vec<Vec<Complex64>>> {
        let rho = self.inner.density().map_err(err)?;
        let m = rho.matrix();
        Ok((0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect())
    }

    /// Reduced state on the kept sites.
    fn reduced(&self, keep: Vec<usize>) -> PyResult<Self> {
        Ok(PyState { inner: State::Mixed(self.inner.reduced(&keep).map_err(err)?) })
    }

    /// `w |psi><psi| + (1 - w) 1 / D`.
    fn with_white_noise(&self, w: f64) -> PyResult<Self> {
        let rho = self.inner.density().and_then(|r| r.mix_with_white_noise(w)).map_err(err)?;
        Ok(PyState { inner: State::Mixed(rho) })
    }

    /// Entangled / separable / unknown verdict with its evidence.
    fn entanglement_status<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let rho = self.inner.density().map_err(err)?;
        let status = py.detach(|| entanglement_status(&rho));
        to_py(py, &status)
    }

    fn __repr__(&self) -> String {
        let kind = if self.is_pure() { "pure" } else { "mixed" };
        format!("State({kind}, dims={:?})", self.inner.dims())
    }
}

#[pyfunction]
fn build_state(spec: &str) -> PyResult<PyState> {
    PyState::from_spec(spec)
}

#[pyfunction]
#[pyo3(signature = (spec, seed, *, restarts = 32, tol = 1e-3, entanglement = true, hidden = true, strength = true, k_remove = None))]
#[allow(clippy::too_many_arguments)]
fn analyze<'py>(
    py: Python<'py>,
    spec: &str,
    seed: u64,
    restarts: usize,
    tol: f64,
    entanglement: bool,
    hidden: bool,
    strength: bool,
    k_remove: Option<usize>,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = StateSpec::parse(spec).map_err(err)?;
    let sections = Sections { entanglement, hidden, strength, k_remove };
    let b = budget(restarts, tol);
    let mut report = py.detach(|| core::analyze(&spec, &b, seed, &sections)).map_err(err)?;
    report.elapsed_ms = None;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (state, seed, *, restarts = 32))]
fn persistency_entanglement(py: Python<'_>, state: &PyState, seed: u64, restarts: usize) -> PyResult<(usize, usize)> {
    let b = budget(restarts, 1e-3);
    let r = py.detach(|| core::persistency_entanglement(&state.inner, &b, seed)).map_err(err)?;
    Ok((r.lo, r.hi))
}

#[pyfunction]
#[pyo3(signature = (state, seed, *, restarts = 32))]
fn persistency_nonlocality(py: Python<'_>, state: &PyState, seed: u64, restarts: usize) -> PyResult<usize> {
    let b = budget(restarts, 1e-3);
    let r = py.detach(|| core::persistency_nonlocality(&state.inner, &b, seed)).map_err(err)?;
    Ok(r.lb)
}

/// Visibility below which some reduced state on `N - k_remove` sites stops
/// being certified nonlocal.
#[pyfunction]
#[pyo3(signature = (state, k_remove, seed, *, restarts = 32, tol = 1e-3))]
fn strength(
    py: Python<'_>,
    state: &PyState,
    k_remove: usize,
    seed: u64,
    restarts: usize,
    tol: f64,
) -> PyResult<Option<f64>> {
    let b = budget(restarts, tol);
    let r = py.detach(|| core::strength(&state.inner, k_remove, &b, seed)).map_err(err)?;
    Ok(r.w)
}

/// `(P_NL lower bound, P_E upper bound)` of the ring or linear cluster.
#[pyfunction]
fn cluster_bounds(n: usize, topology: &str) -> PyResult<(usize, usize)> {
    let t = match topology.to_ascii_lowercase().as_str() {
        "ring" => Topology::Ring,
        "linear" => Topology::Linear,
        other => return Err(err(format!("unknown topology {other:?}; expected ring or linear"))),
    };
    core::cluster_bounds(n, t).map_err(err)
}

#[pyfunction]
fn asymmetry_bound(s: f64, l: f64, operator: Vec<Vec<Complex64>>) -> PyResult<f64> {
    let n = operator.len();
    if n == 0 || operator.iter().any(|r| r.len() != n) {
        return Err(err("operator must be a non-empty square matrix"));
    }
    let m = CMatrix::from_fn(n, n, |i, j| operator[i][j]);
    core::asymmetry_bound(s, l, &m).map_err(err)
}

#[pyfunction]
fn trace_distance(a: &PyState, b: &PyState) -> PyResult<f64> {
    let (ra, rb) = (a.inner.density().map_err(err)?, b.inner.density().map_err(err)?);
    persistency::trace_distance(&ra, &rb).map_err(err)
}

#[pyfunction]
fn headline<'py>(py: Python<'py>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let r = py.detach(|| persistency::headline::headline(seed)).map_err(err)?;
    to_py(py, &r)
}

/// Published table rows, for comparison only.
#[pyfunction]
fn reference_table<'py>(py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &persistency::reference::TABLE)
}

#[pymodule]
#[pyo3(name = "persistency")]
fn persistency_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(build_state, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(persistency_entanglement, m)?)?;
    m.add_function(wrap_pyfunction!(persistency_nonlocality, m)?)?;
    m.add_function(wrap_pyfunction!(strength, m)?)?;
    m.add_function(wrap_pyfunction!(cluster_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(asymmetry_bound, m)?)?;
    m.add_function(wrap_pyfunction!(trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(headline, m)?)?;
    m.add_function(wrap_pyfunction!(reference_table, m)?)?;
    Ok(())
}
