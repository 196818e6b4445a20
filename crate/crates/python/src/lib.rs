//! Python bindings for `awlab_core`.
//!
//! Complex vectors cross the boundary as lists of Python `complex`; reports
//! come back as plain dicts.

use awlab_core::araki_woods::{self, build_model, catalan as catalan_number};
use awlab_core::multipliers::{self, PhiSpec};
use awlab_core::quantization::net_element;
use awlab_core::{Error, C64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::SearchCap(_) | Error::NonConvergence { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Round-trips a serializable report through JSON into a Python dict.
fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A finite free Araki-Woods model: eigenvalue pairs `(λ, 1/λ)` with
/// multiplicities plus trivial directions, truncated at `max_degree`.
#[pyclass(name = "RepModel", frozen)]
struct PyRepModel {
    inner: araki_woods::RepModel,
}

#[pymethods]
impl PyRepModel {
    #[new]
    #[pyo3(signature = (pairs, trivial_dim=0, max_degree=4))]
    fn new(pairs: Vec<(f64, usize)>, trivial_dim: usize, max_degree: usize) -> PyResult<Self> {
        let spec = araki_woods::RepSpec::pairs(&pairs, trivial_dim, max_degree);
        Ok(PyRepModel { inner: build_model(&spec).map_err(to_py)? })
    }

    /// Builds a model from its JSON description.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec = araki_woods::RepSpec::from_json(text).map_err(to_py)?;
        Ok(PyRepModel { inner: build_model(&spec).map_err(to_py)? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn max_degree(&self) -> usize {
        self.inner.max_degree()
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues().to_vec()
    }

    /// Orthonormal basis of `K_R` (as complex vectors).
    fn kr_basis(&self) -> Vec<Vec<C64>> {
        self.inner.kr_basis().to_vec()
    }

    fn involution(&self, xi: Vec<C64>) -> PyResult<Vec<C64>> {
        self.check(&xi)?;
        Ok(araki_woods::involution_apply(&self.inner, &xi))
    }

    /// `χ(W(ξ)W(η))` evaluated on the Fock space.
    fn two_point(&self, xi: Vec<C64>, eta: Vec<C64>) -> PyResult<C64> {
        araki_woods::two_point(&self.inner, &xi, &eta).map_err(to_py)
    }

    /// `χ(W(ξ)^p)`.
    fn field_moment(&self, xi: Vec<C64>, power: usize) -> PyResult<C64> {
        araki_woods::field_moment(&self.inner, &xi, power).map_err(to_py)
    }

    /// `χ(W(ξ)^{2k})` for a unit vector of `K_R`.
    fn semicircular_moment(&self, xi: Vec<C64>, k: usize) -> PyResult<f64> {
        araki_woods::semicircular_moment(&self.inner, &xi, k).map_err(to_py)
    }

    /// Element `n` of the approximation net, with its certificates.
    fn net_element<'py>(&self, py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &net_element(&self.inner, n).map_err(to_py)?)
    }

    fn __repr__(&self) -> String {
        format!("RepModel(dim={}, max_degree={})", self.inner.dim(), self.inner.max_degree())
    }
}

impl PyRepModel {
    fn check(&self, xi: &[C64]) -> PyResult<()> {
        if xi.len() != self.inner.dim() {
            return Err(PyValueError::new_err(format!("expected {} entries, got {}", self.inner.dim(), xi.len())));
        }
        Ok(())
    }
}

/// A radial function `φ(n) = c1 + c2(-1)^n + ψ(n)` with finitely supported `ψ`.
#[pyclass(name = "RadialSymbol", frozen)]
struct PyRadialSymbol {
    inner: multipliers::RadialSymbol,
}

#[pymethods]
impl PyRadialSymbol {
    #[new]
    #[pyo3(signature = (psi, c1=C64::new(0.0, 0.0), c2=C64::new(0.0, 0.0)))]
    fn new(psi: Vec<C64>, c1: C64, c2: C64) -> Self {
        PyRadialSymbol { inner: multipliers::RadialSymbol::new(c1, c2, psi) }
    }

    /// Parses the JSON form, e.g. `{"kind": "geometric", "t": 0.5}`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let spec = PhiSpec::from_json(text).map_err(to_py)?;
        Ok(PyRadialSymbol { inner: spec.to_symbol().map_err(to_py)? })
    }

    #[staticmethod]
    fn geometric(t: f64) -> PyResult<Self> {
        Ok(PyRadialSymbol { inner: multipliers::RadialSymbol::geometric(t).map_err(to_py)? })
    }

    #[staticmethod]
    fn cutoff_projection(d: usize) -> Self {
        PyRadialSymbol { inner: multipliers::RadialSymbol::cutoff_projection(d) }
    }

    #[staticmethod]
    fn delta(k: usize) -> Self {
        PyRadialSymbol { inner: multipliers::RadialSymbol::delta(k) }
    }

    fn __call__(&self, n: usize) -> C64 {
        self.inner.eval(n)
    }

    /// `‖m_φ‖_cb = |c1| + |c2| + ‖B‖₁`.
    fn cb_norm(&self) -> f64 {
        multipliers::radial_norm(&self.inner).value
    }

    /// Best Toeplitz-algebra witness `|γ(x)|/‖x‖` found, a lower bound for `cb_norm`.
    #[pyo3(signature = (n, trials=100, seed=0))]
    fn toeplitz_lower_bound(&self, n: usize, trials: usize, seed: u64) -> PyResult<f64> {
        Ok(multipliers::toeplitz_lower_bound(&self.inner, n, trials, seed).map_err(to_py)?.best)
    }

    fn __repr__(&self) -> String {
        format!("RadialSymbol(c1={}, c2={}, psi_len={})", self.inner.c1, self.inner.c2, self.inner.psi().len())
    }
}

/// cb norm of the radial multiplier given as JSON.
#[pyfunction]
fn cbnorm(phi_json: &str) -> PyResult<f64> {
    Ok(PyRadialSymbol::from_json(phi_json)?.cb_norm())
}

/// `(‖P_d‖_cb, (4/π)d, ratio or None)`.
#[pyfunction]
fn projection_norm(d: usize) -> (f64, f64, Option<f64>) {
    let r = multipliers::projection_pd_norm(d);
    (r.norm.value, r.asymptote, r.ratio)
}

#[pyfunction]
fn circulant_deviation(d: usize) -> f64 {
    multipliers::circulant_deviation(d)
}

#[pyfunction]
fn haagerup_net<'py>(py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &multipliers::haagerup_net(n).map_err(to_py)?)
}

/// Runs a verification suite and returns its report.
#[pyfunction]
#[pyo3(signature = (suite, seed=0, tol=None))]
fn verify<'py>(py: Python<'py>, suite: &str, seed: u64, tol: Option<f64>) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &awlab_core::suites::run_suite(suite, seed, tol).map_err(to_py)?)
}

#[pyfunction]
fn catalan(k: usize) -> u64 {
    catalan_number(k)
}

#[pymodule]
fn awlab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRepModel>()?;
    m.add_class::<PyRadialSymbol>()?;
    m.add_function(wrap_pyfunction!(cbnorm, m)?)?;
    m.add_function(wrap_pyfunction!(projection_norm, m)?)?;
    m.add_function(wrap_pyfunction!(circulant_deviation, m)?)?;
    m.add_function(wrap_pyfunction!(haagerup_net, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(catalan, m)?)?;
    m.add("SUITES", awlab_core::suites::SUITES.to_vec())?;
    Ok(())
}
