//! Python bindings: datasets, exact moment vectors, p-values and CDF
//! reconstruction.

use std::collections::BTreeMap;

use permoment::cdf::reconstruct;
use permoment::{
    CdfEstimate, CdfMethod, Error, ExactOracle, Method, Mode, MomentVector, PvalueEstimate, Tail,
};
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

struct PyErrWrap(Error);

impl From<PyErrWrap> for PyErr {
    fn from(e: PyErrWrap) -> Self {
        match e.0 {
            Error::Io { .. } => PyOSError::new_err(e.0.to_string()),
            other => PyValueError::new_err(other.to_string()),
        }
    }
}

fn wrap<T>(r: permoment::Result<T>) -> PyResult<T> {
    r.map_err(|e| PyErrWrap(e).into())
}

fn parse_mode(mode: &str) -> PyResult<Mode> {
    match mode {
        "pearson" => Ok(Mode::Pearson),
        "spearman" => Ok(Mode::Spearman),
        _ => Err(PyValueError::new_err(format!(
            "mode must be 'pearson' or 'spearman', got {mode:?}"
        ))),
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Pearson => "pearson",
        Mode::Spearman => "spearman",
    }
}

fn method_name(m: Method) -> &'static str {
    match m {
        Method::ClosedForm => "closed-form",
        Method::Inductive => "inductive",
        Method::OracleExact => "oracle-exact",
        Method::OracleMc => "oracle-mc",
    }
}

/// Paired observations `(x_i, y_i)`.
#[pyclass(name = "Dataset", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDataset(permoment::Dataset);

#[pymethods]
impl PyDataset {
    #[new]
    fn new(x: Vec<f64>, y: Vec<f64>) -> PyResult<Self> {
        wrap(permoment::Dataset::new(x, y)).map(Self)
    }

    /// Read a two-column CSV; `header=None` detects a non-numeric first row.
    #[staticmethod]
    #[pyo3(signature = (path, header=None))]
    fn from_csv(path: &str, header: Option<bool>) -> PyResult<Self> {
        let header = match header {
            None => permoment::Header::Detect,
            Some(h) => h.into(),
        };
        wrap(permoment::load_csv(path, header)).map(Self)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.0.x().to_vec()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.0.y().to_vec()
    }

    /// Observed Pearson correlation.
    fn pearson(&self) -> PyResult<f64> {
        wrap(permoment::pearson_obs(&self.0))
    }

    /// Both coordinates replaced by midranks.
    fn ranked(&self) -> Self {
        Self(permoment::rank_transform(&self.0))
    }

    fn __len__(&self) -> usize {
        self.0.n()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(n={})", self.0.n())
    }
}

/// `values[k] = <rho^k>` over all permutations.
#[pyclass(name = "MomentVector", frozen)]
struct PyMomentVector(MomentVector);

#[pymethods]
impl PyMomentVector {
    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn mode(&self) -> &'static str {
        mode_name(self.0.mode)
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values.clone()
    }

    /// How each order was computed.
    #[getter]
    fn methods(&self) -> Vec<&'static str> {
        self.0.methods.iter().map(|&m| method_name(m)).collect()
    }

    fn __len__(&self) -> usize {
        self.0.values.len()
    }

    fn __getitem__(&self, k: usize) -> PyResult<f64> {
        self.0
            .values
            .get(k)
            .copied()
            .ok_or_else(|| pyo3::exceptions::PyIndexError::new_err(k))
    }

    fn __repr__(&self) -> String {
        format!(
            "MomentVector(n={}, mode={:?}, values={:?})",
            self.0.n,
            mode_name(self.0.mode),
            self.0.values
        )
    }
}

#[pyclass(name = "PvalueEstimate", frozen)]
struct PyPvalueEstimate(PvalueEstimate);

#[pymethods]
impl PyPvalueEstimate {
    #[getter]
    fn p(&self) -> f64 {
        self.0.p
    }

    #[getter]
    fn rho_obs(&self) -> f64 {
        self.0.rho_obs
    }

    #[getter]
    fn method(&self) -> String {
        self.0.method.to_string()
    }

    #[getter]
    fn tail(&self) -> String {
        self.0.tail.to_string()
    }

    /// Moment order used by the reconstruction methods.
    #[getter]
    fn k(&self) -> Option<usize> {
        self.0.order
    }

    #[getter]
    fn diagnostics(&self) -> BTreeMap<&'static str, f64> {
        self.0.diagnostics.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "PvalueEstimate(p={}, rho_obs={}, method={:?}, tail={:?})",
            self.0.p,
            self.0.rho_obs,
            self.0.method.to_string(),
            self.0.tail.to_string()
        )
    }
}

/// A CDF on `[-1, 1]` rebuilt from moments.
#[pyclass(name = "CdfEstimate", frozen)]
struct PyCdfEstimate(CdfEstimate);

#[pymethods]
impl PyCdfEstimate {
    fn cdf(&self, rho: f64) -> f64 {
        self.0.cdf(rho)
    }

    fn tail_probability(&self, observed: f64, tail: &str) -> PyResult<f64> {
        let tail: Tail = tail.parse().map_err(PyValueError::new_err)?;
        Ok(self.0.tail_probability(observed, tail))
    }

    #[getter]
    fn method(&self) -> String {
        self.0.method.to_string()
    }

    #[getter]
    fn order(&self) -> usize {
        self.0.order
    }

    /// Total-variation size of the positivity repair.
    #[getter]
    fn correction(&self) -> f64 {
        self.0.correction
    }
}

/// Exact `<rho^k>` for `k = 0..=k`.
#[pyfunction]
#[pyo3(signature = (data, k=permoment::DEFAULT_ORDER, mode="pearson"))]
fn moments(py: Python<'_>, data: &PyDataset, k: usize, mode: &str) -> PyResult<PyMomentVector> {
    let mode = parse_mode(mode)?;
    let d = data.0.clone();
    wrap(py.detach(move || permoment::moment_vector(&d, k, mode))).map(PyMomentVector)
}

/// Moments by enumerating every permutation (`n <= cap`).
#[pyfunction]
#[pyo3(signature = (data, k=permoment::DEFAULT_ORDER, cap=permoment::DEFAULT_ENUMERATION_CAP))]
fn oracle_moments(
    py: Python<'_>,
    data: &PyDataset,
    k: usize,
    cap: usize,
) -> PyResult<PyMomentVector> {
    let d = data.0.clone();
    wrap(py.detach(move || ExactOracle::with_cap(cap).moments(&d, k))).map(PyMomentVector)
}

/// p-value of the observed correlation. `method` is one of exact, mc,
/// hausdorff or legendre.
#[pyfunction]
#[pyo3(signature = (
    data, method="legendre", tail="two", k=permoment::DEFAULT_ORDER, mode="pearson",
    samples=100_000, seed=0, cap=permoment::DEFAULT_ENUMERATION_CAP
))]
#[allow(clippy::too_many_arguments)]
fn pvalue(
    py: Python<'_>,
    data: &PyDataset,
    method: &str,
    tail: &str,
    k: usize,
    mode: &str,
    samples: u64,
    seed: u64,
    cap: usize,
) -> PyResult<PyPvalueEstimate> {
    let mode = parse_mode(mode)?;
    let tail: Tail = tail.parse().map_err(PyValueError::new_err)?;
    let d = data.0.clone();
    let ranked = match mode {
        Mode::Pearson => d.clone(),
        Mode::Spearman => permoment::rank_transform(&d),
    };
    let result = match method {
        "exact" => py.detach(move || ExactOracle::with_cap(cap).pvalue(&ranked, tail)),
        "mc" => py.detach(move || permoment::oracle_pvalue_mc(&ranked, tail, samples, seed)),
        other => {
            let cdf: CdfMethod = other.parse().map_err(PyValueError::new_err)?;
            py.detach(move || permoment::moment_pvalue(&d, k, cdf, tail, mode))
        }
    };
    wrap(result).map(PyPvalueEstimate)
}

/// Rebuild the permutation CDF from moments up to `k`.
#[pyfunction]
#[pyo3(signature = (data, k=permoment::DEFAULT_ORDER, method="legendre", mode="pearson"))]
fn reconstruct_cdf(
    data: &PyDataset,
    k: usize,
    method: &str,
    mode: &str,
) -> PyResult<PyCdfEstimate> {
    let method: CdfMethod = method.parse().map_err(PyValueError::new_err)?;
    let mv = wrap(permoment::moment_vector(&data.0, k, parse_mode(mode)?))?;
    wrap(reconstruct(&mv, method, k)).map(PyCdfEstimate)
}

#[pymodule(name = "permoment")]
fn permoment_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyMomentVector>()?;
    m.add_class::<PyPvalueEstimate>()?;
    m.add_class::<PyCdfEstimate>()?;
    m.add_function(wrap_pyfunction!(moments, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_moments, m)?)?;
    m.add_function(wrap_pyfunction!(pvalue, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct_cdf, m)?)?;
    m.add("DEFAULT_ORDER", permoment::DEFAULT_ORDER)?;
    Ok(())
}
