//! Python bindings. Matrices cross the boundary as lists of rows (any
//! sequence of sequences, including 2-D numpy arrays) and come back as
//! nested lists.

use std::fs::File;
use std::io::BufReader;

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ridgepath::path::{ihs_basis, BinomialBasis, IntervalReport};
use ridgepath::spectrum::{effective_dimension, rho_gaussian, rho_sjlt, rho_srht};
use ridgepath::{
    AdaptiveConfig, DenseMatrix, Error, IhsBinOptions, IntervalCount, Matrix, PathConfig, Preconditioner,
    RegPathResult, RhoBounds, SketchKind, SketchSpec,
};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(io) => PyIOError::new_err(io.to_string()),
        e @ (Error::InvalidArgument(_)
        | Error::DimensionMismatch { .. }
        | Error::Parse { .. }
        | Error::SizeGuard { .. }
        | Error::NonFinite(_)) => PyValueError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

fn dense(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    DenseMatrix::from_rows(&rows).map(Matrix::Dense).map_err(to_py)
}

fn rows_of(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn sketch_kind(name: &str, s: usize) -> PyResult<SketchKind> {
    Ok(match name {
        "gaussian" => SketchKind::Gaussian,
        "countsketch" => SketchKind::CountSketch,
        "sjlt" => SketchKind::Sjlt { s },
        "srht" => SketchKind::Srht,
        "identity" => SketchKind::Identity,
        other => return Err(PyValueError::new_err(format!("unknown sketch '{other}'"))),
    })
}

fn sketch_spec(name: &str, m: Option<usize>, n: usize, s: usize, seed: u64) -> PyResult<SketchSpec> {
    match sketch_kind(name, s)? {
        SketchKind::Identity => Ok(SketchSpec::identity(n)),
        kind => {
            let m = m.ok_or_else(|| PyValueError::new_err("sketch_dim is required for a random sketch"))?;
            SketchSpec::new(kind, m, n, seed).map_err(to_py)
        }
    }
}

fn config(lambdas: Vec<f64>, eps: f64, intervals: Option<usize>) -> PyResult<PathConfig> {
    let cfg = PathConfig::from_lambdas(lambdas, eps).map_err(to_py)?;
    Ok(match intervals {
        Some(l) => cfg.with_intervals(IntervalCount::Fixed(l)),
        None => cfg,
    })
}

/// Solutions and losses along a grid, as returned by every path solver.
#[pyclass(name = "PathResult", module = "pyridgepath")]
pub struct PyPathResult {
    inner: RegPathResult,
}

#[pymethods]
impl PyPathResult {
    #[getter]
    fn solver(&self) -> &'static str {
        self.inner.solver.name()
    }

    #[getter]
    fn lambdas(&self) -> Vec<f64> {
        self.inner.lambdas()
    }

    #[getter]
    fn solutions(&self) -> Vec<Vec<f64>> {
        self.inner.points.iter().map(|p| p.x.clone()).collect()
    }

    #[getter]
    fn train_losses(&self) -> Vec<f64> {
        self.inner.points.iter().map(|p| p.train_loss).collect()
    }

    #[getter]
    fn test_losses(&self) -> Vec<Option<f64>> {
        self.inner.points.iter().map(|p| p.test_loss).collect()
    }

    #[getter]
    fn setup_seconds(&self) -> f64 {
        self.inner.setup_seconds
    }

    #[getter]
    fn total_seconds(&self) -> f64 {
        self.inner.total_seconds()
    }

    /// `(rho1, rho2)` used to tune the intervals, if the solver uses them.
    #[getter]
    fn rho(&self) -> Option<(f64, f64)> {
        self.inner.rho.map(|r| (r.rho1, r.rho2))
    }

    #[getter]
    fn intervals<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.inner.intervals.iter().map(|r| interval_dict(py, r)).collect()
    }

    fn attach_test_losses(&mut self, a_test: Vec<Vec<f64>>, b_test: Vec<f64>) -> PyResult<()> {
        self.inner.attach_test_losses(&dense(a_test)?, &b_test).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.points.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "PathResult(solver='{}', points={}, total_seconds={:.3e})",
            self.inner.solver.name(),
            self.inner.points.len(),
            self.inner.total_seconds()
        )
    }
}

fn interval_dict<'py>(py: Python<'py>, r: &IntervalReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("lambda_lo", r.lambda_lo)?;
    d.set_item("lambda_hi", r.lambda_hi)?;
    d.set_item("lambda0", r.lambda0)?;
    d.set_item("tau", r.tau)?;
    d.set_item("k", r.k)?;
    d.set_item("contraction", r.contraction)?;
    d.set_item("retried", r.retried)?;
    d.set_item("fallback", r.fallback)?;
    Ok(d)
}

/// Train and test split with the generating coefficients.
#[pyclass(name = "Dataset", module = "pyridgepath")]
pub struct PyDataset {
    inner: ridgepath::Dataset,
}

#[pymethods]
impl PyDataset {
    #[getter]
    fn a_train(&self) -> Vec<Vec<f64>> {
        rows_of(&self.inner.a_train.to_dense())
    }

    #[getter]
    fn b_train(&self) -> Vec<f64> {
        self.inner.b_train.clone()
    }

    #[getter]
    fn a_test(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.a_test.as_ref().map(|m| rows_of(&m.to_dense()))
    }

    #[getter]
    fn b_test(&self) -> Option<Vec<f64>> {
        self.inner.b_test.clone()
    }

    #[getter]
    fn truth(&self) -> Option<Vec<f64>> {
        self.inner.truth.clone()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.inner.a_train.rows(), self.inner.a_train.cols())
    }
}

/// A fixed binomial basis; `compose(lam)` costs `O(k·d)`.
#[pyclass(name = "Basis", module = "pyridgepath")]
pub struct PyBasis {
    inner: BinomialBasis,
}

#[pymethods]
impl PyBasis {
    #[getter]
    fn order(&self) -> usize {
        self.inner.order()
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau()
    }

    #[getter]
    fn vectors(&self) -> Vec<Vec<f64>> {
        self.inner.vectors().to_vec()
    }

    fn compose(&self, lam: f64) -> Vec<f64> {
        self.inner.compose(lam)
    }
}

#[pyfunction]
#[pyo3(signature = (n, d, alpha=0.99, sigma=0.02, seed=0))]
fn gen_synthetic(n: usize, d: usize, alpha: f64, sigma: f64, seed: u64) -> PyResult<PyDataset> {
    let inner = ridgepath::gen_synthetic(n, d, alpha, sigma, seed).map_err(to_py)?;
    Ok(PyDataset { inner })
}

/// Reads a LIBSVM file into a dense training set.
#[pyfunction]
#[pyo3(signature = (path, cols=None))]
fn load_libsvm(path: &str, cols: Option<usize>) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let file = File::open(path).map_err(|e| PyIOError::new_err(format!("{path}: {e}")))?;
    let (m, y) = ridgepath::parse_libsvm(BufReader::new(file), cols).map_err(to_py)?;
    Ok((rows_of(&m.to_dense()), y))
}

#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(signature = (a, b, lambdas, sketch="sjlt", sketch_dim=None, sjlt_s=1, seed=0, eps=1e-6, rho=None, sigma_d=None, intervals=None, dual=false))]
fn ihs_bin_path(
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    lambdas: Vec<f64>,
    sketch: &str,
    sketch_dim: Option<usize>,
    sjlt_s: usize,
    seed: u64,
    eps: f64,
    rho: Option<(f64, f64)>,
    sigma_d: Option<f64>,
    intervals: Option<usize>,
    dual: bool,
) -> PyResult<PyPathResult> {
    let a = dense(a)?;
    let cfg = config(lambdas, eps, intervals)?;
    let n = if dual { a.cols() } else { a.rows() };
    let mut opts = IhsBinOptions::new(sketch_spec(sketch, sketch_dim, n, sjlt_s, seed)?);
    if let Some((r1, r2)) = rho {
        opts = opts.with_rho(RhoBounds::manual(r1, r2).map_err(to_py)?);
    }
    if let Some(s) = sigma_d {
        opts = opts.with_sigma_d(s);
    }
    let inner = if dual {
        ridgepath::dual_path(&a, &b, &cfg, &opts)
    } else {
        ridgepath::ihs_bin_path(&a, &b, &cfg, &opts)
    }
    .map_err(to_py)?;
    Ok(PyPathResult { inner })
}

#[pyfunction]
#[pyo3(signature = (a, b, lambdas, eps=1e-6, intervals=None))]
fn gd_bin_path(a: Vec<Vec<f64>>, b: Vec<f64>, lambdas: Vec<f64>, eps: f64, intervals: Option<usize>) -> PyResult<PyPathResult> {
    let inner = ridgepath::gd_bin_path(&dense(a)?, &b, &config(lambdas, eps, intervals)?).map_err(to_py)?;
    Ok(PyPathResult { inner })
}

/// Reference solvers: `method` is one of `svd`, `direct`, `cg`.
#[pyfunction]
#[pyo3(signature = (a, b, lambdas, method="svd", eps=1e-10))]
fn baseline_path(a: Vec<Vec<f64>>, b: Vec<f64>, lambdas: Vec<f64>, method: &str, eps: f64) -> PyResult<PyPathResult> {
    let a = dense(a)?;
    let cfg = config(lambdas, eps, None)?;
    let inner = match method {
        "svd" => ridgepath::svd_path(&a, &b, &cfg),
        "direct" => ridgepath::direct_path(&a, &b, &cfg),
        "cg" => ridgepath::warm_cg_path(&a, &b, &cfg),
        other => return Err(PyValueError::new_err(format!("unknown method '{other}'"))),
    }
    .map_err(to_py)?;
    Ok(PyPathResult { inner })
}

#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(signature = (a, b, lambdas, sketch="sjlt", sketch_dim=None, sjlt_s=1, seed=0, eps=1e-8))]
fn warm_ihs_path(
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    lambdas: Vec<f64>,
    sketch: &str,
    sketch_dim: Option<usize>,
    sjlt_s: usize,
    seed: u64,
    eps: f64,
) -> PyResult<PyPathResult> {
    let a = dense(a)?;
    let opts = IhsBinOptions::new(sketch_spec(sketch, sketch_dim, a.rows(), sjlt_s, seed)?);
    let inner = ridgepath::warm_ihs_path(&a, &b, &config(lambdas, eps, None)?, &opts).map_err(to_py)?;
    Ok(PyPathResult { inner })
}

/// Builds one sketched binomial basis of order `k` with step `tau`.
#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(signature = (a, b, lambda0, tau, k, sketch="identity", sketch_dim=None, sjlt_s=1, seed=0))]
fn build_basis(
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    lambda0: f64,
    tau: f64,
    k: usize,
    sketch: &str,
    sketch_dim: Option<usize>,
    sjlt_s: usize,
    seed: u64,
) -> PyResult<PyBasis> {
    let a = dense(a)?;
    let spec = sketch_spec(sketch, sketch_dim, a.rows(), sjlt_s, seed)?;
    let sa = ridgepath::sketch_apply(&spec, &a).map_err(to_py)?;
    let p = Preconditioner::build(&sa, lambda0).map_err(to_py)?;
    let inner = ihs_basis(&a, &b, &p, tau, k).map_err(to_py)?;
    Ok(PyBasis { inner })
}

/// Step size, centre, contraction and iteration budget for one interval.
#[pyfunction]
#[pyo3(signature = (lambda_lo, lambda_hi, rho1=1.0, rho2=1.0, sigma_d=None, eps=1e-6))]
fn tune_interval<'py>(
    py: Python<'py>,
    lambda_lo: f64,
    lambda_hi: f64,
    rho1: f64,
    rho2: f64,
    sigma_d: Option<f64>,
    eps: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let rho = RhoBounds::manual(rho1, rho2).map_err(to_py)?;
    let p = ridgepath::tune_interval(lambda_lo, lambda_hi, &rho, sigma_d, eps).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("lambda0", p.lambda0)?;
    d.set_item("alpha", p.alpha)?;
    d.set_item("kappa", p.kappa)?;
    d.set_item("contraction", p.contraction)?;
    d.set_item("k", p.k)?;
    d.set_item("k_unclamped", p.k_unclamped)?;
    Ok(d)
}

/// Geometric split; `count=None` picks `floor(2 ln(hi/lo))`.
#[pyfunction]
#[pyo3(signature = (lambda_min, lambda_max, count=None))]
fn interval_split(lambda_min: f64, lambda_max: f64, count: Option<usize>) -> PyResult<Vec<(f64, f64)>> {
    let count = count.map_or(IntervalCount::Auto, IntervalCount::Fixed);
    ridgepath::interval_split(lambda_min, lambda_max, count).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (rho, eta, dnorm_sq=1.0))]
fn gaussian_rho(rho: f64, eta: f64, dnorm_sq: f64) -> PyResult<(f64, f64)> {
    let g = rho_gaussian(rho, eta, dnorm_sq, None).map_err(to_py)?;
    Ok((g.bounds.rho1, g.bounds.rho2))
}

#[pyfunction]
#[pyo3(signature = (rho, dnorm_sq=1.0))]
fn srht_rho(rho: f64, dnorm_sq: f64) -> PyResult<(f64, f64)> {
    let r = rho_srht(rho, dnorm_sq).map_err(to_py)?;
    Ok((r.rho1, r.rho2))
}

#[pyfunction]
fn sjlt_rho(eps: f64) -> PyResult<(f64, f64)> {
    let r = rho_sjlt(eps).map_err(to_py)?;
    Ok((r.rho1, r.rho2))
}

#[pyfunction]
#[pyo3(name = "effective_dimension")]
fn effective_dim(sigma: Vec<f64>, lambda0: f64) -> PyResult<f64> {
    effective_dimension(&sigma, lambda0).map_err(to_py)
}

/// Returns `(m, x, iterations, doublings)`.
#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(signature = (a, b, lambda_min, sketch="gaussian", sjlt_s=1, seed=0, m_initial=None, m_cap=None))]
fn adaptive_sketch_dim(
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    lambda_min: f64,
    sketch: &str,
    sjlt_s: usize,
    seed: u64,
    m_initial: Option<usize>,
    m_cap: Option<usize>,
) -> PyResult<(usize, Vec<f64>, usize, usize)> {
    let a = dense(a)?;
    let mut cfg = AdaptiveConfig::for_dim(a.cols());
    if let Some(m) = m_initial {
        cfg.m_initial = m;
    }
    if let Some(m) = m_cap {
        cfg.m_cap = m;
    }
    let template = sketch_spec(sketch, Some(cfg.m_initial.max(sjlt_s)), a.rows(), sjlt_s, seed)?;
    let r = ridgepath::adaptive_sketch_dim(&a, &b, lambda_min, &cfg, &template).map_err(to_py)?;
    Ok((r.m, r.x, r.iterations, r.doublings))
}

#[pymodule]
pub fn pyridgepath(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPathResult>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyBasis>()?;
    m.add_function(wrap_pyfunction!(gen_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(load_libsvm, m)?)?;
    m.add_function(wrap_pyfunction!(ihs_bin_path, m)?)?;
    m.add_function(wrap_pyfunction!(gd_bin_path, m)?)?;
    m.add_function(wrap_pyfunction!(baseline_path, m)?)?;
    m.add_function(wrap_pyfunction!(warm_ihs_path, m)?)?;
    m.add_function(wrap_pyfunction!(build_basis, m)?)?;
    m.add_function(wrap_pyfunction!(tune_interval, m)?)?;
    m.add_function(wrap_pyfunction!(interval_split, m)?)?;
    m.add_function(wrap_pyfunction!(gaussian_rho, m)?)?;
    m.add_function(wrap_pyfunction!(srht_rho, m)?)?;
    m.add_function(wrap_pyfunction!(sjlt_rho, m)?)?;
    m.add_function(wrap_pyfunction!(effective_dim, m)?)?;
    m.add_function(wrap_pyfunction!(adaptive_sketch_dim, m)?)?;
    Ok(())
}
