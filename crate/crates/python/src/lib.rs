//! Python bindings: network evaluation, the numerical kernels and the experiment runner.

use evokan::config::ExperimentConfig;
use evokan::numerics::{self, DenseMatrix};
use evokan::{experiment, Error};
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use std::path::PathBuf;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) | Error::InvalidArgument(_) | Error::UnsupportedDimension(_) => PyValueError::new_err(e.to_string()),
        Error::Io(_) | Error::Csv(_) | Error::Checkpoint { .. } => PyIOError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<DenseMatrix> {
    DenseMatrix::from_rows(&rows).map_err(to_py)
}

fn rows_of(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|r| m.row(r).to_vec()).collect()
}

#[pyclass(name = "KanNetwork")]
struct PyKanNetwork {
    inner: evokan::KanNetwork,
}

#[pymethods]
impl PyKanNetwork {
    /// Random network with layer widths `widths` and `grid` RBF centers per edge.
    #[new]
    #[pyo3(signature = (widths, grid, seed = 0))]
    fn new(widths: Vec<usize>, grid: usize, seed: u64) -> PyResult<Self> {
        let layers = evokan::KanNetwork::layers_from_widths(&widths, grid);
        Ok(Self { inner: evokan::KanNetwork::random(layers, seed).map_err(to_py)? })
    }

    #[getter]
    fn param_count(&self) -> usize {
        self.inner.param_count()
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }

    fn params(&self) -> Vec<f64> {
        self.inner.params().to_vec()
    }

    fn set_params(&mut self, params: Vec<f64>) -> PyResult<()> {
        self.inner.set_params(&params).map_err(to_py)
    }

    fn forward(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.forward(&x).map_err(to_py)
    }

    /// `(value, d/dx_axis, d²/dx_axis²)` per output.
    fn derivatives(&self, x: Vec<f64>, axis: usize) -> PyResult<Vec<(f64, f64, f64)>> {
        let d = self.inner.forward_with_spatial(&x, axis).map_err(to_py)?;
        Ok(d.iter().map(|v| (v.value, v.d1, v.d2)).collect())
    }

    /// Rows: outputs at each point (point-major, then output).
    fn param_jacobian(&self, points: Vec<Vec<f64>>) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows_of(&self.inner.param_jacobian(&points, false).map_err(to_py)?))
    }

    fn __repr__(&self) -> String {
        let widths: Vec<usize> = std::iter::once(self.inner.input_dim()).chain(self.inner.layers().iter().map(|l| l.out_width)).collect();
        format!("KanNetwork(widths={widths:?}, params={})", self.inner.param_count())
    }
}

/// Gauss-Legendre nodes and weights on `[lo, hi]`.
#[pyfunction]
#[pyo3(signature = (n, lo = -1.0, hi = 1.0))]
fn gauss_legendre(n: usize, lo: f64, hi: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let r = numerics::gauss_legendre_1d(n, lo, hi).map_err(to_py)?;
    Ok((r.nodes, r.weights))
}

/// `argmin ‖Aγ + b‖² + reg‖γ‖²` (minimum norm for wide systems).
#[pyfunction]
#[pyo3(signature = (a, b, regularization = 0.0))]
fn solve_least_squares(a: Vec<Vec<f64>>, b: Vec<f64>, regularization: f64) -> PyResult<Vec<f64>> {
    Ok(numerics::solve_least_squares(&matrix(a)?, &b, regularization).map_err(to_py)?.gamma)
}

#[pyfunction]
fn condition_number(a: Vec<Vec<f64>>) -> PyResult<f64> {
    numerics::condition_number(&matrix(a)?).map_err(to_py)
}

/// Fit, evolve and evaluate the config at `path`; writes CSVs when `out` is given.
#[pyfunction]
#[pyo3(signature = (path, out = None, seed = None))]
fn run<'py>(py: Python<'py>, path: PathBuf, out: Option<PathBuf>, seed: Option<u64>) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = ExperimentConfig::load(&path).map_err(to_py)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(to_py)?;
    let r = py.detach(|| experiment::run(&cfg)).map_err(to_py)?;
    if let Some(dir) = out {
        experiment::write_run(&r, &dir).map_err(to_py)?;
    }
    let d = PyDict::new(py);
    d.set_item("problem", r.problem.name())?;
    d.set_item("method", r.method.name())?;
    d.set_item("points", r.points)?;
    d.set_item("param_count", r.param_count)?;
    d.set_item("completed", r.run.completed())?;
    d.set_item("steps", r.run.reports.len())?;
    d.set_item("fit_mse", r.fit.mse)?;
    d.set_item("l2_error", r.final_error())?;
    d.set_item("cond_max", r.run.max_condition())?;
    d.set_item("times", r.evaluations.iter().map(|e| e.time).collect::<Vec<_>>())?;
    d.set_item("errors", r.evaluations.iter().map(|e| e.l2_error).collect::<Vec<_>>())?;
    Ok(d)
}

#[pymodule]
fn pyevokan(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyKanNetwork>()?;
    m.add_function(wrap_pyfunction!(gauss_legendre, m)?)?;
    m.add_function(wrap_pyfunction!(solve_least_squares, m)?)?;
    m.add_function(wrap_pyfunction!(condition_number, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
