//! Python bindings over the core library. Reports cross the boundary as
//! canonical JSON strings so the Python side sees exactly what the CLI emits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ncval_qrf::config::ScenarioConfig;
use ncval_qrf::grid::GridBasis;
use ncval_qrf::ncvalue::{self as nc, FACTOR_TOL};
use ncval_qrf::qubit::{self, QubitCase, QubitScenario};
use ncval_qrf::statekit::{make_state, Factor, Role};
use ncval_qrf::verify::{default_seed, VerifyParams};
use ncval_qrf::{runner, verify as suites, BasisLayout, Operator, QrfError};

fn py_err(e: QrfError) -> PyErr {
    PyValueError::new_err(format!("{}: {e}", e.kind()))
}

fn square(rows: Vec<Vec<Complex64>>) -> PyResult<DMatrix<Complex64>> {
    let d = rows.len();
    if d == 0 || rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("matrix must be a non-empty square list of rows"));
    }
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
}

fn generic_layout(d: usize) -> PyResult<BasisLayout> {
    BasisLayout::new(vec![Factor::frame(Role::A), Factor::indexed(Role::Generic, d)]).map_err(py_err)
}

/// Validate and run a scenario config given as JSON text; returns the report JSON.
#[pyfunction]
fn run_config(json: &str) -> PyResult<String> {
    let cfg = ScenarioConfig::from_json(json).map_err(py_err)?;
    Ok(runner::run(&cfg).map_err(py_err)?.to_json())
}

/// Run a property suite; returns `(summary_json, all_pass)`.
#[pyfunction]
#[pyo3(signature = (suite, dims=(2, 16), draws=200, seed=None, grid_n=None))]
fn verify(suite: &str, dims: (usize, usize), draws: usize, seed: Option<u64>, grid_n: Option<usize>) -> PyResult<(String, bool)> {
    let params = VerifyParams { dims, draws, seed: seed.unwrap_or_else(default_seed), grid_n };
    let summary = suites::verify(suite, &params).map_err(py_err)?;
    Ok((summary.to_json(), summary.all_pass()))
}

/// NC value of a Hermitian matrix on a state: `(f, V, uncertainty)`.
#[pyfunction]
#[pyo3(signature = (matrix, state, normalize=true))]
fn ncvalue(matrix: Vec<Vec<Complex64>>, state: Vec<Complex64>, normalize: bool) -> PyResult<(Complex64, Vec<Complex64>, f64)> {
    let m = square(matrix)?;
    let layout = generic_layout(m.nrows())?;
    let s = make_state(layout.clone(), DVector::from_vec(state), normalize).map_err(py_err)?;
    let op = Operator::dense(layout, m).map_err(py_err)?;
    let v = nc::ncvalue_of(&op, &s).map_err(py_err)?;
    Ok((v.f, v.v.iter().copied().collect(), nc::uncertainty(&v)))
}

/// Schmidt rank of a row-major `rows x cols` coefficient array.
#[pyfunction]
#[pyo3(signature = (data, rows, cols, tol=FACTOR_TOL))]
fn factor_rank(data: Vec<Complex64>, rows: usize, cols: usize, tol: f64) -> PyResult<usize> {
    nc::factor_rank(&data, rows, cols, tol).map_err(py_err)
}

/// The qubit frame-change unitary as a list of rows.
#[pyfunction]
fn qubit_unitary() -> PyResult<Vec<Vec<Complex64>>> {
    let u = qubit::build_qubit_qrf_unitary(&qubit::initial_layout()).map_err(py_err)?;
    let m = u.to_dense().map_err(py_err)?;
    Ok((0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect())
}

/// Run one qubit case (`a_prime`, `b_prime` or `c`) and return the report JSON.
#[pyfunction]
#[pyo3(signature = (case, theta=0.0, zeta=0.0, zeta_prime=0.0))]
fn run_qubit_case(case: &str, theta: f64, zeta: f64, zeta_prime: f64) -> PyResult<String> {
    let c = QubitCase::parse(case).ok_or_else(|| PyValueError::new_err(format!("BadParameters: unknown qubit case `{case}`")))?;
    let sc = QubitScenario::new(c, theta, zeta, zeta_prime).map_err(py_err)?;
    Ok(qubit::run_qubit_case(&sc).map_err(py_err)?.to_json())
}

/// Periodic position lattice with `n` sites and spacing `h`.
#[pyclass(name = "GridBasis", frozen)]
struct PyGridBasis(GridBasis);

#[pymethods]
impl PyGridBasis {
    #[new]
    #[pyo3(signature = (n, h=1.0))]
    fn new(n: usize, h: f64) -> PyResult<Self> {
        GridBasis::new(n, h).map(PyGridBasis).map_err(py_err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn h(&self) -> f64 {
        self.0.h()
    }

    fn labels(&self) -> Vec<f64> {
        self.0.labels()
    }

    fn momenta(&self) -> Vec<f64> {
        self.0.momenta()
    }

    fn index_of(&self, label: f64) -> PyResult<usize> {
        self.0.index_of(label).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("GridBasis(n={}, h={})", self.0.n(), self.0.h())
    }
}

#[pymodule]
fn ncval_qrf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(ncvalue, m)?)?;
    m.add_function(wrap_pyfunction!(factor_rank, m)?)?;
    m.add_function(wrap_pyfunction!(qubit_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(run_qubit_case, m)?)?;
    m.add_class::<PyGridBasis>()?;
    Ok(())
}
