//! Python bindings. Built with maturin as the `qubvp` module.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qubvp::convergence::{self, SweepSeries};
use qubvp::grid::{GridMap, MapKind, QuasiUniformGrid};
use qubvp::newton::{self, SolverConfig};
use qubvp::problem::{
    builtin, report_scalar, BvpProblem, CustomProblem, ProblemParams, Report, ReportNode,
};
use qubvp::scheme::JacobianMode;
use qubvp::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Singular { .. } | Error::Evaluation { .. } | Error::MissingDerivatives => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn grid_map(map: &str, c: f64) -> PyResult<GridMap> {
    let kind: MapKind = map.parse().map_err(py_err)?;
    GridMap::new(kind, c).map_err(py_err)
}

fn config(
    tol: f64,
    max_iter: usize,
    jacobian: Option<&str>,
    continuation: bool,
) -> PyResult<SolverConfig> {
    let jacobian = match jacobian {
        None => None,
        Some("analytic") => Some(JacobianMode::Analytic),
        Some("fd") => Some(JacobianMode::FiniteDifference),
        Some(other) => {
            return Err(PyValueError::new_err(format!(
                "unknown jacobian mode `{other}`"
            )))
        }
    };
    let cfg = SolverConfig {
        tol,
        max_iter,
        jacobian,
        continuation,
        ..Default::default()
    };
    cfg.validate().map_err(py_err)?;
    Ok(cfg)
}

/// Nodes of a quasi-uniform grid; the infinite endpoint(s) are `inf`.
#[pyfunction]
#[pyo3(signature = (n, map = "log", c = 5.0))]
fn grid_nodes(n: usize, map: &str, c: f64) -> PyResult<Vec<f64>> {
    let grid = QuasiUniformGrid::new(grid_map(map, c)?, n).map_err(py_err)?;
    Ok(grid.nodes().to_vec())
}

/// `x(xi)` for one map.
#[pyfunction]
#[pyo3(signature = (xi, map = "log", c = 5.0))]
fn map_eval(xi: f64, map: &str, c: f64) -> PyResult<f64> {
    grid_map(map, c)?.eval(xi).map_err(py_err)
}

/// `(step, w_next, w_here)` for interval `interval`.
#[pyfunction]
#[pyo3(signature = (n, interval, map = "log", c = 5.0, continuation = true))]
fn stencil(
    n: usize,
    interval: usize,
    map: &str,
    c: f64,
    continuation: bool,
) -> PyResult<(f64, f64, f64)> {
    let grid = QuasiUniformGrid::new(grid_map(map, c)?, n).map_err(py_err)?;
    let s = grid
        .stencil_coefficients(interval, continuation)
        .map_err(py_err)?;
    Ok((s.step, s.w_next, s.w_here))
}

#[pyclass(frozen, get_all)]
struct Solution {
    x: Vec<f64>,
    /// One list per node.
    u: Vec<Vec<f64>>,
    iterations: usize,
    final_increment: f64,
    converged: bool,
    reports: BTreeMap<String, f64>,
}

#[pymethods]
impl Solution {
    fn __repr__(&self) -> String {
        format!(
            "Solution(nodes={}, iterations={}, converged={}, reports={:?})",
            self.x.len(),
            self.iterations,
            self.converged,
            self.reports
        )
    }
}

fn run(
    problem: &dyn BvpProblem,
    grid: &QuasiUniformGrid,
    cfg: &SolverConfig,
) -> Result<Solution, Error> {
    let r = newton::solve(problem, grid, cfg)?;
    let mut reports = BTreeMap::new();
    if r.converged {
        for rep in problem.reports() {
            reports.insert(rep.name.clone(), report_scalar(problem, &r, &rep.name)?);
        }
    }
    Ok(Solution {
        x: grid.nodes().to_vec(),
        u: (0..r.solution.nodes())
            .map(|i| r.solution.node(i).to_vec())
            .collect(),
        iterations: r.iterations,
        final_increment: r.final_increment,
        converged: r.converged,
        reports,
    })
}

fn params(p: Option<f64>, p1: Option<f64>, p2: Option<f64>, p3: Option<f64>) -> ProblemParams {
    ProblemParams { p, p1, p2, p3 }
}

/// Solve a built-in problem (`"falkner-skan"` or `"pile"`).
#[pyfunction]
#[pyo3(signature = (problem, n, *, map = "log", c = 5.0, tol = 1e-6, max_iter = 50, jacobian = None,
                    continuation = true, p = None, p1 = None, p2 = None, p3 = None))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    problem: &str,
    n: usize,
    map: &str,
    c: f64,
    tol: f64,
    max_iter: usize,
    jacobian: Option<&str>,
    continuation: bool,
    p: Option<f64>,
    p1: Option<f64>,
    p2: Option<f64>,
    p3: Option<f64>,
) -> PyResult<Solution> {
    let problem = builtin(problem, &params(p, p1, p2, p3)).map_err(py_err)?;
    let grid = QuasiUniformGrid::new(grid_map(map, c)?, n).map_err(py_err)?;
    let cfg = config(tol, max_iter, jacobian, continuation)?;
    py.detach(|| run(problem.as_ref(), &grid, &cfg))
        .map_err(py_err)
}

/// Solve a problem given as Python callables.
///
/// `rhs(x, u)` and `boundary(u0, uinf)` return sequences of length `dim`;
/// `initial(x)` likewise. `reports` maps a name to `(component, "origin" | "infinity")`.
#[pyfunction]
#[pyo3(signature = (dim, rhs, boundary, n, *, initial = None, reports = None, map = "log", c = 5.0,
                    tol = 1e-6, max_iter = 50, continuation = true))]
#[allow(clippy::too_many_arguments)]
fn solve_custom(
    py: Python<'_>,
    dim: usize,
    rhs: Py<PyAny>,
    boundary: Py<PyAny>,
    n: usize,
    initial: Option<Py<PyAny>>,
    reports: Option<BTreeMap<String, (usize, String)>>,
    map: &str,
    c: f64,
    tol: f64,
    max_iter: usize,
    continuation: bool,
) -> PyResult<Solution> {
    // first exception raised by a callback; re-raised after the solve
    let failure: Arc<Mutex<Option<PyErr>>> = Arc::default();

    let store = {
        let failure = failure.clone();
        move |result: PyResult<Vec<f64>>, out: &mut [f64]| match result {
            Ok(v) if v.len() == out.len() => out.copy_from_slice(&v),
            other => {
                out.fill(f64::NAN);
                let err = other.err().unwrap_or_else(|| {
                    PyValueError::new_err(format!("callback must return {} values", out.len()))
                });
                failure.lock().unwrap().get_or_insert(err);
            }
        }
    };
    let values = |py: Python<'_>, r: PyResult<Py<PyAny>>| r.and_then(|r| r.extract::<Vec<f64>>(py));

    let (s1, s2) = (store.clone(), store.clone());
    let mut problem = CustomProblem::new(
        dim,
        move |x, u, out| Python::attach(|py| s1(values(py, rhs.call1(py, (x, u.to_vec()))), out)),
        move |u0, uinf, out| {
            Python::attach(|py| {
                s2(
                    values(py, boundary.call1(py, (u0.to_vec(), uinf.to_vec()))),
                    out,
                )
            })
        },
    )
    .map_err(py_err)?;
    if let Some(init) = initial {
        problem = problem.with_initial(move |x, out| {
            Python::attach(|py| store(values(py, init.call1(py, (x,))), out))
        });
    }
    for (name, (component, node)) in reports.unwrap_or_default() {
        let node = match node.as_str() {
            "origin" => ReportNode::Origin,
            "infinity" => ReportNode::Infinity,
            other => {
                return Err(PyValueError::new_err(format!(
                    "unknown report node `{other}`"
                )))
            }
        };
        if component >= dim {
            return Err(PyValueError::new_err(format!(
                "report component {component} out of range"
            )));
        }
        problem = problem.with_report(Report::new(&name, component, node));
    }

    let grid = QuasiUniformGrid::new(grid_map(map, c)?, n).map_err(py_err)?;
    let cfg = config(tol, max_iter, None, continuation)?;
    let result = py.detach(|| run(&problem, &grid, &cfg));
    if let Some(err) = failure.lock().unwrap().take() {
        return Err(err);
    }
    result.map_err(py_err)
}

/// Solve on doubling grids. Returns a dict with `N`, `iterations`,
/// `converged`, and per-quantity `values` and `orders` (None where absent).
#[pyfunction]
#[pyo3(signature = (problem, ns, *, map = "log", c = 5.0, tol = 1e-6, max_iter = 50, decimals = Some(6),
                    p = None, p1 = None, p2 = None, p3 = None))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    problem: &str,
    ns: Vec<usize>,
    map: &str,
    c: f64,
    tol: f64,
    max_iter: usize,
    decimals: Option<usize>,
    p: Option<f64>,
    p1: Option<f64>,
    p2: Option<f64>,
    p3: Option<f64>,
) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
    let problem = builtin(problem, &params(p, p1, p2, p3)).map_err(py_err)?;
    let map = grid_map(map, c)?;
    let cfg = config(tol, max_iter, None, true)?;
    let sweep = py
        .detach(|| convergence::run_sweep(problem.as_ref(), map, &ns, &cfg))
        .map_err(py_err)?;

    let out = pyo3::types::PyDict::new(py);
    out.set_item("N", sweep.rows.iter().map(|r| r.n).collect::<Vec<_>>())?;
    out.set_item(
        "iterations",
        sweep.rows.iter().map(|r| r.iterations).collect::<Vec<_>>(),
    )?;
    out.set_item(
        "converged",
        sweep.rows.iter().map(|r| r.converged).collect::<Vec<_>>(),
    )?;
    let values = pyo3::types::PyDict::new(py);
    let orders = pyo3::types::PyDict::new(py);
    for q in &sweep.quantities {
        values.set_item(q, sweep.column(q).map_err(py_err)?)?;
        orders.set_item(q, sweep.orders(q, decimals).map_err(py_err)?)?;
    }
    out.set_item("values", values)?;
    out.set_item("orders", orders)?;
    Ok(out)
}

/// Nested Richardson table for values on doubling grids `ns`.
/// Column `k` is returned as a list aligned with rows `k..`.
#[pyfunction]
#[pyo3(signature = (ns, values, decimals = 6))]
fn extrapolate(ns: Vec<usize>, values: Vec<f64>, decimals: usize) -> PyResult<Vec<Vec<f64>>> {
    if ns.len() != values.len() {
        return Err(PyValueError::new_err("ns and values differ in length"));
    }
    let series = SweepSeries::new("value", ns.into_iter().zip(values).collect()).map_err(py_err)?;
    Ok(convergence::extrapolate_table(&series, decimals)
        .map_err(py_err)?
        .columns)
}

#[pyfunction]
fn observed_order(t_n: f64, t_2n: f64, t_ref: f64) -> f64 {
    convergence::observed_order(t_n, t_2n, t_ref)
}

#[pyfunction]
fn richardson_error(t_n: f64, t_2n: f64, p: f64) -> f64 {
    convergence::richardson_error(t_n, t_2n, p)
}

#[pymodule]
#[pyo3(name = "qubvp")]
fn qubvp_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(grid_nodes, m)?)?;
    m.add_function(wrap_pyfunction!(map_eval, m)?)?;
    m.add_function(wrap_pyfunction!(stencil, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(solve_custom, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(extrapolate, m)?)?;
    m.add_function(wrap_pyfunction!(observed_order, m)?)?;
    m.add_function(wrap_pyfunction!(richardson_error, m)?)?;
    Ok(())
}
