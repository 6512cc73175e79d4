//! Python module `dcbo_py`.

use dcbo::acquisition::{InnerSolver, KgContext, ModelBundle};
use dcbo::engine::{self, EngineConfig, Policy, RunRecord};
use dcbo::gp::{self, FitOptions, GpModel};
use dcbo::optim::Bounds;
use dcbo::problems::{self, ProblemDefinition};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: dcbo::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A benchmark problem in the maximisation convention.
#[pyclass(name = "Problem", module = "dcbo_py", frozen)]
struct PyProblem {
    inner: ProblemDefinition,
}

#[pymethods]
impl PyProblem {
    /// Looks up a built-in problem; `costs` is an optional per-task list.
    #[new]
    #[pyo3(signature = (name, costs=None))]
    fn new(name: &str, costs: Option<Vec<f64>>) -> PyResult<Self> {
        let mut p = problems::problem(name).map_err(err)?;
        if let Some(c) = costs {
            p = p.with_costs(engine::CostVector::new(c).map_err(err)?).map_err(err)?;
        }
        Ok(Self { inner: p })
    }

    #[staticmethod]
    fn names() -> Vec<&'static str> {
        problems::PROBLEM_NAMES.to_vec()
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn num_tasks(&self) -> usize {
        self.inner.num_tasks()
    }

    #[getter]
    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (self.inner.bounds().lower().to_vec(), self.inner.bounds().upper().to_vec())
    }

    #[getter]
    fn costs(&self) -> Vec<f64> {
        self.inner.costs().as_slice().to_vec()
    }

    /// `(value, x)` of the certified optimum.
    #[getter]
    fn optimum(&self) -> Option<(f64, Vec<f64>)> {
        self.inner.optimum().map(|o| (o.value, o.x.clone()))
    }

    /// Task 0 is the objective, task k the k-th constraint (feasible when <= 0).
    fn evaluate(&self, task: usize, x: Vec<f64>) -> PyResult<f64> {
        self.inner.evaluate(task, &x).map_err(err)
    }

    fn is_feasible(&self, x: Vec<f64>) -> PyResult<bool> {
        self.inner.is_feasible(&x).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Problem('{}', dim={}, tasks={})", self.inner.name(), self.inner.dim(), self.inner.num_tasks())
    }
}

/// A Gaussian process with fitted hyperparameters.
#[pyclass(name = "GaussianProcess", module = "dcbo_py", frozen, from_py_object)]
#[derive(Clone)]
struct PyGp {
    inner: GpModel,
}

#[pymethods]
impl PyGp {
    /// Fits kernel hyperparameters by maximum likelihood on data inside the box.
    #[staticmethod]
    #[pyo3(signature = (x, y, lower, upper, seed=0))]
    fn fit(x: Vec<Vec<f64>>, y: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>, seed: u64) -> PyResult<Self> {
        let bounds = Bounds::new(lower, upper).map_err(err)?;
        let opts = FitOptions { seed, ..FitOptions::default() };
        Ok(Self { inner: gp::fit(&x, &y, &bounds, &opts).map_err(err)? })
    }

    /// Posterior `(mean, variance)` of the latent function at `x`.
    fn posterior(&self, x: Vec<f64>) -> PyResult<(f64, f64)> {
        let p = self.inner.posterior(&x).map_err(err)?;
        Ok((p.mean, p.variance))
    }

    #[getter]
    fn lengthscales(&self) -> Vec<f64> {
        self.inner.params().lengthscales.clone()
    }

    #[getter]
    fn num_observations(&self) -> usize {
        self.inner.len()
    }
}

fn bundle(objective: &PyGp, constraints: Vec<PyGp>) -> PyResult<ModelBundle> {
    ModelBundle::new(objective.inner.clone(), constraints.into_iter().map(|c| c.inner).collect()).map_err(err)
}

/// Coupled constrained knowledge gradient at `x`, given the current recommendation `x_r`.
#[pyfunction]
#[pyo3(signature = (objective, constraints, lower, upper, x, x_r, penalty=0.0, raw_samples=64, seed=0))]
#[allow(clippy::too_many_arguments)]
fn ckg(
    objective: &PyGp,
    constraints: Vec<PyGp>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    x_r: Vec<f64>,
    penalty: f64,
    raw_samples: usize,
    seed: u64,
) -> PyResult<f64> {
    let b = bundle(objective, constraints)?;
    let bounds = Bounds::new(lower, upper).map_err(err)?;
    let ctx =
        KgContext::new(&b, &bounds, InnerSolver::Screened(raw_samples), penalty, Some(&x_r), seed).map_err(err)?;
    ctx.ckg(&x).map_err(err)
}

/// Decoupled value of evaluating only task `task` at `x`, divided by `cost`.
#[pyfunction]
#[pyo3(signature = (objective, constraints, lower, upper, x, task, x_r, cost=1.0, penalty=0.0, raw_samples=64, seed=0))]
#[allow(clippy::too_many_arguments)]
fn dckg(
    objective: &PyGp,
    constraints: Vec<PyGp>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    task: usize,
    x_r: Vec<f64>,
    cost: f64,
    penalty: f64,
    raw_samples: usize,
    seed: u64,
) -> PyResult<f64> {
    let b = bundle(objective, constraints)?;
    let bounds = Bounds::new(lower, upper).map_err(err)?;
    let ctx =
        KgContext::new(&b, &bounds, InnerSolver::Screened(raw_samples), penalty, Some(&x_r), seed).map_err(err)?;
    ctx.dckg_source(&x, task, cost).map_err(err)
}

fn run_to_dicts<'py>(py: Python<'py>, run: &RunRecord) -> PyResult<Vec<Bound<'py, PyDict>>> {
    run.steps
        .iter()
        .map(|s| {
            let d = PyDict::new(py);
            d.set_item("step", s.step)?;
            d.set_item("tasks", s.tasks.clone())?;
            d.set_item("location", s.location.clone())?;
            d.set_item("spent", s.spent)?;
            d.set_item("oc", s.oc)?;
            d.set_item("recommended", s.recommended.clone())?;
            Ok(d)
        })
        .collect()
}

/// Runs one optimisation and returns its steps as dictionaries.
#[pyfunction]
#[pyo3(signature = (problem, policy, budget, seed=0, preset="desk", include_coupled_ckg=true))]
fn run<'py>(
    py: Python<'py>,
    problem: &PyProblem,
    policy: &str,
    budget: f64,
    seed: u64,
    preset: &str,
    include_coupled_ckg: bool,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let policy: Policy = policy.parse().map_err(err)?;
    let mut cfg = EngineConfig::preset(preset).map_err(err)?;
    cfg.include_coupled_ckg = include_coupled_ckg;
    let p = problem.inner.clone();
    let record = py.detach(move || engine::run(&p, policy, budget, seed, &cfg)).map_err(err)?;
    run_to_dicts(py, &record)
}

/// Certifies the constrained optimum on a grid of `resolution` points per axis.
#[pyfunction]
#[pyo3(signature = (name, resolution=1000))]
fn certify(name: &str, resolution: usize) -> PyResult<(f64, Vec<f64>)> {
    let p = problems::problem_uncertified(name).map_err(err)?;
    let c = problems::certify_optimum(&p, resolution).map_err(err)?;
    Ok((c.value, c.x))
}

#[pymodule]
fn dcbo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyGp>()?;
    m.add_function(wrap_pyfunction!(ckg, m)?)?;
    m.add_function(wrap_pyfunction!(dckg, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add("POLICIES", Policy::ALL.iter().map(|p| p.name()).collect::<Vec<_>>())?;
    Ok(())
}
