//! Python bindings: spin spaces, coarse-grainings, the kicked top and its
//! diagnostics, and the experiment runner.

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qkt_oe::classical_map::{self, PhasePoint};
use qkt_oe::diagnostics::{self, Quantity, SeriesMeta, TimeSeries};
use qkt_oe::ensemble::{averaged_series_with, EnsembleSpec, QuantitySpec, SharedDynamics};
use qkt_oe::entropy::{self, HalfHalfOrder};
use qkt_oe::experiments::{self, Experiment, RunConfig};
use qkt_oe::kicked_top::{self, KickedTopParams};
use qkt_oe::spin_algebra::{self, Axis};
use qkt_oe::{ComplexMatrix, Error, StateVector};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(_) | Error::Eigen(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for qkt_oe::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn series(values: Vec<f64>) -> PyResult<TimeSeries> {
    TimeSeries::new(values, SeriesMeta::new(Quantity::Oe, spin_algebra::SpinSpace::from_twice_j(1))).py()
}

fn axis(name: &str) -> PyResult<Axis> {
    match name {
        "x" => Ok(Axis::X),
        "y" => Ok(Axis::Y),
        "z" => Ok(Axis::Z),
        _ => Err(PyValueError::new_err(format!("axis must be x, y or z, got {name:?}"))),
    }
}

/// Spin-j space of dimension 2j + 1, basis ordered by descending m.
#[pyclass(name = "SpinSpace", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PySpinSpace(spin_algebra::SpinSpace);

#[pymethods]
impl PySpinSpace {
    #[new]
    fn new(dim: usize) -> PyResult<Self> {
        spin_algebra::SpinSpace::from_dim(dim).py().map(Self)
    }

    #[staticmethod]
    fn from_j(j: f64) -> PyResult<Self> {
        spin_algebra::SpinSpace::from_j(j).py().map(Self)
    }

    #[getter]
    fn j(&self) -> f64 {
        self.0.j()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn m(&self, q: usize) -> PyResult<f64> {
        if q >= self.0.dim() {
            return Err(PyValueError::new_err(format!("index {q} outside dimension {}", self.0.dim())));
        }
        Ok(self.0.m(q))
    }

    fn __repr__(&self) -> String {
        format!("SpinSpace(dim={})", self.0.dim())
    }
}

/// Contiguous blocks of J_z eigenstates.
#[pyclass(name = "CoarseGraining", frozen, from_py_object)]
#[derive(Clone)]
struct PyCoarseGraining(entropy::CoarseGraining);

#[pymethods]
impl PyCoarseGraining {
    #[staticmethod]
    fn uniform(dim: usize, mu: usize) -> PyResult<Self> {
        entropy::uniform_partition(dim, mu).py().map(Self)
    }

    #[staticmethod]
    #[pyo3(signature = (dim, coarse_first = false))]
    fn half_half(dim: usize, coarse_first: bool) -> PyResult<Self> {
        let order = if coarse_first { HalfHalfOrder::CoarseFirst } else { HalfHalfOrder::FineFirst };
        entropy::half_half_partition(dim, order).py().map(Self)
    }

    #[staticmethod]
    fn from_volumes(dim: usize, volumes: Vec<usize>) -> PyResult<Self> {
        entropy::CoarseGraining::from_volumes(dim, &volumes).py().map(Self)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn volumes(&self) -> Vec<usize> {
        self.0.volumes()
    }

    fn is_rougher_than(&self, other: &PyCoarseGraining) -> bool {
        self.0.is_rougher_than(&other.0)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// Kicked top with its Floquet operator built once.
#[pyclass(name = "KickedTop", frozen)]
struct PyKickedTop {
    dynamics: SharedDynamics,
}

impl PyKickedTop {
    fn space(&self) -> spin_algebra::SpinSpace {
        self.dynamics.params.space
    }

    fn coherent(&self, theta: f64, phi: f64) -> PyResult<StateVector> {
        spin_algebra::coherent_state(self.space(), theta, phi).py()
    }
}

#[pymethods]
impl PyKickedTop {
    #[new]
    #[pyo3(signature = (dim, kappa, alpha = FRAC_PI_2))]
    fn new(dim: usize, kappa: f64, alpha: f64) -> PyResult<Self> {
        let space = spin_algebra::SpinSpace::from_dim(dim).py()?;
        let params = KickedTopParams::new(space, kappa).with_alpha(alpha);
        Ok(Self { dynamics: SharedDynamics::new(params).py()? })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.space().dim()
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.dynamics.params.kappa
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.dynamics.params.alpha
    }

    /// Floquet matrix as a list of rows.
    fn unitary(&self) -> Vec<Vec<C64>> {
        self.dynamics.floquet.to_rows()
    }

    /// States at steps 0..=n.
    fn evolve(&self, state: Vec<C64>, n: usize) -> PyResult<Vec<Vec<C64>>> {
        let psi = StateVector::from_amplitudes(state).py()?;
        let traj = kicked_top::evolve_state(&self.dynamics.floquet, &psi, n).py()?;
        Ok(traj.into_iter().map(StateVector::into_amplitudes).collect())
    }

    fn oe_series(&self, theta: f64, phi: f64, cg: &PyCoarseGraining, n: usize) -> PyResult<Vec<f64>> {
        let psi = self.coherent(theta, phi)?;
        Ok(diagnostics::oe_series(&psi, &cg.0, &self.dynamics.floquet, n).py()?.values)
    }

    #[pyo3(signature = (theta, phi, n, operator = "z"))]
    fn otoc_series(&self, theta: f64, phi: f64, n: usize, operator: &str) -> PyResult<Vec<f64>> {
        let psi = self.coherent(theta, phi)?;
        let ops = spin_algebra::SpinOperators::new(self.space());
        let a = ops.component(axis(operator)?);
        Ok(diagnostics::otoc(&psi, a, &self.dynamics.floquet, n).py()?.values)
    }

    #[pyo3(signature = (theta, phi, n, delta = diagnostics::DEFAULT_FOTOC_DELTA))]
    fn fotoc_series(&self, theta: f64, phi: f64, n: usize, delta: f64) -> PyResult<Vec<f64>> {
        let psi = self.coherent(theta, phi)?;
        Ok(diagnostics::fotoc(&psi, delta, &self.dynamics.floquet, n).py()?.values)
    }

    /// Mean series over a seeded coherent-state ensemble. `quantity` is
    /// "oe" (needs `cg`), "otoc" or "fotoc".
    #[pyo3(signature = (quantity, n, count = 100, seed = 0, cg = None, delta = diagnostics::DEFAULT_FOTOC_DELTA, sampling = "uniform-theta-phi"))]
    #[allow(clippy::too_many_arguments)]
    fn ensemble_average(
        &self,
        py: Python<'_>,
        quantity: &str,
        n: usize,
        count: usize,
        seed: u64,
        cg: Option<PyCoarseGraining>,
        delta: f64,
        sampling: &str,
    ) -> PyResult<Vec<f64>> {
        let q = match (quantity, cg) {
            ("oe", Some(cg)) => QuantitySpec::Oe(cg.0),
            ("oe", None) => return Err(PyValueError::new_err("quantity \"oe\" needs a coarse-graining")),
            ("otoc", _) => QuantitySpec::Otoc(Axis::Z),
            ("fotoc", _) => QuantitySpec::Fotoc(delta),
            (other, _) => return Err(PyValueError::new_err(format!("unknown quantity {other:?}"))),
        };
        let spec = EnsembleSpec { sampling: sampling.parse().py()?, ..EnsembleSpec::new(count, seed) };
        let dynamics = &self.dynamics;
        py.detach(|| averaged_series_with(dynamics, &q, &spec, n)).py().map(|s| s.values)
    }

    fn ehrenfest_time(&self) -> PyResult<f64> {
        kicked_top::ehrenfest_time(self.space(), self.dynamics.params.kappa).py()
    }
}

#[pyfunction]
fn coherent_state(dim: usize, theta: f64, phi: f64) -> PyResult<Vec<C64>> {
    let space = spin_algebra::SpinSpace::from_dim(dim).py()?;
    Ok(spin_algebra::coherent_state(space, theta, phi).py()?.into_amplitudes())
}

#[pyfunction]
fn rotation(dim: usize, axis_name: &str, angle: f64) -> PyResult<Vec<Vec<C64>>> {
    let space = spin_algebra::SpinSpace::from_dim(dim).py()?;
    Ok(spin_algebra::rotation(space, axis(axis_name)?, angle).py()?.to_rows())
}

/// `(total, shannon, boltzmann)` in nats for a pure state.
#[pyfunction]
fn observational_entropy(state: Vec<C64>, cg: &PyCoarseGraining) -> PyResult<(f64, f64, f64)> {
    let psi = StateVector::from_amplitudes(state).py()?;
    let oe = entropy::observational_entropy(&psi, &cg.0).py()?;
    Ok((oe.total, oe.shannon, oe.boltzmann))
}

#[pyfunction]
fn von_neumann_entropy(rho: Vec<Vec<C64>>) -> PyResult<f64> {
    spin_algebra::von_neumann_entropy(&ComplexMatrix::from_rows(&rho).py()?).py()
}

/// `(slope, intercept, residual)` of `ln(max_value - v)` over steps `first..=last`.
#[pyfunction]
fn fit_exponential_approach(values: Vec<f64>, max_value: f64, first: usize, last: usize) -> PyResult<(f64, f64, f64)> {
    let fit = diagnostics::fit_exponential_approach(&series(values)?, max_value, (first, last)).py()?;
    Ok((fit.slope, fit.intercept, fit.residual))
}

#[pyfunction]
fn lambda_oe(values: Vec<f64>) -> PyResult<f64> {
    diagnostics::lambda_oe(&series(values)?).py()
}

#[pyfunction]
fn lambda_q(values: Vec<f64>) -> PyResult<f64> {
    diagnostics::lambda_q(&series(values)?).py()
}

/// `(mean, std, max_excursion)` over `values[tail_start:]`.
#[pyfunction]
fn fluctuation_stats(values: Vec<f64>, tail_start: usize) -> PyResult<(f64, f64, f64)> {
    let s = diagnostics::fluctuation_stats(&series(values)?, tail_start).py()?;
    Ok((s.mean, s.std, s.max_excursion))
}

#[pyfunction]
fn classical_step(point: (f64, f64, f64), kappa: f64) -> PyResult<(f64, f64, f64)> {
    let p = classical_map::classical_step(PhasePoint::new(point.0, point.1, point.2), kappa).py()?;
    Ok((p.x, p.y, p.z))
}

/// Rows `(traj_id, step, theta, phi)`.
#[pyfunction]
fn phase_portrait(kappa: f64, n_init: usize, n_steps: usize, seed: u64) -> PyResult<Vec<(usize, usize, f64, f64)>> {
    let points = classical_map::phase_portrait(kappa, n_init, n_steps, seed).py()?;
    Ok(points.into_iter().map(|p| (p.traj_id, p.step, p.theta, p.phi)).collect())
}

/// `(name, description)` for every experiment.
#[pyfunction]
fn list_experiments() -> Vec<(&'static str, &'static str)> {
    Experiment::ALL.iter().map(|e| (e.name(), e.description())).collect()
}

/// Runs an experiment with `key=value` settings and returns the written paths.
#[pyfunction]
#[pyo3(signature = (name, out, settings = None))]
fn run_experiment(py: Python<'_>, name: &str, out: &str, settings: Option<Vec<(String, String)>>) -> PyResult<Vec<String>> {
    let experiment: Experiment = name.parse().py()?;
    let cfg = RunConfig::parse(experiment, "", &settings.unwrap_or_default()).py()?;
    let paths = py
        .detach(|| experiments::run(&cfg).and_then(|o| o.write(Path::new(out), cfg.format)))
        .py()?;
    Ok(paths.into_iter().map(|p| p.display().to_string()).collect())
}

#[pymodule]
#[pyo3(name = "qkt_oe")]
pub fn qkt_oe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySpinSpace>()?;
    m.add_class::<PyCoarseGraining>()?;
    m.add_class::<PyKickedTop>()?;
    m.add_function(wrap_pyfunction!(coherent_state, m)?)?;
    m.add_function(wrap_pyfunction!(rotation, m)?)?;
    m.add_function(wrap_pyfunction!(observational_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(von_neumann_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponential_approach, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_oe, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_q, m)?)?;
    m.add_function(wrap_pyfunction!(fluctuation_stats, m)?)?;
    m.add_function(wrap_pyfunction!(classical_step, m)?)?;
    m.add_function(wrap_pyfunction!(phase_portrait, m)?)?;
    m.add_function(wrap_pyfunction!(list_experiments, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("__version__", experiments::CODE_VERSION)?;
    Ok(())
}
