//! Python bindings: scale-factor trajectories, collision operators, norms,
//! regime analysis and full runs.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use cosmoboltz_core::collision::{AngularKernel, AngularKind, CollisionOperatorSet, SingularTreatment, DEFAULT_NODE_BUDGET};
use cosmoboltz_core::config::{preset, RunConfig};
use cosmoboltz_core::decay::{self, RegimeTag};
use cosmoboltz_core::norms::{triple_norm_frac, NormConfig};
use cosmoboltz_core::runner;
use cosmoboltz_core::scale_factor::{self, ScaleFactorTrajectory};
use cosmoboltz_core::sphere::SphereQuadrature;
use cosmoboltz_core::velocity::{Distribution, VelocityGrid};
use cosmoboltz_core::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_)
        | Error::Config(_)
        | Error::GridMismatch(_)
        | Error::RegimeMismatch(_)
        | Error::TimeOutOfRange { .. }
        | Error::StencilExceedsGrid { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_json<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_regime(name: &str) -> PyResult<RegimeTag> {
    Ok(match name {
        "I" => RegimeTag::I,
        "II" => RegimeTag::II,
        "III" => RegimeTag::III,
        "IV" => RegimeTag::IV,
        "UNCOVERED" => RegimeTag::Uncovered,
        _ => return Err(PyValueError::new_err(format!("unknown regime {name:?}"))),
    })
}

/// Solution of the scale-factor equation on `[0, t_end]`.
#[pyclass(name = "ScaleFactor", module = "cosmoboltz", frozen)]
struct PyScaleFactor {
    inner: ScaleFactorTrajectory,
}

#[pymethods]
impl PyScaleFactor {
    #[new]
    #[pyo3(signature = (adot0, gamma, t_end, dt = 1e-3))]
    fn new(adot0: f64, gamma: f64, t_end: f64, dt: f64) -> PyResult<Self> {
        let inner = scale_factor::solve_scale_factor(adot0, gamma, t_end, dt).map_err(py_err)?;
        Ok(PyScaleFactor { inner })
    }

    fn a(&self, t: f64) -> PyResult<f64> {
        self.inner.a_at(t).map_err(py_err)
    }

    fn a_gamma(&self, t: f64) -> PyResult<f64> {
        self.inner.a_gamma(t).map_err(py_err)
    }

    fn a_gamma_integral(&self, t: f64) -> PyResult<f64> {
        self.inner.a_gamma_integral(t).map_err(py_err)
    }

    #[getter]
    fn energy(&self) -> f64 {
        self.inner.energy()
    }

    #[getter]
    fn max_energy_drift(&self) -> f64 {
        self.inner.max_energy_drift()
    }

    #[getter]
    fn t_end(&self) -> f64 {
        self.inner.t_end()
    }
}

/// Linearized and nonlinear collision operators on a uniform velocity grid.
#[pyclass(name = "Operators", module = "cosmoboltz", frozen)]
struct PyOperators {
    inner: CollisionOperatorSet,
}

impl PyOperators {
    fn dist(&self, values: Vec<f64>) -> PyResult<Distribution> {
        Distribution::from_values(*self.inner.grid(), values).map_err(py_err)
    }
}

#[pymethods]
impl PyOperators {
    #[new]
    #[pyo3(signature = (n_per_axis, v_max, gamma, sphere_nodes = 12, kernel = "abs_cos", eps_reg = None, assemble = true))]
    fn new(
        py: Python<'_>,
        n_per_axis: usize,
        v_max: f64,
        gamma: f64,
        sphere_nodes: usize,
        kernel: &str,
        eps_reg: Option<f64>,
        assemble: bool,
    ) -> PyResult<Self> {
        let kind = match kernel {
            "abs_cos" => AngularKind::AbsCos,
            "constant" => AngularKind::Constant,
            _ => return Err(PyValueError::new_err(format!("unknown kernel {kernel:?}"))),
        };
        let treatment = eps_reg.map_or(SingularTreatment::Corrected, |eps| SingularTreatment::Softened { eps });
        py.detach(|| {
            let grid = VelocityGrid::new(n_per_axis, v_max)?;
            let sphere = SphereQuadrature::with_nodes(sphere_nodes)?;
            let mut inner = CollisionOperatorSet::new(grid, gamma, AngularKernel::new(kind, 1.0)?, treatment, &sphere)?;
            if assemble {
                inner.assemble(DEFAULT_NODE_BUDGET)?;
            }
            Ok(PyOperators { inner })
        })
        .map_err(py_err)
    }

    #[getter]
    fn nodes(&self) -> usize {
        self.inner.grid().len()
    }

    /// Node velocities in storage order.
    fn velocities(&self) -> Vec<[f64; 3]> {
        let g = self.inner.grid();
        (0..g.len()).map(|i| g.velocity(i)).collect()
    }

    /// Collision frequency at the nodes.
    fn nu(&self) -> Vec<f64> {
        self.inner.nu.clone()
    }

    fn apply_k(&self, py: Python<'_>, f: Vec<f64>) -> PyResult<Vec<f64>> {
        let f = self.dist(f)?;
        py.detach(|| self.inner.apply_k(&f)).map(|d| d.values).map_err(py_err)
    }

    fn apply_l(&self, py: Python<'_>, f: Vec<f64>) -> PyResult<Vec<f64>> {
        let f = self.dist(f)?;
        py.detach(|| self.inner.apply_l(&f)).map(|d| d.values).map_err(py_err)
    }

    fn apply_gamma(&self, py: Python<'_>, f: Vec<f64>, g: Vec<f64>) -> PyResult<Vec<f64>> {
        let (f, g) = (self.dist(f)?, self.dist(g)?);
        py.detach(|| self.inner.apply_gamma(&f, &g)).map(|d| d.values).map_err(py_err)
    }

    /// `|||f|||_k²` with derivatives up to order `n_der`.
    #[pyo3(signature = (f, k, n_der = 2))]
    fn triple_norm(&self, f: Vec<f64>, k: f64, n_der: u32) -> PyResult<f64> {
        let f = self.dist(f)?;
        let cfg = NormConfig::new(n_der, 3, 1, self.inner.gamma()).map_err(py_err)?;
        triple_norm_frac(&f, k, &cfg).map_err(py_err)
    }

    /// Relative asymmetry of the assembled `K` matrix, if assembled.
    #[getter]
    fn k_asymmetry(&self) -> Option<f64> {
        self.inner.k_matrix.as_ref().map(|m| m.asymmetry)
    }
}

#[pyfunction]
fn critical_expansion_rate() -> f64 {
    scale_factor::critical_expansion_rate()
}

#[pyfunction]
fn classify_regime(e_a: f64, gamma: f64) -> PyResult<&'static str> {
    decay::classify_regime(e_a, gamma).map(RegimeTag::name).map_err(py_err)
}

#[pyfunction]
fn predicted_envelope(regime: &str, k: u32, gamma: f64, t: f64) -> PyResult<f64> {
    decay::predicted_envelope(parse_regime(regime)?, k, gamma, t).map_err(py_err)
}

/// Least-squares slopes of `ln y` against `ln(1+t)` and `ln(1+ln(1+t))`.
#[pyfunction]
#[pyo3(signature = (times, values, window = 0.5))]
fn fit_decay<'py>(py: Python<'py>, times: Vec<f64>, values: Vec<f64>, window: f64) -> PyResult<Bound<'py, PyAny>> {
    to_json(py, &decay::fit_decay(&times, &values, window).map_err(py_err)?)
}

/// Runs a bundled preset or a TOML config and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (out_dir, preset_name = None, config_toml = None))]
fn run<'py>(
    py: Python<'py>,
    out_dir: PathBuf,
    preset_name: Option<&str>,
    config_toml: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let cfg = match (preset_name, config_toml) {
        (Some(name), None) => preset(name),
        (None, Some(text)) => RunConfig::from_toml(text),
        _ => return Err(PyValueError::new_err("give exactly one of preset_name and config_toml")),
    }
    .map_err(py_err)?;
    let outcome = py.detach(|| runner::run_to_dir(&cfg, &out_dir)).map_err(py_err)?;
    to_json(py, &outcome.report)
}

#[pymodule]
fn cosmoboltz(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScaleFactor>()?;
    m.add_class::<PyOperators>()?;
    m.add_function(wrap_pyfunction!(critical_expansion_rate, m)?)?;
    m.add_function(wrap_pyfunction!(classify_regime, m)?)?;
    m.add_function(wrap_pyfunction!(predicted_envelope, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
