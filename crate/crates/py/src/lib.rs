//! Python bindings. Reports come back as plain dicts and lists.

use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use reflectlab::contractivity::{self, default_escape_threshold};
use reflectlab::general_walk::{self, total_variation};
use reflectlab::measures::{self, IncrementLaw, LawKind};
use reflectlab::simulate::{self, EnsembleConfig, PathMode, SeededStream};
use reflectlab::{continuous, lattice, Error};

fn err(e: Error) -> PyErr {
    match e {
        Error::Numeric(_) | Error::RenewalTooShort { .. } | Error::Drift(_) => {
            PyArithmeticError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// An increment law parsed from a spec such as `"lat:powerlaw(a=0.7)"`.
#[pyclass(frozen, module = "reflectlab")]
struct Law {
    inner: IncrementLaw,
}

#[pymethods]
impl Law {
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        measures::parse_law(spec).map(|inner| Law { inner }).map_err(err)
    }

    #[getter]
    fn spec(&self) -> &str {
        self.inner.spec()
    }

    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind() {
            LawKind::LatticeFinite => "lattice_finite",
            LawKind::LatticePowerLaw => "lattice_powerlaw",
            LawKind::LatticeLogPowerLaw => "lattice_logpow",
            LawKind::SignedLatticeFinite => "signed_finite",
            LawKind::SignedSymmetricPowerLaw => "signed_sympow",
            LawKind::ContinuousExponential => "exponential",
            LawKind::ContinuousUniform => "uniform",
            LawKind::ContinuousPareto => "pareto",
        }
    }

    #[getter]
    fn span(&self) -> Option<i64> {
        self.inner.span()
    }

    #[getter]
    fn is_lattice(&self) -> bool {
        self.inner.is_lattice()
    }

    #[getter]
    fn is_signed(&self) -> bool {
        self.inner.is_signed()
    }

    /// Point mass at `k` (0 for continuous laws).
    fn mass(&self, k: i64) -> f64 {
        self.inner.mass(k)
    }

    /// `P(Y > x)`.
    fn tail(&self, x: f64) -> f64 {
        self.inner.cdf_tail(x).1
    }

    fn moments(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &measures::moments(&self.inner))
    }

    fn __repr__(&self) -> String {
        format!("Law({:?})", self.inner.spec())
    }
}

fn mode(name: &str) -> PyResult<PathMode> {
    match name {
        "reflected" => Ok(PathMode::Reflected),
        "classical" => Ok(PathMode::Classical),
        _ => Err(PyValueError::new_err(format!("mode must be 'reflected' or 'classical', got {name:?}"))),
    }
}

#[derive(Serialize)]
struct PathOut {
    values: Vec<f64>,
    increments: Vec<f64>,
    reflection_times: Vec<u64>,
    reflection_values: Vec<f64>,
}

/// One seeded path with its reflection times (reflected mode only).
#[pyfunction]
#[pyo3(signature = (law, x0, steps, seed, stream = 0, mode = "reflected"))]
fn sample_path(
    py: Python<'_>,
    law: &Law,
    x0: f64,
    steps: usize,
    seed: u64,
    stream: u64,
    mode: &str,
) -> PyResult<Py<PyAny>> {
    let m = self::mode(mode)?;
    let path =
        py.detach(|| simulate::sample_path(&law.inner, m, x0, steps, SeededStream::new(seed, stream))).map_err(err)?;
    let trace = match m {
        PathMode::Reflected => simulate::reflection_trace(&path).map_err(err)?,
        PathMode::Classical => simulate::ReflectionTrace { times: vec![], values: vec![] },
    };
    let out = PathOut {
        values: path.values,
        increments: path.increments,
        reflection_times: trace.times,
        reflection_values: trace.values,
    };
    to_py(py, &out)
}

#[pyfunction]
#[pyo3(signature = (law, x0, steps, paths, seed, workers = 1, window = (0.0, 10.0), bins = 100, return_interval = (0.0, 1.0), escape_threshold = None))]
#[allow(clippy::too_many_arguments)]
fn ensemble_run(
    py: Python<'_>,
    law: &Law,
    x0: f64,
    steps: u64,
    paths: u64,
    seed: u64,
    workers: usize,
    window: (f64, f64),
    bins: usize,
    return_interval: (f64, f64),
    escape_threshold: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let cfg = EnsembleConfig {
        x0,
        steps,
        paths,
        seed,
        workers,
        window,
        bins,
        return_interval,
        escape_threshold: escape_threshold.unwrap_or_else(|| default_escape_threshold(&law.inner)),
    };
    let report = py.detach(|| simulate::ensemble_run(&law.inner, &cfg)).map_err(err)?;
    to_py(py, &report)
}

/// Renewal sequence `U(0..=n_max)`.
#[pyfunction]
fn renewal_sequence(law: &Law, n_max: i64) -> PyResult<Vec<f64>> {
    Ok(measures::renewal_sequence(&law.inner, n_max).map_err(err)?.values().to_vec())
}

/// `nu`, `rho` and their residuals on the essential class of `x0`.
#[pyfunction]
#[pyo3(signature = (law, x0 = 0.0, x_max = 1000.0))]
fn invariant_table(py: Python<'_>, law: &Law, x0: f64, x_max: f64) -> PyResult<Py<PyAny>> {
    let table = py.detach(|| lattice::invariant_table(&law.inner, x0, x_max)).map_err(err)?;
    to_py(py, &table)
}

#[pyfunction]
fn quadratic_tail(py: Python<'_>, law: &Law) -> PyResult<Py<PyAny>> {
    let m = &law.inner;
    let report =
        if m.is_continuous() { continuous::quadratic_tail_integral(m) } else { lattice::quadratic_tail_sum(m) };
    to_py(py, &report.map_err(err)?)
}

#[pyfunction]
fn classify(py: Python<'_>, law: &Law) -> PyResult<Py<PyAny>> {
    let m = &law.inner;
    let report = if m.is_continuous() { continuous::classify_continuous(m) } else { lattice::classify_lattice(m) };
    to_py(py, &report.map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (law, x_max = 10.0, points = 200))]
fn density_grid(py: Python<'_>, law: &Law, x_max: f64, points: usize) -> PyResult<Py<PyAny>> {
    let grid = py.detach(|| continuous::density_grid(&law.inner, x_max, points)).map_err(err)?;
    to_py(py, &grid)
}

#[pyfunction]
fn drift_report(py: Python<'_>, law: &Law) -> PyResult<Py<PyAny>> {
    to_py(py, &general_walk::drift_report(&law.inner))
}

#[derive(Serialize)]
struct WienerHopfOut {
    mu: Vec<(i64, f64)>,
    exact: Option<Vec<(i64, String)>>,
    remainder: f64,
    validity: general_walk::Validity,
}

/// Symmetric law whose non-strict ladder heights follow `mu0` (a `lat:` law).
#[pyfunction]
#[pyo3(signature = (mu0, n_max = 64))]
fn wiener_hopf_construct(py: Python<'_>, mu0: &Law, n_max: i64) -> PyResult<Py<PyAny>> {
    let out = match mu0.inner.exact_pmf() {
        Some(pmf) => {
            let wh = general_walk::wiener_hopf_construct(&pmf, n_max).map_err(err)?;
            let f = wh.to_f64();
            WienerHopfOut {
                mu: f.mu.iter().map(|(k, p)| (k, *p)).collect(),
                exact: Some(wh.mu.iter().map(|(k, p)| (k, p.to_string())).collect()),
                remainder: f.remainder,
                validity: wh.validity,
            }
        }
        None => {
            let pmf = mu0.inner.pmf(n_max).map_err(err)?;
            let wh = general_walk::wiener_hopf_construct(&pmf, n_max).map_err(err)?;
            WienerHopfOut {
                mu: wh.mu.iter().map(|(k, p)| (k, *p)).collect(),
                exact: None,
                remainder: wh.remainder,
                validity: wh.validity,
            }
        }
    };
    to_py(py, &out)
}

#[derive(Serialize)]
struct LadderOut {
    epochs: u64,
    steps: u64,
    heights: Vec<(i64, f64)>,
    total_variation_to: Option<f64>,
}

/// Empirical non-strict ladder-height law of one classical path; with
/// `target` the total variation distance to that lattice law is reported.
#[pyfunction]
#[pyo3(signature = (law, epochs, seed, stream = 0, target = None))]
fn ladder_height_empirical(
    py: Python<'_>,
    law: &Law,
    epochs: u64,
    seed: u64,
    stream: u64,
    target: Option<&Law>,
) -> PyResult<Py<PyAny>> {
    let est = py
        .detach(|| general_walk::ladder_height_empirical(&law.inner, epochs, SeededStream::new(seed, stream)))
        .map_err(err)?;
    let pmf = est.pmf();
    let tv = match target {
        Some(t) => Some(total_variation(&pmf, &t.inner.pmf(1 << 16).map_err(err)?)),
        None => None,
    };
    let out = LadderOut {
        epochs: est.epochs,
        steps: est.steps,
        heights: pmf.iter().map(|(k, p)| (k, *p)).collect(),
        total_variation_to: tv,
    };
    to_py(py, &out)
}

#[pyfunction]
fn symmetric_abs_equivalence(py: Python<'_>, law: &Law, window: i64) -> PyResult<Py<PyAny>> {
    to_py(py, &general_walk::symmetric_abs_equivalence(&law.inner, window).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (law, x0, steps, seed, stream = 0))]
fn embedded_equivalence(
    py: Python<'_>,
    law: &Law,
    x0: f64,
    steps: usize,
    seed: u64,
    stream: u64,
) -> PyResult<Py<PyAny>> {
    let r = py
        .detach(|| general_walk::embedded_equivalence(&law.inner, x0, steps, SeededStream::new(seed, stream)))
        .map_err(err)?;
    to_py(py, &r)
}

#[pyfunction]
#[pyo3(signature = (law, t_min = 1e-4, t_max = 1e-2, points = 20))]
fn char_slope_diagnostic(py: Python<'_>, law: &Law, t_min: f64, t_max: f64, points: usize) -> PyResult<Py<PyAny>> {
    to_py(py, &general_walk::char_slope_diagnostic(&law.inner, t_min, t_max, points).map_err(err)?)
}

/// `D_n = |X_n - X'_n|` for two paths driven by the same increments.
#[pyfunction]
#[pyo3(signature = (law, x0, y0, steps, seed, stream = 0))]
fn contraction_trace(
    py: Python<'_>,
    law: &Law,
    x0: f64,
    y0: f64,
    steps: u64,
    seed: u64,
    stream: u64,
) -> PyResult<Py<PyAny>> {
    let t = py
        .detach(|| contractivity::contraction_trace(&law.inner, x0, y0, steps, SeededStream::new(seed, stream)))
        .map_err(err)?;
    to_py(py, &t)
}

#[pyfunction]
#[pyo3(signature = (law, x0, steps, seed, burn_in = 0, bins = 100, x_max = 10.0, stream = 0))]
#[allow(clippy::too_many_arguments)]
fn attractor_estimate(
    py: Python<'_>,
    law: &Law,
    x0: f64,
    steps: u64,
    seed: u64,
    burn_in: u64,
    bins: usize,
    x_max: f64,
    stream: u64,
) -> PyResult<Py<PyAny>> {
    let a = py
        .detach(|| {
            contractivity::attractor_estimate(
                &law.inner,
                x0,
                steps,
                burn_in,
                bins,
                x_max,
                SeededStream::new(seed, stream),
            )
        })
        .map_err(err)?;
    to_py(py, &a)
}

#[pyfunction]
#[pyo3(signature = (law, x0, steps, paths, seed, escape_level = None))]
fn transience_vote(
    py: Python<'_>,
    law: &Law,
    x0: f64,
    steps: u64,
    paths: u64,
    seed: u64,
    escape_level: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let level = escape_level.unwrap_or_else(|| default_escape_threshold(&law.inner));
    let v = py.detach(|| contractivity::transience_vote(&law.inner, x0, steps, paths, level, seed)).map_err(err)?;
    to_py(py, &v)
}

#[pymodule]
#[pyo3(name = "reflectlab")]
fn reflectlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", reflectlab::VERSION)?;
    m.add_class::<Law>()?;
    m.add_function(wrap_pyfunction!(sample_path, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble_run, m)?)?;
    m.add_function(wrap_pyfunction!(renewal_sequence, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_table, m)?)?;
    m.add_function(wrap_pyfunction!(quadratic_tail, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(density_grid, m)?)?;
    m.add_function(wrap_pyfunction!(drift_report, m)?)?;
    m.add_function(wrap_pyfunction!(wiener_hopf_construct, m)?)?;
    m.add_function(wrap_pyfunction!(ladder_height_empirical, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_abs_equivalence, m)?)?;
    m.add_function(wrap_pyfunction!(embedded_equivalence, m)?)?;
    m.add_function(wrap_pyfunction!(char_slope_diagnostic, m)?)?;
    m.add_function(wrap_pyfunction!(contraction_trace, m)?)?;
    m.add_function(wrap_pyfunction!(attractor_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(transience_vote, m)?)?;
    Ok(())
}
