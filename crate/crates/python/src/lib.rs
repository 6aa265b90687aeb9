//! Python bindings for `cutoff-core`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use cutoff_core::cli::token_id;
use cutoff_core::delphic::{CuboidSet, GeometricMode, Point, RangeSet};
use cutoff_core::harness::{monte_carlo, Experiment};
use cutoff_core::score::{map_g as core_map_g, Truncation};
use cutoff_core::sizing::{binomial_tail_lower, binomial_tail_upper, SizingParams, SizingVariant};
use cutoff_core::{Error, ScoreDistribution, Status, Variant};

fn value_error(e: Error) -> PyErr {
    match e {
        Error::Aborted => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn status_name(status: Status) -> &'static str {
    match status {
        Status::Running => "running",
        Status::Aborted => "aborted",
    }
}

/// A sketch over a stream of integers or strings.
#[pyclass(module = "cutoff_py")]
struct Sketch {
    inner: cutoff_core::Sketch<u64>,
    variant: Variant,
}

#[pymethods]
impl Sketch {
    #[new]
    #[pyo3(signature = (variant, s, seed = 0, instance = 0))]
    fn new(variant: &str, s: usize, seed: u64, instance: u64) -> PyResult<Self> {
        let variant: Variant = variant.parse().map_err(value_error)?;
        let config = variant.config(s).map_err(value_error)?;
        Ok(Sketch {
            inner: cutoff_core::Sketch::new(config, seed, instance),
            variant,
        })
    }

    /// Processes one integer element; returns the status.
    fn add(&mut self, element: u64) -> PyResult<&'static str> {
        self.inner
            .process(element)
            .map(status_name)
            .map_err(value_error)
    }

    /// Processes a string token, hashed as the command line does.
    fn add_str(&mut self, token: &str) -> PyResult<&'static str> {
        self.add(token_id(token))
    }

    fn extend(&mut self, elements: Vec<u64>) -> PyResult<&'static str> {
        for a in elements {
            if self.inner.process(a).map_err(value_error)? == Status::Aborted {
                break;
            }
        }
        Ok(status_name(self.inner.status()))
    }

    /// The current estimate, or None after an abort. `n` and `m` default to
    /// the number of processed elements.
    #[pyo3(signature = (n = None, m = None))]
    fn estimate(&self, n: Option<u64>, m: Option<u64>) -> Option<f64> {
        let m = m.unwrap_or(self.inner.steps()).max(1);
        self.inner.report(n.unwrap_or(m).max(1), m).estimate
    }

    #[getter]
    fn cutoff(&self) -> f64 {
        self.inner.cutoff().value()
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.list().len()
    }

    #[getter]
    fn steps(&self) -> u64 {
        self.inner.steps()
    }

    #[getter]
    fn status(&self) -> &'static str {
        status_name(self.inner.status())
    }

    #[getter]
    fn refusals(&self) -> u64 {
        self.inner.refusals()
    }

    #[getter]
    fn variant(&self) -> String {
        self.variant.to_string()
    }

    /// `(element, stored value)` pairs in element order.
    fn entries(&self) -> Vec<(u64, f64)> {
        self.inner
            .list()
            .iter()
            .map(|(k, s)| (*k, s.value()))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Sketch(variant={:?}, s={}, size={}, cutoff={})",
            self.variant.to_string(),
            self.inner.config().bucket_limit,
            self.inner.list().len(),
            self.inner.cutoff()
        )
    }
}

/// A sketch over a stream of ranges and cuboids.
#[pyclass(module = "cutoff_py")]
struct SetSketch {
    inner: cutoff_core::Sketch<Point>,
    mode: GeometricMode,
}

#[pymethods]
impl SetSketch {
    #[new]
    #[pyo3(signature = (s, seed = 0, debug = false))]
    fn new(s: usize, seed: u64, debug: bool) -> PyResult<Self> {
        let config = Variant::Cvm2Refuse.config(s).map_err(value_error)?;
        Ok(SetSketch {
            inner: cutoff_core::Sketch::new(config, seed, 0),
            mode: if debug {
                GeometricMode::Debug
            } else {
                GeometricMode::Fast
            },
        })
    }

    fn add_range(&mut self, lo: u64, hi: u64) -> PyResult<()> {
        let set = RangeSet::new(lo, hi).map_err(value_error)?;
        self.inner
            .process_set(&set, self.mode)
            .map(|_| ())
            .map_err(value_error)
    }

    fn add_cuboid(&mut self, sides: Vec<(u64, u64)>) -> PyResult<()> {
        let set = CuboidSet::new(sides).map_err(value_error)?;
        self.inner
            .process_set(&set, self.mode)
            .map(|_| ())
            .map_err(value_error)
    }

    fn estimate(&self) -> f64 {
        self.inner
            .report(u64::MAX, u64::MAX)
            .estimate
            .unwrap_or(f64::NAN)
    }

    #[getter]
    fn cutoff(&self) -> f64 {
        self.inner.cutoff().value()
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.list().len()
    }
}

fn parse_distribution(name: &str) -> PyResult<ScoreDistribution> {
    let (kind, param) = match name.split_once(':') {
        Some((k, p)) => (
            k,
            Some(
                p.parse::<u32>()
                    .map_err(|_| PyValueError::new_err(format!("bad parameter in {name:?}")))?,
            ),
        ),
        None => (name, None),
    };
    let dist = match (kind, param) {
        ("uniform", None) => ScoreDistribution::ContinuousUniform,
        ("uniform", Some(bits)) => ScoreDistribution::DiscreteUniform { bits },
        ("geo", None) => ScoreDistribution::GeoLikeInfinite,
        ("geo", Some(truncation)) => ScoreDistribution::GeoLikeFinite { truncation },
        _ => {
            return Err(PyValueError::new_err(format!(
                "unknown distribution {name:?}; expected uniform[:bits] or geo[:N]"
            )))
        }
    };
    dist.validate().map_err(value_error)
}

/// The dyadic bucket of `x`; `truncation=None` maps onto all powers of 1/2.
#[pyfunction]
#[pyo3(signature = (x, truncation = None))]
fn map_g(x: f64, truncation: Option<u32>) -> PyResult<f64> {
    let t = truncation.map_or(Truncation::Infinite, Truncation::Finite);
    core_map_g(x, t).map(|s| s.value()).map_err(value_error)
}

/// `D([0, p))` for `uniform`, `uniform:BITS`, `geo` or `geo:N`.
#[pyfunction]
fn cdf_below(distribution: &str, p: f64) -> PyResult<f64> {
    let dist = parse_distribution(distribution)?;
    let p = cutoff_core::Score::new(p).map_err(value_error)?;
    Ok(dist.cdf_below(p))
}

/// The bucket limit for a sketch variant or `tracking`.
#[pyfunction]
#[pyo3(signature = (variant, epsilon, delta, m, n = None))]
fn bucket_limit(
    variant: &str,
    epsilon: f64,
    delta: f64,
    m: u64,
    n: Option<u64>,
) -> PyResult<usize> {
    let sizing = match variant.parse::<Variant>() {
        Ok(v) => v.sizing_variant(),
        Err(_) => variant.parse::<SizingVariant>().map_err(value_error)?,
    };
    let params =
        SizingParams::new(sizing, epsilon, delta, m, n.unwrap_or(m)).map_err(value_error)?;
    cutoff_core::bucket_limit(&params)
        .map(|r| r.s)
        .map_err(value_error)
}

/// Exact binomial tails next to their exponential bounds.
#[pyfunction]
fn binomial_tails<'py>(py: Python<'py>, n: u64, p: f64, eps: f64) -> PyResult<Bound<'py, PyDict>> {
    let up = binomial_tail_upper(n, p, eps).map_err(value_error)?;
    let lo = binomial_tail_lower(n, p, eps).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("upper_exact", up.exact)?;
    d.set_item("upper_bound", up.bound)?;
    d.set_item("lower_exact", lo.exact)?;
    d.set_item("lower_bound", lo.bound)?;
    Ok(d)
}

#[pyfunction]
fn exact_f0(stream: Vec<u64>) -> u64 {
    cutoff_core::harness::exact_f0(&stream)
}

/// Runs a Monte Carlo experiment from TOML text.
#[pyfunction]
fn simulate<'py>(py: Python<'py>, config: &str) -> PyResult<Bound<'py, PyDict>> {
    let experiment: Experiment =
        toml::from_str(config).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let r = monte_carlo(&experiment).map_err(value_error)?;
    let d = PyDict::new(py);
    d.set_item("trials", r.trials)?;
    d.set_item("completed", r.completed)?;
    d.set_item("s", r.s)?;
    d.set_item("f0", r.f0)?;
    d.set_item("mean_estimate", r.mean_estimate)?;
    d.set_item("standard_error", r.standard_error)?;
    d.set_item("empirical_bias", r.empirical_bias)?;
    d.set_item("failure_rate", r.failure_rate)?;
    d.set_item("abort_rate", r.abort_rate)?;
    d.set_item("p_small_rate", r.p_small_rate)?;
    d.set_item("p0", r.p0)?;
    Ok(d)
}

#[pymodule]
fn cutoff_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Sketch>()?;
    m.add_class::<SetSketch>()?;
    m.add_function(wrap_pyfunction!(map_g, m)?)?;
    m.add_function(wrap_pyfunction!(cdf_below, m)?)?;
    m.add_function(wrap_pyfunction!(bucket_limit, m)?)?;
    m.add_function(wrap_pyfunction!(binomial_tails, m)?)?;
    m.add_function(wrap_pyfunction!(exact_f0, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
