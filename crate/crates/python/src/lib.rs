//! Python bindings: estimators, bootstrap and permutation bands, simulation
//! and GARCH devolatilization over plain lists of floats.

use extremogram as ex;
use extremogram::{ExtremalEvents, Family, Tail, ThresholdSpec, TimeSeries};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(extremogram_py, ExtremogramError, PyException);
create_exception!(extremogram_py, NoExceedancesError, ExtremogramError);
create_exception!(extremogram_py, UnstableResampleError, ExtremogramError);
create_exception!(extremogram_py, FitDivergedError, ExtremogramError);

fn to_py(e: ex::Error) -> PyErr {
    let msg = e.to_string();
    match e {
        ex::Error::InvalidInput(_) | ex::Error::DegenerateThreshold => PyValueError::new_err(msg),
        ex::Error::NoExceedances { .. } => NoExceedancesError::new_err(msg),
        ex::Error::UnstableResample { .. } => UnstableResampleError::new_err(msg),
        ex::Error::FitDiverged { .. } => FitDivergedError::new_err(msg),
        ex::Error::InvalidState(_) => ExtremogramError::new_err(msg),
    }
}

fn series(values: Vec<f64>) -> PyResult<TimeSeries> {
    TimeSeries::new(values).map_err(to_py)
}

fn parse_tail(tail: &str) -> PyResult<Tail> {
    match tail {
        "upper" => Ok(Tail::Upper),
        "lower" => Ok(Tail::Lower),
        "two_sided" | "two-sided" => Ok(Tail::TwoSided),
        other => Err(PyValueError::new_err(format!(
            "tail must be 'upper', 'lower' or 'two_sided', got '{other}'"
        ))),
    }
}

fn parse_family(family: &str) -> PyResult<Family> {
    match family {
        "univariate" => Ok(Family::Univariate),
        "cross" => Ok(Family::Cross),
        "tri_target" => Ok(Family::TriUnionTarget),
        "tri_source" => Ok(Family::TriUnionSource),
        "return_times" => Ok(Family::ReturnTimes),
        other => Err(PyValueError::new_err(format!(
            "unknown family '{other}'; expected univariate, cross, tri_target, tri_source or return_times"
        ))),
    }
}

fn threshold_spec(q: f64, tail: &str, threshold: Option<f64>) -> PyResult<ThresholdSpec> {
    let tail = parse_tail(tail)?;
    match threshold {
        Some(a) => ThresholdSpec::fixed(tail, a),
        None => ThresholdSpec::new(q, tail),
    }
    .map_err(to_py)
}

/// Events for `family` over `data` (one to three series), every series tested
/// against the tail region of the shared threshold spec.
fn events(family: Family, data: Vec<Vec<f64>>, spec: &ThresholdSpec) -> PyResult<ExtremalEvents> {
    let needed = match family {
        Family::Univariate | Family::ReturnTimes => 1,
        Family::Cross => 2,
        Family::TriUnionTarget | Family::TriUnionSource => 3,
    };
    if data.len() != needed {
        return Err(PyValueError::new_err(format!(
            "{family} needs {needed} series, got {}",
            data.len()
        )));
    }
    let s: Vec<TimeSeries> = data.into_iter().map(series).collect::<PyResult<_>>()?;
    let r = spec.region();
    match family {
        Family::Univariate => ExtremalEvents::univariate(&s[0], &r, &r, spec),
        Family::Cross => ExtremalEvents::cross(&s[0], &s[1], &r, &r, spec, spec),
        Family::ReturnTimes => ExtremalEvents::return_times(&s[0], &r, spec),
        _ => ExtremalEvents::trivariate(family, &s[0], &s[1], &s[2], [spec, spec, spec]),
    }
    .map_err(to_py)
}

/// Point estimates with the counts behind them.
#[pyclass(get_all, frozen, module = "extremogram_py")]
pub struct Estimate {
    family: String,
    n: usize,
    lags: Vec<usize>,
    estimates: Vec<f64>,
    numerators: Vec<usize>,
    denominator_count: usize,
    /// Resolved threshold per series.
    thresholds: Vec<Option<f64>>,
    exceedances: Vec<Option<usize>>,
}

impl From<ex::ExtremogramEstimate> for Estimate {
    fn from(e: ex::ExtremogramEstimate) -> Self {
        Self {
            family: e.family.to_string(),
            n: e.n,
            thresholds: e.thresholds.iter().map(ThresholdSpec::threshold).collect(),
            exceedances: e.thresholds.iter().map(ThresholdSpec::exceedances).collect(),
            lags: e.lags,
            estimates: e.estimates,
            numerators: e.numerators,
            denominator_count: e.denominator_count,
        }
    }
}

#[pymethods]
impl Estimate {
    fn __len__(&self) -> usize {
        self.lags.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Estimate(family='{}', n={}, lags={}..={}, events={})",
            self.family,
            self.n,
            self.lags.first().unwrap_or(&0),
            self.lags.last().unwrap_or(&0),
            self.denominator_count
        )
    }
}

#[pyclass(get_all, frozen, module = "extremogram_py")]
pub struct BootstrapBands {
    lags: Vec<usize>,
    estimates: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    replicate_mean: Vec<f64>,
    skipped: usize,
    skip_rate: f64,
}

#[pyclass(get_all, frozen, module = "extremogram_py")]
pub struct PermutationBands {
    lag: usize,
    lower: f64,
    upper: f64,
    values: Vec<f64>,
}

#[pymethods]
impl PermutationBands {
    fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

#[pyclass(get_all, frozen, module = "extremogram_py")]
pub struct GarchFit {
    omega: f64,
    alpha: f64,
    beta: f64,
    sigma: Vec<f64>,
    residuals: Vec<f64>,
    log_likelihood: f64,
    iterations: usize,
    gradient_norm: f64,
}

#[pyfunction]
#[pyo3(signature = (x, q = 0.96, tail = "upper", max_lag = 40, threshold = None))]
fn sample_extremogram(x: Vec<f64>, q: f64, tail: &str, max_lag: usize, threshold: Option<f64>) -> PyResult<Estimate> {
    let spec = threshold_spec(q, tail, threshold)?;
    let ev = events(Family::Univariate, vec![x], &spec)?;
    Ok(ev.estimate(max_lag).map_err(to_py)?.into())
}

/// Conditions on `x` and responds in `y`.
#[pyfunction]
#[pyo3(signature = (x, y, q = 0.96, tail = "upper", max_lag = 40, threshold = None))]
fn cross_extremogram(
    x: Vec<f64>,
    y: Vec<f64>,
    q: f64,
    tail: &str,
    max_lag: usize,
    threshold: Option<f64>,
) -> PyResult<Estimate> {
    let spec = threshold_spec(q, tail, threshold)?;
    let ev = events(Family::Cross, vec![x, y], &spec)?;
    Ok(ev.estimate(max_lag).map_err(to_py)?.into())
}

/// `variant="target"`: Y or Z extreme after X; `"source"`: Z extreme after X or Y.
#[pyfunction]
#[pyo3(signature = (x, y, z, variant = "target", q = 0.96, tail = "upper", max_lag = 40))]
fn tri_extremogram(
    x: Vec<f64>,
    y: Vec<f64>,
    z: Vec<f64>,
    variant: &str,
    q: f64,
    tail: &str,
    max_lag: usize,
) -> PyResult<Estimate> {
    let family = match variant {
        "target" => Family::TriUnionTarget,
        "source" => Family::TriUnionSource,
        other => return Err(PyValueError::new_err(format!("variant must be 'target' or 'source', got '{other}'"))),
    };
    let spec = threshold_spec(q, tail, None)?;
    let ev = events(family, vec![x, y, z], &spec)?;
    Ok(ev.estimate(max_lag).map_err(to_py)?.into())
}

/// Return-times histogram and the geometric reference probability.
#[pyfunction]
#[pyo3(signature = (x, q = 0.96, tail = "upper", max_lag = 40, threshold = None))]
fn return_times(x: Vec<f64>, q: f64, tail: &str, max_lag: usize, threshold: Option<f64>) -> PyResult<(Estimate, f64)> {
    let spec = threshold_spec(q, tail, threshold)?;
    let s = series(x)?;
    let h = ex::return_times_extremogram(&s, &spec.region(), &spec, max_lag).map_err(to_py)?;
    Ok((h.estimate.into(), h.reference_p))
}

/// Stationary-bootstrap bands; `series` holds the one to three inputs of `family`.
#[pyfunction]
#[pyo3(signature = (
    series, family = "univariate", q = 0.96, tail = "upper", max_lag = 40,
    mean_block_size = 100.0, replicates = 10_000, method = "centered", scheme = "joint", seed = 0
))]
#[allow(clippy::too_many_arguments)]
fn bootstrap_bands(
    py: Python<'_>,
    series: Vec<Vec<f64>>,
    family: &str,
    q: f64,
    tail: &str,
    max_lag: usize,
    mean_block_size: f64,
    replicates: usize,
    method: &str,
    scheme: &str,
    seed: u64,
) -> PyResult<BootstrapBands> {
    let spec = threshold_spec(q, tail, None)?;
    let ev = events(parse_family(family)?, series, &spec)?;
    let config = ex::BootstrapConfig {
        mean_block_size,
        replicates,
        method: match method {
            "centered" => ex::BandMethod::Centered,
            "quantile" => ex::BandMethod::QuantileOfReplicates,
            other => return Err(PyValueError::new_err(format!("method must be 'centered' or 'quantile', got '{other}'"))),
        },
        scheme: match scheme {
            "joint" => ex::ResampleScheme::JointIndicators,
            "channels" => ex::ResampleScheme::Channels,
            other => return Err(PyValueError::new_err(format!("scheme must be 'joint' or 'channels', got '{other}'"))),
        },
        seed,
        ..Default::default()
    };
    let b = py
        .detach(|| ex::bootstrap_bands(&ev, max_lag, &config))
        .map_err(to_py)?;
    Ok(BootstrapBands {
        skip_rate: b.skip_rate(),
        skipped: b.skipped,
        lags: b.lags,
        estimates: b.estimates,
        lower: b.lower,
        upper: b.upper,
        replicate_mean: b.replicate_mean,
    })
}

#[pyfunction]
#[pyo3(signature = (series, family = "univariate", q = 0.96, tail = "upper", n_perm = 99, lag = 1, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn permutation_bands(
    py: Python<'_>,
    series: Vec<Vec<f64>>,
    family: &str,
    q: f64,
    tail: &str,
    n_perm: usize,
    lag: usize,
    seed: u64,
) -> PyResult<PermutationBands> {
    let spec = threshold_spec(q, tail, None)?;
    let ev = events(parse_family(family)?, series, &spec)?;
    let p = py
        .detach(|| ex::resample::permutation_bands_at(&ev, lag, n_perm, seed))
        .map_err(to_py)?;
    Ok(PermutationBands {
        lag: p.lag,
        lower: p.lower,
        upper: p.upper,
        values: p.values,
    })
}

/// Closed-form bootstrap variance of the sample mean of an indicator sequence.
#[pyfunction]
fn bootstrap_variance(indicators: Vec<bool>, p: f64) -> PyResult<f64> {
    ex::bootstrap_variance_s2(&indicators, p).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n, omega = 0.1, alpha = 0.14, beta = 0.84, dof = Some(4.0), standardize = true, burn_in = 2000, seed = 0))]
#[allow(clippy::too_many_arguments)]
fn simulate_garch(
    n: usize,
    omega: f64,
    alpha: f64,
    beta: f64,
    dof: Option<f64>,
    standardize: bool,
    burn_in: usize,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let params = ex::GarchParams {
        omega,
        alpha,
        beta,
        innovation_dof: dof,
        standardize_innovations: standardize,
    };
    Ok(ex::simulate_garch(&params, n, burn_in, seed).map_err(to_py)?.into_values())
}

#[pyfunction]
#[pyo3(signature = (n, phi = 0.9, vol_sd = 1.0, dof = Some(2.6), standardize = false, burn_in = 2000, seed = 0))]
fn simulate_sv(
    n: usize,
    phi: f64,
    vol_sd: f64,
    dof: Option<f64>,
    standardize: bool,
    burn_in: usize,
    seed: u64,
) -> PyResult<Vec<f64>> {
    let params = ex::SvParams {
        ar_coefficient: phi,
        innovation_dof: dof,
        log_vol_noise_sd: vol_sd,
        standardize_innovations: standardize,
    };
    Ok(ex::simulate_sv(&params, n, burn_in, seed).map_err(to_py)?.into_values())
}

#[pyfunction]
fn fit_garch(py: Python<'_>, x: Vec<f64>) -> PyResult<GarchFit> {
    let s = series(x)?;
    let fit = py.detach(|| ex::fit_garch_qmle(&s, None)).map_err(to_py)?;
    Ok(GarchFit {
        omega: fit.params.omega,
        alpha: fit.params.alpha,
        beta: fit.params.beta,
        sigma: fit.sigma,
        residuals: fit.residuals.into_values(),
        log_likelihood: fit.report.log_likelihood,
        iterations: fit.report.iterations,
        gradient_norm: fit.report.gradient_norm,
    })
}

#[pyfunction]
fn devolatilize(py: Python<'_>, x: Vec<f64>) -> PyResult<Vec<f64>> {
    let s = series(x)?;
    Ok(py.detach(|| ex::devolatilize(&s)).map_err(to_py)?.into_values())
}

#[pyfunction]
fn log_returns(prices: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(ex::log_returns(&series(prices)?).map_err(to_py)?.into_values())
}

#[pyfunction]
#[pyo3(signature = (x, q, tail = "upper"))]
fn threshold(x: Vec<f64>, q: f64, tail: &str) -> PyResult<f64> {
    let spec = threshold_spec(q, tail, None)?.resolve(&series(x)?).map_err(to_py)?;
    Ok(spec.threshold().expect("resolved"))
}

#[pymodule]
fn extremogram_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    let py = m.py();
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("ExtremogramError", py.get_type::<ExtremogramError>())?;
    m.add("NoExceedancesError", py.get_type::<NoExceedancesError>())?;
    m.add("UnstableResampleError", py.get_type::<UnstableResampleError>())?;
    m.add("FitDivergedError", py.get_type::<FitDivergedError>())?;
    m.add_class::<Estimate>()?;
    m.add_class::<BootstrapBands>()?;
    m.add_class::<PermutationBands>()?;
    m.add_class::<GarchFit>()?;
    m.add_function(wrap_pyfunction!(sample_extremogram, m)?)?;
    m.add_function(wrap_pyfunction!(cross_extremogram, m)?)?;
    m.add_function(wrap_pyfunction!(tri_extremogram, m)?)?;
    m.add_function(wrap_pyfunction!(return_times, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_bands, m)?)?;
    m.add_function(wrap_pyfunction!(permutation_bands, m)?)?;
    m.add_function(wrap_pyfunction!(bootstrap_variance, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_garch, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_sv, m)?)?;
    m.add_function(wrap_pyfunction!(fit_garch, m)?)?;
    m.add_function(wrap_pyfunction!(devolatilize, m)?)?;
    m.add_function(wrap_pyfunction!(log_returns, m)?)?;
    m.add_function(wrap_pyfunction!(threshold, m)?)?;
    Ok(())
}
