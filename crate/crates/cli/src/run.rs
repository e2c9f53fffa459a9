//! Subcommand orchestration: configuration, analysis and document assembly.

use extremogram::{
    bootstrap_bands, fit_garch_qmle, permutation_bands, simulate_garch, simulate_sv, BandMethod,
    BootstrapBands, BootstrapConfig, ExtremalEvents, Family, GarchParams, PermutationBands,
    ResampleScheme, SvParams, Tail, ThresholdSpec, TimeSeries, VolatilityDecomposition,
};
use serde_json::{json, Value};

use crate::args::{
    BandMethodArg, Cli, Command, EstimateArgs, FitArgs, InputArgs, Model, ReturnsMode, SchemeArg,
    SimulateArgs, TailArg, TriVariant,
};
use crate::document::{emit, ResultDocument};
use crate::error::{CliError, Result};
use crate::ingest::load_series;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const ESTIMATE_COLUMNS: &[&str] = &[
    "lag",
    "estimate",
    "lower",
    "upper",
    "replicate_mean",
    "reference",
    "perm_lower",
    "perm_upper",
];

const RETURN_TIME_COLUMNS: &[&str] = &[
    "lag",
    "estimate",
    "lower",
    "upper",
    "replicate_mean",
    "reference",
    "count",
];

/// Runs one command and writes its document.
pub fn run(cli: Cli) -> Result<()> {
    let (doc, output) = match &cli.command {
        Command::Extremogram(a) => (estimate(a, Family::Univariate)?, &a.output),
        Command::Cross(a) => (estimate(a, Family::Cross)?, &a.output),
        Command::Tri(t) => {
            let family = match t.variant {
                TriVariant::Target => Family::TriUnionTarget,
                TriVariant::Source => Family::TriUnionSource,
            };
            (estimate(&t.estimate, family)?, &t.estimate.output)
        }
        Command::Returntimes(a) => (return_times(a)?, &a.output),
        Command::Simulate(a) => (simulate(a)?, &a.output),
        Command::FitGarch(a) => (fit(a, false)?, &a.output),
        Command::Devol(a) => (fit(a, true)?, &a.output),
    };
    emit(&doc.render(output.format)?, output.output.as_deref())
}

fn tail_of(t: TailArg) -> Tail {
    match t {
        TailArg::Upper => Tail::Upper,
        TailArg::Lower => Tail::Lower,
        TailArg::TwoSided => Tail::TwoSided,
    }
}

fn command_name(family: Family) -> &'static str {
    match family {
        Family::Univariate => "extremogram",
        Family::Cross => "cross",
        Family::TriUnionTarget | Family::TriUnionSource => "tri",
        Family::ReturnTimes => "returntimes",
    }
}

fn series_count(family: Family) -> usize {
    match family {
        Family::Univariate | Family::ReturnTimes => 1,
        Family::Cross => 2,
        Family::TriUnionTarget | Family::TriUnionSource => 3,
    }
}

fn input_metadata(doc: &mut ResultDocument, input: &InputArgs) {
    doc.meta("inputs", json!(input.inputs));
    doc.meta("columns", json!(input.columns));
    doc.meta("date_column", json!(input.date_column));
    doc.meta("no_header", input.no_header);
    doc.meta(
        "returns",
        match input.returns {
            ReturnsMode::Raw => "raw",
            ReturnsMode::Log => "log",
        },
    );
}

fn check_estimate_args(a: &EstimateArgs) -> Result<()> {
    if a.lags < 1 {
        return Err(CliError::input("--lags must be at least 1"));
    }
    if !(a.block_size >= 1.0 && a.block_size.is_finite()) {
        return Err(CliError::input("--block-size must be a finite number >= 1"));
    }
    if !a.no_bootstrap && a.replicates < 100 {
        return Err(CliError::input("--replicates must be at least 100"));
    }
    Ok(())
}

fn threshold_spec(a: &EstimateArgs) -> Result<ThresholdSpec> {
    let tail = tail_of(a.tail);
    Ok(match a.threshold {
        Some(t) => ThresholdSpec::fixed(tail, t)?,
        None => ThresholdSpec::new(a.q, tail)?,
    })
}

fn bootstrap_config(a: &EstimateArgs) -> BootstrapConfig {
    BootstrapConfig {
        mean_block_size: a.block_size,
        replicates: a.replicates,
        method: match a.band_method {
            BandMethodArg::Centered => BandMethod::Centered,
            BandMethodArg::Quantile => BandMethod::QuantileOfReplicates,
        },
        scheme: match a.scheme {
            SchemeArg::Joint => ResampleScheme::JointIndicators,
            SchemeArg::Channels => ResampleScheme::Channels,
        },
        seed: a.seed,
        ..Default::default()
    }
}

fn estimate_metadata(doc: &mut ResultDocument, a: &EstimateArgs, family: Family) {
    doc.meta("command", command_name(family));
    doc.meta("family", family.to_string());
    doc.meta("version", VERSION);
    input_metadata(doc, &a.input);
    doc.meta("tail", tail_of(a.tail).to_string());
    doc.meta("q", if a.threshold.is_some() { Value::Null } else { json!(a.q) });
    doc.meta("threshold", json!(a.threshold));
    doc.meta("lags", a.lags);
    doc.meta("bootstrap", !a.no_bootstrap);
    doc.meta("block_size", a.block_size);
    doc.meta("replicates", a.replicates);
    doc.meta(
        "band_method",
        match a.band_method {
            BandMethodArg::Centered => "centered",
            BandMethodArg::Quantile => "quantile",
        },
    );
    doc.meta(
        "scheme",
        match a.scheme {
            SchemeArg::Joint => "joint",
            SchemeArg::Channels => "channels",
        },
    );
    doc.meta("seed", a.seed);
}

/// Resolved threshold and exceedance count for each input series.
fn series_metadata(doc: &mut ResultDocument, names: &[String], events: &ExtremalEvents) {
    let per_series: Vec<Value> = names
        .iter()
        .zip(events.thresholds())
        .map(|(name, spec)| {
            json!({
                "name": name,
                "threshold": spec.threshold(),
                "exceedances": spec.exceedances(),
            })
        })
        .collect();
    doc.meta("n", events.len());
    doc.meta("series", Value::Array(per_series));
}

/// Exceedance rate of one series: `1 - q`, or `m / n` for a fixed threshold.
fn rate(spec: &ThresholdSpec, n: usize) -> f64 {
    spec.nominal_rate()
        .unwrap_or_else(|| spec.exceedances().unwrap_or(0) as f64 / n as f64)
}

/// Value of the estimator when the response is independent of the condition.
fn independence_reference(events: &ExtremalEvents) -> f64 {
    let n = events.len();
    let r: Vec<f64> = events.thresholds().iter().map(|s| rate(s, n)).collect();
    match events.family() {
        Family::Univariate | Family::ReturnTimes => r[0],
        Family::Cross => r[1],
        Family::TriUnionTarget => 1.0 - (1.0 - r[1]) * (1.0 - r[2]),
        Family::TriUnionSource => r[2],
    }
}

fn build_events(family: Family, series: &[TimeSeries], spec: &ThresholdSpec) -> Result<ExtremalEvents> {
    let region = spec.region();
    Ok(match family {
        Family::Univariate => ExtremalEvents::univariate(&series[0], &region, &region, spec)?,
        Family::Cross => {
            ExtremalEvents::cross(&series[0], &series[1], &region, &region, spec, spec)?
        }
        Family::TriUnionTarget | Family::TriUnionSource => ExtremalEvents::trivariate(
            family,
            &series[0],
            &series[1],
            &series[2],
            [spec, spec, spec],
        )?,
        Family::ReturnTimes => ExtremalEvents::return_times(&series[0], &region, spec)?,
    })
}

fn bands_metadata(doc: &mut ResultDocument, bands: Option<&BootstrapBands>) {
    doc.meta("skip_rate", json!(bands.map(BootstrapBands::skip_rate)));
    doc.meta("skipped_replicates", json!(bands.map(|b| b.skipped)));
}

fn estimate(a: &EstimateArgs, family: Family) -> Result<ResultDocument> {
    check_estimate_args(a)?;
    let spec = threshold_spec(a)?;
    let (names, series): (Vec<String>, Vec<TimeSeries>) =
        load_series(&a.input, series_count(family))?.into_iter().unzip();
    let events = build_events(family, &series, &spec)?;
    let est = events.estimate(a.lags)?;
    let bands = (!a.no_bootstrap)
        .then(|| bootstrap_bands(&events, a.lags, &bootstrap_config(a)))
        .transpose()?;
    let perm: Option<PermutationBands> = (a.permutations > 0)
        .then(|| permutation_bands(&events, a.permutations, a.seed))
        .transpose()?;
    let reference = independence_reference(&events);

    let mut doc = ResultDocument::new(ESTIMATE_COLUMNS);
    estimate_metadata(&mut doc, a, family);
    doc.meta("permutations", a.permutations);
    doc.meta("permutation_lag", 1);
    series_metadata(&mut doc, &names, &events);
    doc.meta("denominator_count", est.denominator_count);
    bands_metadata(&mut doc, bands.as_ref());
    doc.meta("reference", reference);
    for (k, &lag) in est.lags.iter().enumerate() {
        doc.push_row(vec![
            lag.into(),
            est.estimates[k].into(),
            bands.as_ref().map(|b| b.lower[k]).into(),
            bands.as_ref().map(|b| b.upper[k]).into(),
            bands.as_ref().map(|b| b.replicate_mean[k]).into(),
            reference.into(),
            perm.as_ref().map(|p| p.lower).into(),
            perm.as_ref().map(|p| p.upper).into(),
        ]);
    }
    Ok(doc)
}

fn return_times(a: &EstimateArgs) -> Result<ResultDocument> {
    check_estimate_args(a)?;
    let spec = threshold_spec(a)?;
    let (names, series): (Vec<String>, Vec<TimeSeries>) =
        load_series(&a.input, 1)?.into_iter().unzip();
    let region = spec.region();
    let hist = extremogram::return_times_extremogram(&series[0], &region, &spec, a.lags)?;
    let events = ExtremalEvents::return_times(&series[0], &region, &spec)?;
    let bands = (!a.no_bootstrap)
        .then(|| bootstrap_bands(&events, a.lags, &bootstrap_config(a)))
        .transpose()?;

    let mut doc = ResultDocument::new(RETURN_TIME_COLUMNS);
    estimate_metadata(&mut doc, a, Family::ReturnTimes);
    series_metadata(&mut doc, &names, &events);
    doc.meta("denominator_count", hist.total());
    bands_metadata(&mut doc, bands.as_ref());
    doc.meta("geometric_p", hist.reference_p);
    let est = &hist.estimate;
    for (k, &lag) in est.lags.iter().enumerate() {
        doc.push_row(vec![
            lag.into(),
            est.estimates[k].into(),
            bands.as_ref().map(|b| b.lower[k]).into(),
            bands.as_ref().map(|b| b.upper[k]).into(),
            bands.as_ref().map(|b| b.replicate_mean[k]).into(),
            hist.geometric_pmf(lag).into(),
            est.numerators[k].into(),
        ]);
    }
    Ok(doc)
}

fn simulate(a: &SimulateArgs) -> Result<ResultDocument> {
    let mut doc = ResultDocument::new(&["t", "x"]);
    doc.meta("command", "simulate");
    doc.meta("version", VERSION);
    doc.meta("seed", a.seed);
    doc.meta("n", a.n);
    doc.meta("burn_in", a.burn_in);
    let x = match a.model {
        Model::Garch => {
            let params = GarchParams {
                omega: a.omega,
                alpha: a.alpha,
                beta: a.beta,
                innovation_dof: if a.gaussian { None } else { Some(a.dof.unwrap_or(4.0)) },
                standardize_innovations: a.standardize.unwrap_or(true),
            };
            doc.meta("model", "garch");
            doc.meta("omega", params.omega);
            doc.meta("alpha", params.alpha);
            doc.meta("beta", params.beta);
            doc.meta("innovation_dof", json!(params.innovation_dof));
            doc.meta("standardize", params.standardize_innovations);
            simulate_garch(&params, a.n, a.burn_in, a.seed)?
        }
        Model::Sv => {
            let params = SvParams {
                ar_coefficient: a.phi,
                innovation_dof: if a.gaussian { None } else { Some(a.dof.unwrap_or(2.6)) },
                log_vol_noise_sd: a.vol_sd,
                standardize_innovations: a.standardize.unwrap_or(false),
            };
            doc.meta("model", "sv");
            doc.meta("phi", params.ar_coefficient);
            doc.meta("vol_sd", params.log_vol_noise_sd);
            doc.meta("innovation_dof", json!(params.innovation_dof));
            doc.meta("standardize", params.standardize_innovations);
            simulate_sv(&params, a.n, a.burn_in, a.seed)?
        }
    };
    for (t, &v) in x.values().iter().enumerate() {
        doc.push_row(vec![t.into(), v.into()]);
    }
    Ok(doc)
}

fn fit_metadata(doc: &mut ResultDocument, fit: &VolatilityDecomposition) {
    let p = &fit.params;
    doc.meta("omega", p.omega);
    doc.meta("alpha", p.alpha);
    doc.meta("beta", p.beta);
    doc.meta("persistence", p.persistence());
    let r = &fit.report;
    doc.meta("log_likelihood", r.log_likelihood);
    doc.meta("iterations", r.iterations);
    doc.meta("gradient_norm", r.gradient_norm);
    doc.meta("starts_converged", r.starts_converged);
    doc.meta("constraint_margin", r.constraint_margin);
}

fn fit(a: &FitArgs, residuals_only: bool) -> Result<ResultDocument> {
    let (name, x) = load_series(&a.input, 1)?.remove(0);
    let fit = fit_garch_qmle(&x, None)?;
    let mut doc = if residuals_only {
        ResultDocument::new(&["label", "residual"])
    } else {
        ResultDocument::new(&["label", "x", "sigma", "residual"])
    };
    doc.meta("command", if residuals_only { "devol" } else { "fit-garch" });
    doc.meta("version", VERSION);
    input_metadata(&mut doc, &a.input);
    doc.meta("series", name);
    doc.meta("n", x.len());
    fit_metadata(&mut doc, &fit);
    let labels: Vec<String> = match x.labels() {
        Some(l) => l.to_vec(),
        None => (0..x.len()).map(|i| i.to_string()).collect(),
    };
    let res = fit.residuals.values();
    for (t, label) in labels.into_iter().enumerate() {
        let row = if residuals_only {
            vec![label.into(), res[t].into()]
        } else {
            vec![
                label.into(),
                x.values()[t].into(),
                fit.sigma[t].into(),
                res[t].into(),
            ]
        };
        doc.push_row(row);
    }
    Ok(doc)
}
