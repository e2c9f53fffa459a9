//! Sample extremogram estimators.
//!
//! Every estimator here is a ratio of counts over aligned binary event
//! channels. A conditioning event `D_t` depends only on time `t`; the
//! numerator at lag `h` counts the `t <= n - h` where `D_t` holds and the
//! family's response event holds `h` steps later:
//!
//! | family               | channels            | `D_t`            | response at `t + h`                    |
//! |----------------------|---------------------|------------------|----------------------------------------|
//! | `Univariate`         | `[x in A, x in B]`  | `c0[t]`          | `c1[t+h]`                              |
//! | `Cross`              | `[x in A, y in B]`  | `c0[t]`          | `c1[t+h]`                              |
//! | `TriUnionTarget`     | `[x, y, z]` exceed  | `c0[t]`          | `c1[t+h] or c2[t+h]`                   |
//! | `TriUnionSource`     | `[x, y, z]` exceed  | `c0[t] or c1[t]` | `c2[t+h]`                              |
//! | `ReturnTimes`        | `[x in A]`          | `c0[t]`          | `c0[t+h]`, no `c0` in `t+1 .. t+h-1`    |
//!
//! The denominator always runs over all `n` observations, the numerator over
//! the first `n - h` (no wrap-around, no edge correction).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indicator::make_indicators;
use crate::region::ExtremalRegion;
use crate::series::TimeSeries;
use crate::threshold::ThresholdSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Univariate,
    Cross,
    TriUnionTarget,
    TriUnionSource,
    ReturnTimes,
}

impl Family {
    pub fn channel_count(self) -> usize {
        match self {
            Family::Univariate | Family::Cross => 2,
            Family::TriUnionTarget | Family::TriUnionSource => 3,
            Family::ReturnTimes => 1,
        }
    }

    /// Smallest admissible lag.
    pub fn first_lag(self) -> usize {
        match self {
            Family::ReturnTimes => 1,
            _ => 0,
        }
    }

    #[inline]
    fn conditioning(self, ch: &[&[bool]], t: usize) -> bool {
        match self {
            Family::TriUnionSource => ch[0][t] || ch[1][t],
            _ => ch[0][t],
        }
    }

    #[inline]
    fn response(self, ch: &[&[bool]], s: usize) -> bool {
        match self {
            Family::Univariate | Family::Cross => ch[1][s],
            Family::TriUnionTarget => ch[1][s] || ch[2][s],
            Family::TriUnionSource => ch[2][s],
            Family::ReturnTimes => ch[0][s],
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Univariate => "univariate",
            Family::Cross => "cross",
            Family::TriUnionTarget => "tri_union_target",
            Family::TriUnionSource => "tri_union_source",
            Family::ReturnTimes => "return_times",
        })
    }
}

/// Raw counts behind an estimate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioCounts {
    pub denominator: usize,
    pub numerators: Vec<usize>,
}

/// Counts the family's numerator at each lag and its denominator on the given
/// channels. Works on any aligned channel set, original or resampled.
pub fn ratio_counts(family: Family, channels: &[&[bool]], lags: &[usize]) -> RatioCounts {
    let n = channels[0].len();
    let events: Vec<usize> = (0..n)
        .filter(|&t| family.conditioning(channels, t))
        .collect();
    let numerators = match family {
        Family::ReturnTimes => {
            let max = lags.iter().copied().max().unwrap_or(0);
            let mut gaps = vec![0usize; max + 1];
            for w in events.windows(2) {
                let g = w[1] - w[0];
                if g <= max {
                    gaps[g] += 1;
                }
            }
            lags.iter().map(|&h| if h == 0 { 0 } else { gaps[h] }).collect()
        }
        _ => lags
            .iter()
            .map(|&h| {
                events
                    .iter()
                    .take_while(|&&t| t + h < n)
                    .filter(|&&t| family.response(channels, t + h))
                    .count()
            })
            .collect(),
    };
    RatioCounts {
        denominator: events.len(),
        numerators,
    }
}

/// Per-time indicator sequences whose sums give the ratio's numerator and
/// denominator: `denominator[t] = D_t` and `numerators[k][t]` is the lag
/// `lags[k]` numerator summand (zero for `t >= n - h`).
pub fn joint_indicators(
    family: Family,
    channels: &[&[bool]],
    lags: &[usize],
) -> (Vec<bool>, Vec<Vec<bool>>) {
    let n = channels[0].len();
    let denominator: Vec<bool> = (0..n).map(|t| family.conditioning(channels, t)).collect();
    let numerators = match family {
        Family::ReturnTimes => {
            // next[t] = index of the first event strictly after t
            let mut next = vec![usize::MAX; n];
            let mut upcoming = usize::MAX;
            for t in (0..n).rev() {
                next[t] = upcoming;
                if channels[0][t] {
                    upcoming = t;
                }
            }
            lags.iter()
                .map(|&h| {
                    (0..n)
                        .map(|t| h > 0 && denominator[t] && next[t] != usize::MAX && next[t] - t == h)
                        .collect()
                })
                .collect()
        }
        _ => lags
            .iter()
            .map(|&h| {
                (0..n)
                    .map(|t| t + h < n && denominator[t] && family.response(channels, t + h))
                    .collect()
            })
            .collect(),
    };
    (denominator, numerators)
}

/// Per-lag extremogram estimates with the counts and thresholds behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremogramEstimate {
    pub family: Family,
    pub n: usize,
    pub lags: Vec<usize>,
    pub estimates: Vec<f64>,
    pub numerators: Vec<usize>,
    pub denominator_count: usize,
    pub thresholds: Vec<ThresholdSpec>,
    /// Set for the univariate family with `A == B`, where lag 0 is 1 by construction.
    pub trivial_lag_zero: bool,
}

impl ExtremogramEstimate {
    pub fn at(&self, lag: usize) -> Option<f64> {
        self.lags
            .iter()
            .position(|&h| h == lag)
            .map(|i| self.estimates[i])
    }
}

/// Return-times extremogram read as a waiting-time histogram with a
/// geometric reference law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeomHistogram {
    pub estimate: ExtremogramEstimate,
    pub reference_p: f64,
}

impl GeomHistogram {
    /// Numerator count per lag.
    pub fn counts(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.estimate
            .lags
            .iter()
            .copied()
            .zip(self.estimate.numerators.iter().copied())
    }

    pub fn total(&self) -> usize {
        self.estimate.denominator_count
    }

    /// `p (1 - p)^(h - 1)`
    pub fn geometric_pmf(&self, h: usize) -> f64 {
        geometric_pmf(self.reference_p, h)
    }

    pub fn with_reference_p(mut self, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::invalid(format!("reference probability {p} is outside (0, 1)")));
        }
        self.reference_p = p;
        Ok(self)
    }
}

pub fn geometric_pmf(p: f64, h: usize) -> f64 {
    if h == 0 {
        0.0
    } else {
        p * (1.0 - p).powi(h as i32 - 1)
    }
}

/// Aligned event channels for one estimator family, built from series,
/// regions and thresholds. This is what the resampling procedures operate on.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtremalEvents {
    family: Family,
    channels: Vec<Vec<bool>>,
    thresholds: Vec<ThresholdSpec>,
    trivial_lag_zero: bool,
}

impl ExtremalEvents {
    /// Builds events directly from channels; all channels must have equal,
    /// nonzero length and their count must match the family.
    pub fn from_channels(
        family: Family,
        channels: Vec<Vec<bool>>,
        thresholds: Vec<ThresholdSpec>,
    ) -> Result<Self> {
        if channels.len() != family.channel_count() {
            return Err(Error::invalid(format!(
                "{family} needs {} channels, got {}",
                family.channel_count(),
                channels.len()
            )));
        }
        let n = channels[0].len();
        if n == 0 || channels.iter().any(|c| c.len() != n) {
            return Err(Error::invalid("event channels must be non-empty and aligned"));
        }
        Ok(Self {
            family,
            channels,
            thresholds,
            trivial_lag_zero: false,
        })
    }

    pub fn univariate(
        x: &TimeSeries,
        a: &ExtremalRegion,
        b: &ExtremalRegion,
        spec: &ThresholdSpec,
    ) -> Result<Self> {
        let spec = spec.resolve(x)?;
        let ca = make_indicators(x, a, &spec)?.into_bits();
        let cb = make_indicators(x, b, &spec)?.into_bits();
        let mut ev = Self::from_channels(Family::Univariate, vec![ca, cb], vec![spec])?;
        ev.trivial_lag_zero = a == b;
        Ok(ev)
    }

    pub fn cross(
        x: &TimeSeries,
        y: &TimeSeries,
        a: &ExtremalRegion,
        b: &ExtremalRegion,
        spec_x: &ThresholdSpec,
        spec_y: &ThresholdSpec,
    ) -> Result<Self> {
        check_lengths(&[x, y])?;
        let sx = spec_x.resolve(x)?;
        let sy = spec_y.resolve(y)?;
        let ca = make_indicators(x, a, &sx)?.into_bits();
        let cb = make_indicators(y, b, &sy)?.into_bits();
        Self::from_channels(Family::Cross, vec![ca, cb], vec![sx, sy])
    }

    /// Trivariate families; each series is tested against its own spec's tail
    /// region (e.g. `(1, inf)` for upper, `(-inf, -1)` for lower).
    pub fn trivariate(
        family: Family,
        x: &TimeSeries,
        y: &TimeSeries,
        z: &TimeSeries,
        specs: [&ThresholdSpec; 3],
    ) -> Result<Self> {
        if !matches!(family, Family::TriUnionTarget | Family::TriUnionSource) {
            return Err(Error::invalid(format!("{family} is not a trivariate family")));
        }
        check_lengths(&[x, y, z])?;
        let mut resolved = Vec::with_capacity(3);
        let mut channels = Vec::with_capacity(3);
        for (s, spec) in [x, y, z].into_iter().zip(specs) {
            let spec = spec.resolve(s)?;
            channels.push(make_indicators(s, &spec.region(), &spec)?.into_bits());
            resolved.push(spec);
        }
        Self::from_channels(family, channels, resolved)
    }

    pub fn return_times(x: &TimeSeries, a: &ExtremalRegion, spec: &ThresholdSpec) -> Result<Self> {
        let spec = spec.resolve(x)?;
        let ca = make_indicators(x, a, &spec)?.into_bits();
        Self::from_channels(Family::ReturnTimes, vec![ca], vec![spec])
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels[0].is_empty()
    }

    pub fn channels(&self) -> Vec<&[bool]> {
        self.channels.iter().map(Vec::as_slice).collect()
    }

    pub fn thresholds(&self) -> &[ThresholdSpec] {
        &self.thresholds
    }

    /// The lag grid `first_lag..=max_lag`, checked against the series length.
    pub fn lag_grid(&self, max_lag: usize) -> Result<Vec<usize>> {
        let first = self.family.first_lag();
        if max_lag >= self.len() {
            return Err(Error::invalid(format!(
                "max_lag {max_lag} must be below the series length {}",
                self.len()
            )));
        }
        if max_lag < first {
            return Err(Error::invalid(format!(
                "max_lag must be at least {first} for the {} family",
                self.family
            )));
        }
        Ok((first..=max_lag).collect())
    }

    pub fn counts(&self, lags: &[usize]) -> RatioCounts {
        ratio_counts(self.family, &self.channels(), lags)
    }

    pub(crate) fn no_exceedances(&self) -> Error {
        Error::NoExceedances {
            q: self.thresholds.first().and_then(ThresholdSpec::quantile),
            n: self.len(),
        }
    }

    pub fn estimate_lags(&self, lags: &[usize]) -> Result<ExtremogramEstimate> {
        let counts = self.counts(lags);
        if counts.denominator == 0 {
            return Err(self.no_exceedances());
        }
        let d = counts.denominator as f64;
        Ok(ExtremogramEstimate {
            family: self.family,
            n: self.len(),
            lags: lags.to_vec(),
            estimates: counts.numerators.iter().map(|&c| c as f64 / d).collect(),
            numerators: counts.numerators,
            denominator_count: counts.denominator,
            thresholds: self.thresholds.clone(),
            trivial_lag_zero: self.trivial_lag_zero,
        })
    }

    pub fn estimate(&self, max_lag: usize) -> Result<ExtremogramEstimate> {
        let lags = self.lag_grid(max_lag)?;
        self.estimate_lags(&lags)
    }

    /// The same events with every channel reordered by `order` (`new[i] = old[order[i]]`).
    pub fn reordered(&self, order: &[usize]) -> Self {
        let channels = self
            .channels
            .iter()
            .map(|c| order.iter().map(|&i| c[i]).collect())
            .collect();
        Self {
            family: self.family,
            channels,
            thresholds: self.thresholds.clone(),
            trivial_lag_zero: self.trivial_lag_zero,
        }
    }
}

fn check_lengths(series: &[&TimeSeries]) -> Result<()> {
    let n = series[0].len();
    if series.iter().any(|s| s.len() != n) {
        let lens: Vec<usize> = series.iter().map(|s| s.len()).collect();
        return Err(Error::invalid(format!("series lengths differ: {lens:?}")));
    }
    Ok(())
}

/// Univariate sample extremogram for lags `0..=max_lag`.
pub fn sample_extremogram(
    x: &TimeSeries,
    a: &ExtremalRegion,
    b: &ExtremalRegion,
    spec: &ThresholdSpec,
    max_lag: usize,
) -> Result<ExtremogramEstimate> {
    ExtremalEvents::univariate(x, a, b, spec)?.estimate(max_lag)
}

/// Cross-extremogram conditioning on `x` and responding in `y`, each scaled
/// by its own threshold.
pub fn cross_extremogram(
    x: &TimeSeries,
    y: &TimeSeries,
    a: &ExtremalRegion,
    b: &ExtremalRegion,
    spec_x: &ThresholdSpec,
    spec_y: &ThresholdSpec,
    max_lag: usize,
) -> Result<ExtremogramEstimate> {
    ExtremalEvents::cross(x, y, a, b, spec_x, spec_y)?.estimate(max_lag)
}

/// `P(Y_{t+h} or Z_{t+h} extreme | X_t extreme)`
pub fn tri_extremogram_union_target(
    x: &TimeSeries,
    y: &TimeSeries,
    z: &TimeSeries,
    specs: [&ThresholdSpec; 3],
    max_lag: usize,
) -> Result<ExtremogramEstimate> {
    ExtremalEvents::trivariate(Family::TriUnionTarget, x, y, z, specs)?.estimate(max_lag)
}

/// `P(Z_{t+h} extreme | X_t or Y_t extreme)`
pub fn tri_extremogram_union_source(
    x: &TimeSeries,
    y: &TimeSeries,
    z: &TimeSeries,
    specs: [&ThresholdSpec; 3],
    max_lag: usize,
) -> Result<ExtremogramEstimate> {
    ExtremalEvents::trivariate(Family::TriUnionSource, x, y, z, specs)?.estimate(max_lag)
}

/// Return-times extremogram for lags `1..=max_lag`: the fraction of A-events
/// whose next A-event comes exactly `h` steps later.
///
/// The geometric reference probability defaults to the nominal exceedance rate
/// `1 - q`, or to the observed rate `m / n` for a fixed threshold.
pub fn return_times_extremogram(
    x: &TimeSeries,
    a: &ExtremalRegion,
    spec: &ThresholdSpec,
    max_lag: usize,
) -> Result<GeomHistogram> {
    let events = ExtremalEvents::return_times(x, a, spec)?;
    let estimate = events.estimate(max_lag)?;
    let reference_p = events.thresholds[0]
        .nominal_rate()
        .unwrap_or(estimate.denominator_count as f64 / estimate.n as f64)
        .clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
    Ok(GeomHistogram {
        estimate,
        reference_p,
    })
}
