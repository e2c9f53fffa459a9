use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremogram::{joint_indicators, ratio_counts, ExtremalEvents, Family};
use crate::threshold::quantile_of;

use super::plan::BlockPlan;

/// Largest tolerated fraction of replicates without a conditioning event.
pub const MAX_SKIP_RATE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandMethod {
    /// Empirical quantiles of the replicates themselves.
    QuantileOfReplicates,
    /// `rho - q_hi(rho* - rho)` to `rho - q_lo(rho* - rho)`.
    Centered,
}

/// What one shared block plan is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResampleScheme {
    /// The per-lag summands `1{D_t, response at t+h}` and `1{D_t}` are
    /// resampled as one stacked sequence, so each replicate is a ratio of
    /// resampled sums. Pairs `(t, t+h)` are never split by a block boundary.
    JointIndicators,
    /// The marginal event channels are resampled and the estimator is
    /// recomputed on the replicate series; pairs straddling a block boundary
    /// are broken, so dependence beyond the block length is lost.
    Channels,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    /// `1 / p`
    pub mean_block_size: f64,
    pub replicates: usize,
    pub levels: (f64, f64),
    pub method: BandMethod,
    pub scheme: ResampleScheme,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            mean_block_size: 100.0,
            replicates: 10_000,
            levels: (0.025, 0.975),
            method: BandMethod::Centered,
            scheme: ResampleScheme::JointIndicators,
            seed: 0,
        }
    }
}

impl BootstrapConfig {
    pub fn block_probability(&self) -> f64 {
        1.0 / self.mean_block_size
    }

    fn validate(&self) -> Result<()> {
        if !(self.mean_block_size >= 1.0 && self.mean_block_size.is_finite()) {
            return Err(Error::invalid(format!(
                "mean block size {} must be a finite number >= 1",
                self.mean_block_size
            )));
        }
        if self.replicates < 100 {
            return Err(Error::invalid(format!(
                "{} bootstrap replicates requested; at least 100 are required",
                self.replicates
            )));
        }
        let (lo, hi) = self.levels;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::invalid(format!("band levels ({lo}, {hi}) must satisfy 0 < lo < hi < 1")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapBands {
    pub family: Family,
    pub lags: Vec<usize>,
    pub estimates: Vec<f64>,
    /// One row per kept replicate, one column per lag.
    pub replicates: Vec<Vec<f64>>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub replicate_mean: Vec<f64>,
    pub skipped: usize,
    pub config: BootstrapConfig,
}

impl BootstrapBands {
    pub fn skip_rate(&self) -> f64 {
        self.skipped as f64 / self.config.replicates as f64
    }

    /// Replicate values at lag index `k`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.replicates.iter().map(|row| row[k]).collect()
    }

    /// Empirical `level` quantile of the replicates at lag index `k`.
    pub fn replicate_quantile(&self, k: usize, level: f64) -> Result<f64> {
        quantile_of(self.column(k), level)
    }

    /// Replicate mean minus point estimate per lag.
    pub fn bias(&self) -> Vec<f64> {
        self.replicate_mean
            .iter()
            .zip(&self.estimates)
            .map(|(m, e)| m - e)
            .collect()
    }
}

/// Stationary-bootstrap bands for `events` over the lag grid up to `max_lag`.
pub fn bootstrap_bands(
    events: &ExtremalEvents,
    max_lag: usize,
    config: &BootstrapConfig,
) -> Result<BootstrapBands> {
    let lags = events.lag_grid(max_lag)?;
    bootstrap_bands_for_lags(events, &lags, config)
}

pub fn bootstrap_bands_for_lags(
    events: &ExtremalEvents,
    lags: &[usize],
    config: &BootstrapConfig,
) -> Result<BootstrapBands> {
    config.validate()?;
    let point = events.estimate_lags(lags)?;
    let n = events.len();
    let p = config.block_probability();
    let rows: Vec<Option<Vec<f64>>> = match config.scheme {
        ResampleScheme::JointIndicators => {
            let sums = PrefixSums::new(events, lags);
            (0..config.replicates)
                .into_par_iter()
                .map(|r| {
                    let plan = BlockPlan::draw(n, p, config.seed, r as u64)?;
                    Ok(sums.replicate(&plan))
                })
                .collect::<Result<_>>()?
        }
        ResampleScheme::Channels => {
            let channels = events.channels();
            (0..config.replicates)
                .into_par_iter()
                .map(|r| {
                    let plan = BlockPlan::draw(n, p, config.seed, r as u64)?;
                    let resampled = plan.materialize_aligned(&channels)?;
                    let refs: Vec<&[bool]> = resampled.iter().map(Vec::as_slice).collect();
                    let counts = ratio_counts(events.family(), &refs, lags);
                    Ok(ratio(counts.denominator, &counts.numerators))
                })
                .collect::<Result<_>>()?
        }
    };

    let skipped = rows.iter().filter(|r| r.is_none()).count();
    let skip_rate = skipped as f64 / config.replicates as f64;
    if skip_rate > MAX_SKIP_RATE {
        return Err(Error::UnstableResample {
            skipped,
            replicates: config.replicates,
            skip_rate,
        });
    }
    let replicates: Vec<Vec<f64>> = rows.into_iter().flatten().collect();
    let kept = replicates.len() as f64;

    let (lo, hi) = config.levels;
    let mut lower = Vec::with_capacity(lags.len());
    let mut upper = Vec::with_capacity(lags.len());
    let mut replicate_mean = Vec::with_capacity(lags.len());
    for (k, &est) in point.estimates.iter().enumerate() {
        let column: Vec<f64> = replicates.iter().map(|row| row[k]).collect();
        replicate_mean.push(column.iter().sum::<f64>() / kept);
        match config.method {
            BandMethod::QuantileOfReplicates => {
                lower.push(quantile_of(column.clone(), lo)?);
                upper.push(quantile_of(column, hi)?);
            }
            BandMethod::Centered => {
                let diffs: Vec<f64> = column.iter().map(|v| v - est).collect();
                lower.push(est - quantile_of(diffs.clone(), hi)?);
                upper.push(est - quantile_of(diffs, lo)?);
            }
        }
    }

    Ok(BootstrapBands {
        family: events.family(),
        lags: lags.to_vec(),
        estimates: point.estimates,
        replicates,
        lower,
        upper,
        replicate_mean,
        skipped,
        config: config.clone(),
    })
}

fn ratio(denominator: usize, numerators: &[usize]) -> Option<Vec<f64>> {
    (denominator > 0).then(|| {
        let d = denominator as f64;
        numerators.iter().map(|&c| c as f64 / d).collect()
    })
}

/// Prefix sums of the stacked joint indicators; a block's contribution is a
/// circular range sum, so a replicate costs `O(N * lags)`.
struct PrefixSums {
    n: usize,
    denominator: Vec<u32>,
    numerators: Vec<Vec<u32>>,
}

impl PrefixSums {
    fn new(events: &ExtremalEvents, lags: &[usize]) -> Self {
        let (d, nums) = joint_indicators(events.family(), &events.channels(), lags);
        Self {
            n: events.len(),
            denominator: prefix(&d),
            numerators: nums.iter().map(|v| prefix(v)).collect(),
        }
    }

    fn range(&self, sums: &[u32], start: usize, len: usize) -> u32 {
        let end = start + len;
        if end <= self.n {
            sums[end] - sums[start]
        } else {
            sums[self.n] - sums[start] + sums[end - self.n]
        }
    }

    fn replicate(&self, plan: &BlockPlan) -> Option<Vec<f64>> {
        let segments: Vec<(usize, usize)> = plan.segments().filter(|&(_, l)| l > 0).collect();
        let total = |sums: &[u32]| -> usize {
            segments
                .iter()
                .map(|&(s, l)| self.range(sums, s, l) as usize)
                .sum()
        };
        let d = total(&self.denominator);
        let nums: Vec<usize> = self.numerators.iter().map(|s| total(s)).collect();
        ratio(d, &nums)
    }
}

fn prefix(bits: &[bool]) -> Vec<u32> {
    let mut out = Vec::with_capacity(bits.len() + 1);
    let mut acc = 0u32;
    out.push(0);
    for &b in bits {
        acc += b as u32;
        out.push(acc);
    }
    out
}
