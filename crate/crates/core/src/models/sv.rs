use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::series::TimeSeries;

use super::draw_innovations;

/// Stochastic volatility: `X_t = sigma_t Z_t`, `log sigma_t = phi log sigma_{t-1} + eps_t`,
/// `eps_t ~ N(0, log_vol_noise_sd^2)` independent of `Z_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvParams {
    pub ar_coefficient: f64,
    pub innovation_dof: Option<f64>,
    pub log_vol_noise_sd: f64,
    pub standardize_innovations: bool,
}

impl Default for SvParams {
    /// `phi = 0.9`, raw t(2.6) noise, unit log-volatility noise.
    fn default() -> Self {
        Self {
            ar_coefficient: 0.9,
            innovation_dof: Some(2.6),
            log_vol_noise_sd: 1.0,
            standardize_innovations: false,
        }
    }
}

impl SvParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.ar_coefficient.abs() < 1.0) {
            return Err(Error::invalid(format!(
                "|phi| = {} must be below 1",
                self.ar_coefficient.abs()
            )));
        }
        if !(self.log_vol_noise_sd > 0.0 && self.log_vol_noise_sd.is_finite()) {
            return Err(Error::invalid("log-volatility noise sd must be positive"));
        }
        Ok(())
    }

    /// Standard deviation of the stationary law of `log sigma_t`.
    pub fn stationary_log_vol_sd(&self) -> f64 {
        self.log_vol_noise_sd / (1.0 - self.ar_coefficient.powi(2)).sqrt()
    }
}

/// `X_t` for `t = 1..=z.len()` from `log sigma_0 = log_sigma0` and given shocks.
pub fn sv_recursion(params: &SvParams, z: &[f64], eps: &[f64], log_sigma0: f64) -> Vec<f64> {
    let mut log_sigma = log_sigma0;
    z.iter()
        .zip(eps)
        .map(|(zt, e)| {
            log_sigma = params.ar_coefficient * log_sigma + e;
            log_sigma.exp() * zt
        })
        .collect()
}

/// `Z` comes from ChaCha stream 0 of `seed` and `(log sigma_0, eps)` from
/// stream 1, with `log sigma_0` drawn from the stationary normal law.
pub fn simulate_sv(params: &SvParams, n: usize, burn_in: usize, seed: u64) -> Result<TimeSeries> {
    params.validate()?;
    if n == 0 {
        return Err(Error::invalid("simulation length must be positive"));
    }
    let total = n + burn_in;
    let z = draw_innovations(
        &mut stream_rng(seed, 0),
        total,
        params.innovation_dof,
        params.standardize_innovations,
    )?;
    let mut vol_rng = stream_rng(seed, 1);
    let start = Normal::new(0.0, params.stationary_log_vol_sd())
        .map_err(|e| Error::invalid(e.to_string()))?
        .sample(&mut vol_rng);
    let shock = Normal::new(0.0, params.log_vol_noise_sd).map_err(|e| Error::invalid(e.to_string()))?;
    let eps: Vec<f64> = (0..total).map(|_| shock.sample(&mut vol_rng)).collect();
    let mut x = sv_recursion(params, &z, &eps, start);
    TimeSeries::new(x.split_off(burn_in))
}
