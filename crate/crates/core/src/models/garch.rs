use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::series::TimeSeries;

use super::draw_innovations;

/// GARCH(1,1): `X_t = sigma_t Z_t`, `sigma_t^2 = omega + alpha X_{t-1}^2 + beta sigma_{t-1}^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GarchParams {
    pub omega: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Student-t degrees of freedom of `Z_t`; `None` means standard normal.
    pub innovation_dof: Option<f64>,
    pub standardize_innovations: bool,
}

impl Default for GarchParams {
    /// `omega = 0.1, alpha = 0.14, beta = 0.84` with unit-variance t(4) noise.
    fn default() -> Self {
        Self {
            omega: 0.1,
            alpha: 0.14,
            beta: 0.84,
            innovation_dof: Some(4.0),
            standardize_innovations: true,
        }
    }
}

impl GarchParams {
    pub fn persistence(&self) -> f64 {
        self.alpha + self.beta
    }

    /// `omega / (1 - alpha - beta)`
    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.persistence())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::invalid(format!("omega = {} must be positive", self.omega)));
        }
        if !(self.alpha >= 0.0 && self.beta >= 0.0) {
            return Err(Error::invalid("alpha and beta must be nonnegative"));
        }
        if !(self.persistence() < 1.0) {
            return Err(Error::invalid(format!(
                "alpha + beta = {} must be below 1 for a covariance-stationary simulation",
                self.persistence()
            )));
        }
        if let Some(nu) = self.innovation_dof {
            if !(nu > 0.0) || (self.standardize_innovations && !(nu > 2.0)) {
                return Err(Error::invalid(format!(
                    "innovation degrees of freedom {nu} must exceed {}",
                    if self.standardize_innovations { 2 } else { 0 }
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GarchPath {
    pub x: Vec<f64>,
    pub sigma2: Vec<f64>,
}

/// Runs the recursion on given innovations, starting from the unconditional
/// variance: `sigma_0^2 = omega / (1 - alpha - beta)`.
pub fn garch_recursion(params: &GarchParams, innovations: &[f64]) -> GarchPath {
    let mut sigma2 = Vec::with_capacity(innovations.len());
    let mut x = Vec::with_capacity(innovations.len());
    let mut s2 = params.unconditional_variance();
    for (t, z) in innovations.iter().enumerate() {
        if t > 0 {
            let prev = x[t - 1];
            s2 = params.omega + params.alpha * prev * prev + params.beta * s2;
        }
        sigma2.push(s2);
        x.push(s2.sqrt() * z);
    }
    GarchPath { x, sigma2 }
}

/// Simulates `burn_in + n` steps (innovations from ChaCha stream 0 of `seed`)
/// and returns the last `n`.
pub fn simulate_garch(params: &GarchParams, n: usize, burn_in: usize, seed: u64) -> Result<TimeSeries> {
    params.validate()?;
    if n == 0 {
        return Err(Error::invalid("simulation length must be positive"));
    }
    let mut rng = stream_rng(seed, 0);
    let z = draw_innovations(
        &mut rng,
        n + burn_in,
        params.innovation_dof,
        params.standardize_innovations,
    )?;
    let mut path = garch_recursion(params, &z);
    TimeSeries::new(path.x.split_off(burn_in))
}
