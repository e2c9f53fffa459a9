use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered, finite, non-empty observations with optional per-observation labels.
///
/// Labels are opaque strings (typically dates) that are carried along and never
/// interpreted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    labels: Option<Vec<String>>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        validate(&values)?;
        Ok(Self {
            values,
            labels: None,
        })
    }

    pub fn with_labels(values: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        validate(&values)?;
        if labels.len() != values.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} values",
                labels.len(),
                values.len()
            )));
        }
        Ok(Self {
            values,
            labels: Some(labels),
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Multiplies every observation by `c`, keeping labels.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let values = self.values.iter().map(|v| v * c).collect();
        match &self.labels {
            Some(l) => Self::with_labels(values, l.clone()),
            None => Self::new(values),
        }
    }
}

fn validate(values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid("time series must contain at least one value"));
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!(
            "non-finite value {} at position {i}",
            values[i]
        )));
    }
    Ok(())
}

/// `r_t = ln(p_{t+1} / p_t)`; each return keeps the label of the later price.
pub fn log_returns(prices: &TimeSeries) -> Result<TimeSeries> {
    let p = prices.values();
    if p.len() < 2 {
        return Err(Error::invalid("log-returns need at least two prices"));
    }
    if let Some(i) = p.iter().position(|&v| v <= 0.0) {
        return Err(Error::invalid(format!(
            "price {} at position {i} is not strictly positive",
            p[i]
        )));
    }
    let returns = p.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
    match prices.labels() {
        Some(labels) => TimeSeries::with_labels(returns, labels[1..].to_vec()),
        None => TimeSeries::new(returns),
    }
}
