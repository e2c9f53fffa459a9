use crate::error::{Error, Result};
use crate::region::ExtremalRegion;
use crate::series::TimeSeries;
use crate::threshold::ThresholdSpec;

/// `bits[t] = 1{values[t] / a_m in region}`.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSeries {
    bits: Vec<bool>,
    threshold: f64,
    region: ExtremalRegion,
    count: usize,
}

impl IndicatorSeries {
    /// Wraps an already computed bit sequence, e.g. a resampled one.
    pub fn from_bits(bits: Vec<bool>, threshold: f64, region: ExtremalRegion) -> Self {
        let count = bits.iter().filter(|&&b| b).count();
        Self {
            bits,
            threshold,
            region,
            count,
        }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Number of set bits (`m`).
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn region(&self) -> &ExtremalRegion {
        &self.region
    }

    /// Circular access: index `j` (0-based) wraps to `j mod n`.
    pub fn get_circular(&self, j: usize) -> bool {
        self.bits[j % self.bits.len()]
    }
}

pub fn make_indicators(
    series: &TimeSeries,
    region: &ExtremalRegion,
    spec: &ThresholdSpec,
) -> Result<IndicatorSeries> {
    let a = spec
        .threshold()
        .ok_or_else(|| Error::InvalidState("threshold spec has not been resolved".into()))?;
    if a == 0.0 {
        return Err(Error::DegenerateThreshold);
    }
    let bits = series
        .values()
        .iter()
        .map(|&v| region.contains(v / a))
        .collect();
    Ok(IndicatorSeries::from_bits(bits, a, region.clone()))
}
