use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Open interval `(lower, upper)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, y: f64) -> bool {
        self.lower < y && y < self.upper
    }

    /// Distance from zero to the closure of the interval.
    fn gap_from_zero(&self) -> f64 {
        if self.lower >= 0.0 {
            self.lower
        } else if self.upper <= 0.0 {
            -self.upper
        } else {
            0.0
        }
    }
}

/// A finite union of disjoint open intervals on the scaled axis `X / a_m`,
/// bounded away from zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremalRegion {
    intervals: Vec<Interval>,
}

impl ExtremalRegion {
    pub fn new(intervals: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut intervals: Vec<Interval> = intervals
            .into_iter()
            .map(|(lower, upper)| Interval { lower, upper })
            .collect();
        if intervals.is_empty() {
            return Err(Error::invalid("an extremal region needs at least one interval"));
        }
        for iv in &intervals {
            if iv.lower.is_nan() || iv.upper.is_nan() || iv.lower >= iv.upper {
                return Err(Error::invalid(format!(
                    "interval ({}, {}) is empty or malformed",
                    iv.lower, iv.upper
                )));
            }
            if iv.gap_from_zero() <= 0.0 {
                return Err(Error::invalid(format!(
                    "interval ({}, {}) is not bounded away from zero",
                    iv.lower, iv.upper
                )));
            }
        }
        intervals.sort_by(|a, b| a.lower.total_cmp(&b.lower));
        // open intervals sharing an endpoint are still disjoint
        if intervals.windows(2).any(|w| w[0].upper > w[1].lower) {
            return Err(Error::invalid("region intervals overlap"));
        }
        Ok(Self { intervals })
    }

    /// `(1, inf)`
    pub fn upper() -> Self {
        Self {
            intervals: vec![Interval {
                lower: 1.0,
                upper: f64::INFINITY,
            }],
        }
    }

    /// `(-inf, -1)`
    pub fn lower() -> Self {
        Self {
            intervals: vec![Interval {
                lower: f64::NEG_INFINITY,
                upper: -1.0,
            }],
        }
    }

    /// `(-inf, -1) U (1, inf)`
    pub fn two_sided() -> Self {
        Self {
            intervals: vec![Self::lower().intervals[0], Self::upper().intervals[0]],
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Largest `r` with the region contained in `{y : |y| >= r}`.
    pub fn margin(&self) -> f64 {
        self.intervals
            .iter()
            .map(Interval::gap_from_zero)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, y: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(y))
    }
}

impl std::fmt::Display for ExtremalRegion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, " U ")?;
            }
            write!(f, "({}, {})", iv.lower, iv.upper)?;
        }
        Ok(())
    }
}
