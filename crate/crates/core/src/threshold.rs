use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::ExtremalRegion;
use crate::series::TimeSeries;

/// Lower empirical quantile: the `ceil(n q)`-th order statistic, no interpolation.
pub fn empirical_quantile(series: &TimeSeries, q: f64) -> Result<f64> {
    quantile_of(series.values().to_vec(), q)
}

pub(crate) fn quantile_of(mut values: Vec<f64>, q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("quantile of an empty sample"));
    }
    check_level(q)?;
    let k = order_statistic_rank(values.len(), q);
    let (_, kth, _) = values.select_nth_unstable_by(k - 1, f64::total_cmp);
    Ok(*kth)
}

/// `ceil(n q)` clamped to `1..=n`. Products that land within rounding error of
/// an integer are treated as that integer, so `100 * 0.98` gives 98.
pub(crate) fn order_statistic_rank(n: usize, q: f64) -> usize {
    let x = n as f64 * q;
    let r = x.round();
    let k = if (x - r).abs() <= 1e-9 * r.max(1.0) { r } else { x.ceil() };
    (k as usize).clamp(1, n)
}

fn check_level(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::invalid(format!("quantile level {q} is outside (0, 1)")));
    }
    Ok(())
}

/// Which tail a threshold describes.
///
/// The quantile level `q` always measures how far out in the tail the
/// threshold sits: `Upper` takes the q-quantile of `X`, `Lower` the q-quantile
/// of `-X` (the magnitude of a low signed quantile) and `TwoSided` the
/// q-quantile of `|X|`. The nominal exceedance rate is `1 - q` in every case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Upper,
    Lower,
    TwoSided,
}

impl Tail {
    /// The region on the scaled axis `X / a_m` that counts as an exceedance.
    pub fn region(self) -> ExtremalRegion {
        match self {
            Tail::Upper => ExtremalRegion::upper(),
            Tail::Lower => ExtremalRegion::lower(),
            Tail::TwoSided => ExtremalRegion::two_sided(),
        }
    }
}

impl std::fmt::Display for Tail {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Tail::Upper => "upper",
            Tail::Lower => "lower",
            Tail::TwoSided => "two_sided",
        })
    }
}

/// Threshold `a_m` used to scale a series before testing region membership.
///
/// A spec is either built from a quantile level and resolved against a series,
/// or built from a fixed threshold. `exceedances` is the number of
/// observations in the tail's reference region once resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSpec {
    quantile: Option<f64>,
    tail: Tail,
    threshold: Option<f64>,
    exceedances: Option<usize>,
}

impl ThresholdSpec {
    pub fn new(q: f64, tail: Tail) -> Result<Self> {
        check_level(q)?;
        Ok(Self {
            quantile: Some(q),
            tail,
            threshold: None,
            exceedances: None,
        })
    }

    /// A spec with a known threshold. Still needs [`resolve`](Self::resolve)
    /// to count exceedances, but the threshold itself is kept as given.
    pub fn fixed(tail: Tail, threshold: f64) -> Result<Self> {
        if !threshold.is_finite() || threshold < 0.0 {
            return Err(Error::invalid(format!(
                "threshold {threshold} must be finite and nonnegative"
            )));
        }
        Ok(Self {
            quantile: None,
            tail,
            threshold: Some(threshold),
            exceedances: None,
        })
    }

    pub fn quantile(&self) -> Option<f64> {
        self.quantile
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }

    pub fn exceedances(&self) -> Option<usize> {
        self.exceedances
    }

    pub fn is_resolved(&self) -> bool {
        self.threshold.is_some()
    }

    pub fn region(&self) -> ExtremalRegion {
        self.tail.region()
    }

    /// `1 - q`, the exceedance rate one expects from the quantile level.
    pub fn nominal_rate(&self) -> Option<f64> {
        self.quantile.map(|q| 1.0 - q)
    }

    /// Resolves the threshold on `series` unless one is already set (fixed or
    /// previously resolved), then counts exceedances on `series`.
    pub fn resolve(&self, series: &TimeSeries) -> Result<Self> {
        let threshold = match (self.quantile, self.threshold) {
            (_, Some(a)) => a,
            (Some(q), None) => {
                let x = series.values();
                let magnitudes: Vec<f64> = match self.tail {
                    Tail::Upper => x.to_vec(),
                    Tail::Lower => x.iter().map(|v| -v).collect(),
                    Tail::TwoSided => x.iter().map(|v| v.abs()).collect(),
                };
                quantile_of(magnitudes, q)?
            }
            (None, None) => unreachable!("a spec has either a level or a threshold"),
        };
        if threshold == 0.0 {
            return Err(Error::DegenerateThreshold);
        }
        if threshold < 0.0 {
            return Err(Error::invalid(format!(
                "{} tail threshold resolved to {threshold}; the {} quantile must lie beyond zero",
                self.tail,
                self.quantile.unwrap_or(f64::NAN)
            )));
        }
        let region = self.region();
        let exceedances = series
            .values()
            .iter()
            .filter(|&&v| region.contains(v / threshold))
            .count();
        Ok(Self {
            quantile: self.quantile,
            tail: self.tail,
            threshold: Some(threshold),
            exceedances: Some(exceedances),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal, Uniform};

    fn ts(v: Vec<f64>) -> TimeSeries {
        TimeSeries::new(v).unwrap()
    }

    #[test]
    fn order_statistic_examples() {
        let s = ts((1..=100).map(f64::from).collect());
        assert_eq!(empirical_quantile(&s, 0.98).unwrap(), 98.0);
        assert_eq!(empirical_quantile(&ts(vec![5.0]), 0.01).unwrap(), 5.0);
        assert_eq!(empirical_quantile(&ts(vec![5.0]), 0.99).unwrap(), 5.0);
        assert_eq!(order_statistic_rank(1000, 0.07), 70);
        assert_eq!(order_statistic_rank(10, 0.01), 1);
        assert_eq!(order_statistic_rank(10, 0.91), 10);
    }

    #[test]
    fn level_must_be_open_unit_interval() {
        let s = ts(vec![1.0, 2.0]);
        for q in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(empirical_quantile(&s, q), Err(Error::InvalidInput(_))));
            assert!(ThresholdSpec::new(q, Tail::Upper).is_err());
        }
    }

    #[test]
    fn normal_quantile_matches_sort_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
        let draws: Vec<f64> = (0..2000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut sorted = draws.clone();
        sorted.sort_by(f64::total_cmp);
        let q = empirical_quantile(&ts(draws), 0.98).unwrap();
        assert_eq!(q, sorted[1959]);
        assert!((q - 2.054).abs() < 0.15, "{q}");
    }

    #[test]
    fn lower_tail_uses_negated_series() {
        let s = ts(vec![-3.0, 1.0, -8.0, 2.0, 0.5]);
        // -X sorted: -2, -1, -0.5, 3, 8; rank ceil(5 * 0.8) = 4
        let spec = ThresholdSpec::new(0.8, Tail::Lower).unwrap().resolve(&s).unwrap();
        assert_eq!(spec.threshold(), Some(3.0));
        assert_eq!(spec.exceedances(), Some(1));
        let spec = ThresholdSpec::new(0.8, Tail::TwoSided).unwrap().resolve(&s).unwrap();
        assert_eq!(spec.threshold(), Some(3.0));
        assert_eq!(spec.exceedances(), Some(1));
    }

    #[test]
    fn degenerate_and_wrong_sign_thresholds() {
        let zeros = ts(vec![0.0; 10]);
        assert_eq!(
            ThresholdSpec::new(0.9, Tail::Upper).unwrap().resolve(&zeros),
            Err(Error::DegenerateThreshold)
        );
        let negative = ts(vec![-1.0, -2.0, -3.0]);
        assert!(matches!(
            ThresholdSpec::new(0.5, Tail::Upper).unwrap().resolve(&negative),
            Err(Error::InvalidInput(_))
        ));
        let fixed = ThresholdSpec::fixed(Tail::Upper, 5.0).unwrap();
        let r = fixed.resolve(&ts(vec![10.0, 0.0, 0.0, 10.0])).unwrap();
        assert_eq!(r.threshold(), Some(5.0));
        assert_eq!(r.exceedances(), Some(2));
        assert!(ThresholdSpec::fixed(Tail::Upper, -1.0).is_err());
    }

    #[test]
    fn uniform_exceedance_count() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let u = Uniform::new(0.0, 1.0).unwrap();
        let v: Vec<f64> = (0..500).map(|_| u.sample(&mut rng)).collect();
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        let oracle = v.iter().filter(|&&x| x > sorted[449]).count();
        let spec = ThresholdSpec::new(0.9, Tail::Upper).unwrap().resolve(&ts(v)).unwrap();
        assert_eq!(spec.exceedances(), Some(oracle));
        assert!((49..=50).contains(&oracle));
    }

    proptest! {
        #[test]
        fn quantile_is_permutation_invariant(
            mut v in prop::collection::vec(-1e6f64..1e6, 1..300),
            q in 0.001f64..0.999,
            seed in any::<u64>(),
        ) {
            let a = empirical_quantile(&ts(v.clone()), q).unwrap();
            use rand::seq::SliceRandom;
            v.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(a, empirical_quantile(&ts(v), q).unwrap());
        }

        #[test]
        fn upper_count_bound(v in prop::collection::vec(-10f64..10.0, 1..300), q in 0.01f64..0.99) {
            let s = ts(v);
            match ThresholdSpec::new(q, Tail::Upper).unwrap().resolve(&s) {
                Ok(spec) => {
                    let m = spec.exceedances().unwrap() as f64;
                    prop_assert!(m <= s.len() as f64 * (1.0 - q) + 1.0);
                }
                Err(Error::InvalidInput(_)) | Err(Error::DegenerateThreshold) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
