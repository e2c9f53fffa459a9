use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extremogram::{ratio_counts, ExtremalEvents};
use crate::rng::{stream_rng, RESAMPLE_STREAM_BASE};

/// Min and max of the estimator over random reorderings of the data. Under
/// serial independence the time order carries no information, so these act
/// as constant significance bands across lags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationBands {
    pub lag: usize,
    pub lower: f64,
    pub upper: f64,
    /// Estimate at `lag` for each permutation, in permutation order.
    pub values: Vec<f64>,
    pub seed: u64,
}

impl PermutationBands {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// Lag-1 permutation bands from `n_perm` uniform permutations.
pub fn permutation_bands(events: &ExtremalEvents, n_perm: usize, seed: u64) -> Result<PermutationBands> {
    permutation_bands_at(events, 1, n_perm, seed)
}

/// Permutation `i` shuffles with ChaCha stream `i` above the resampling base.
/// All channels share the permutation, keeping contemporaneous values paired.
pub fn permutation_bands_at(
    events: &ExtremalEvents,
    lag: usize,
    n_perm: usize,
    seed: u64,
) -> Result<PermutationBands> {
    if n_perm == 0 {
        return Err(Error::invalid("at least one permutation is required"));
    }
    let n = events.len();
    let values = (0..n_perm)
        .into_par_iter()
        .map(|i| {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut stream_rng(seed, RESAMPLE_STREAM_BASE + i as u64));
            estimate_for_order(events, lag, &order)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(bands(lag, values, seed))
}

/// Bands over caller-supplied orderings (each a permutation of `0..n`).
pub fn permutation_bands_from_orders(
    events: &ExtremalEvents,
    lag: usize,
    orders: &[Vec<usize>],
) -> Result<PermutationBands> {
    if orders.is_empty() {
        return Err(Error::invalid("at least one permutation is required"));
    }
    let values = orders
        .iter()
        .map(|o| estimate_for_order(events, lag, o))
        .collect::<Result<Vec<f64>>>()?;
    Ok(bands(lag, values, 0))
}

fn estimate_for_order(events: &ExtremalEvents, lag: usize, order: &[usize]) -> Result<f64> {
    if lag >= events.len() || lag < events.family().first_lag() {
        return Err(Error::invalid(format!("lag {lag} is outside the admissible grid")));
    }
    if order.len() != events.len() {
        return Err(Error::invalid("permutation length differs from the series length"));
    }
    let channels = events.channels();
    let permuted: Vec<Vec<bool>> = channels
        .iter()
        .map(|c| order.iter().map(|&i| c[i]).collect())
        .collect();
    let refs: Vec<&[bool]> = permuted.iter().map(Vec::as_slice).collect();
    let counts = ratio_counts(events.family(), &refs, &[lag]);
    if counts.denominator == 0 {
        return Err(events.no_exceedances());
    }
    Ok(counts.numerators[0] as f64 / counts.denominator as f64)
}

fn bands(lag: usize, values: Vec<f64>, seed: u64) -> PermutationBands {
    let lower = values.iter().copied().fold(f64::INFINITY, f64::min);
    let upper = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    PermutationBands {
        lag,
        lower,
        upper,
        values,
        seed,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::ExtremalRegion;
    use crate::series::TimeSeries;
    use crate::threshold::{Tail, ThresholdSpec};
    use rand::{Rng, SeedableRng};

    fn events(seed: u64) -> ExtremalEvents {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x = TimeSeries::new((0..2000).map(|_| rng.random::<f64>()).collect()).unwrap();
        let spec = ThresholdSpec::new(0.95, Tail::Upper).unwrap();
        ExtremalEvents::univariate(&x, &ExtremalRegion::upper(), &ExtremalRegion::upper(), &spec).unwrap()
    }

    #[test]
    fn identity_permutation_lies_inside() {
        let ev = events(1);
        let observed = ev.estimate(1).unwrap().estimates[1];
        let mut orders: Vec<Vec<usize>> = (0..20u64)
            .map(|s| {
                let mut o: Vec<usize> = (0..2000).collect();
                o.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(s));
                o
            })
            .collect();
        orders.push((0..2000).collect());
        let b = permutation_bands_from_orders(&ev, 1, &orders).unwrap();
        assert!(b.contains(observed));
    }

    #[test]
    fn deterministic_and_ordered() {
        let ev = events(2);
        let a = permutation_bands(&ev, 99, 5).unwrap();
        assert_eq!(a, permutation_bands(&ev, 99, 5).unwrap());
        assert_eq!(a.values.len(), 99);
        assert!(a.lower <= a.upper);
        assert!(permutation_bands(&ev, 0, 5).is_err());
    }

    #[test]
    fn permutation_preserves_denominator() {
        let ev = events(3);
        let d = ev.counts(&[1]).denominator;
        for s in 0..10u64 {
            let mut o: Vec<usize> = (0..2000).collect();
            o.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(s));
            assert_eq!(ev.reordered(&o).counts(&[1]).denominator, d);
        }
    }
}
