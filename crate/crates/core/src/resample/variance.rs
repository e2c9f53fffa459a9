use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{Error, Result};
use crate::indicator::IndicatorSeries;

impl AsRef<[bool]> for IndicatorSeries {
    fn as_ref(&self) -> &[bool] {
        self.bits()
    }
}

/// Ordinary sample autocovariances `gamma_n(h) = n^-1 sum_{i < n-h} (x_i - xbar)(x_{i+h} - xbar)`
/// for `h = 0..n`, computed through a zero-padded FFT.
pub fn sample_autocovariances(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let len = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = x
        .iter()
        .map(|v| Complex::new(v - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let scale = 1.0 / (len as f64 * n as f64);
    buf[..n].iter().map(|c| c.re * scale).collect()
}

/// Circular sample autocovariances `C_n(h) = gamma_n(h) + gamma_n(n - h)`,
/// `h = 0..n` (with `gamma_n(n) = 0`).
pub fn circular_autocovariances(bits: &[bool]) -> Vec<f64> {
    let x: Vec<f64> = bits.iter().map(|&b| b as u8 as f64).collect();
    let gamma = sample_autocovariances(&x);
    let n = gamma.len();
    (0..n)
        .map(|h| gamma[h] + if h == 0 { 0.0 } else { gamma[n - h] })
        .collect()
}

/// Variance of `sqrt(n)` times the stationary-bootstrap replicate mean of an
/// indicator sequence:
///
/// `s_n^2 = C_n(0) + 2 sum_{h=1}^{n-1} (1 - h/n) (1 - p)^h C_n(h)`.
///
/// Multiply by `m` for the normalised form.
pub fn bootstrap_variance_s2(indicators: impl AsRef<[bool]>, p: f64) -> Result<f64> {
    let bits = indicators.as_ref();
    let n = bits.len();
    if n < 2 {
        return Err(Error::invalid("bootstrap variance needs at least two observations"));
    }
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!("block parameter p = {p} is outside (0, 1]")));
    }
    let c = circular_autocovariances(bits);
    let nf = n as f64;
    let mut weight = 1.0;
    let mut tail = 0.0;
    for (h, ch) in c.iter().enumerate().skip(1) {
        weight *= 1.0 - p;
        if weight == 0.0 {
            break;
        }
        tail += (1.0 - h as f64 / nf) * weight * ch;
    }
    Ok((c[0] + 2.0 * tail).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    /// Direct circular sum `n^-1 sum_i (I_i - m)(I_{(i+h) mod n} - m)`.
    fn circular_oracle(bits: &[bool]) -> Vec<f64> {
        let n = bits.len();
        let x: Vec<f64> = bits.iter().map(|&b| b as u8 as f64).collect();
        let m = x.iter().sum::<f64>() / n as f64;
        (0..n)
            .map(|h| (0..n).map(|i| (x[i] - m) * (x[(i + h) % n] - m)).sum::<f64>() / n as f64)
            .collect()
    }

    fn s2_oracle(bits: &[bool], p: f64) -> f64 {
        let c = circular_oracle(bits);
        let n = bits.len() as f64;
        c[0] + 2.0
            * (1..bits.len())
                .map(|h| (1.0 - h as f64 / n) * (1.0 - p).powi(h as i32) * c[h])
                .sum::<f64>()
    }

    #[test]
    fn fft_route_matches_direct_circular_sum() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for n in [2, 3, 7, 64, 301] {
            let bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
            let fast = circular_autocovariances(&bits);
            let slow = circular_oracle(&bits);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn hand_example() {
        // bits 1,0,1,0,0,1 centre to e = (+,-,+,-,-,+) / 2, so C(h) = (sum_i e_i e_{i+h}) / 6:
        // h=1: -2/24, h=2: -2/24, h=3: +2/24, then C(4) = C(2), C(5) = C(1).
        let bits = [true, false, true, false, false, true];
        let twelfth = 1.0 / 12.0;
        let expect_c = [0.25, -twelfth, -twelfth, twelfth, -twelfth, -twelfth];
        for (a, b) in circular_oracle(&bits).iter().zip(expect_c) {
            assert!((a - b).abs() < 1e-15);
        }
        // s^2 = 1/4 + 2 (-5/144 - 2/144 + 1/192 - 1/576 - 1/2304) = 61/384
        let got = bootstrap_variance_s2(bits, 0.5).unwrap();
        assert!((got - 61.0 / 384.0).abs() < 1e-14, "{got}");
        assert!((got - s2_oracle(&bits, 0.5)).abs() < 1e-14);
    }

    #[test]
    fn constant_bits_have_zero_variance() {
        assert_eq!(bootstrap_variance_s2(vec![true; 50], 0.1).unwrap(), 0.0);
        assert_eq!(bootstrap_variance_s2(vec![false; 50], 0.1).unwrap(), 0.0);
    }

    #[test]
    fn unit_p_is_plain_variance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let bits: Vec<bool> = (0..500).map(|_| rng.random_bool(0.1)).collect();
        let c = circular_oracle(&bits);
        assert!((bootstrap_variance_s2(&bits, 1.0).unwrap() - c[0]).abs() < 1e-14);
    }

    #[test]
    fn matches_oracle_for_random_p() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let n = rng.random_range(2..200);
            let bits: Vec<bool> = (0..n).map(|_| rng.random_bool(0.2)).collect();
            let p = rng.random_range(0.001..1.0);
            let a = bootstrap_variance_s2(&bits, p).unwrap();
            let b = s2_oracle(&bits, p).max(0.0);
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn input_validation() {
        assert!(bootstrap_variance_s2([true], 0.5).is_err());
        assert!(bootstrap_variance_s2([true, false], 0.0).is_err());
    }

    proptest::proptest! {
        #[test]
        fn nonnegative_and_plain_variance_at_unit_p(
            bits in proptest::collection::vec(proptest::bool::weighted(0.1), 2..300),
            p in 0.001f64..1.0,
        ) {
            proptest::prop_assert!(bootstrap_variance_s2(&bits, p).unwrap() >= 0.0);
            let n = bits.len() as f64;
            let m = bits.iter().filter(|&&b| b).count() as f64 / n;
            let c0 = bits.iter().map(|&b| (b as u8 as f64 - m).powi(2)).sum::<f64>() / n;
            proptest::prop_assert!((bootstrap_variance_s2(&bits, 1.0).unwrap() - c0).abs() < 1e-12);
        }
    }
}
