//! Estimation of extremal serial dependence in stationary time series.
//!
//! The crate is organised around the sample extremogram, the conditional
//! frequency with which an extreme event at time `t` is followed by another
//! extreme event `h` steps later:
//!
//! ```text
//! rho(h) = #{t <= n-h : X_t / a_m in A, X_{t+h} / a_m in B} / #{t <= n : X_t / a_m in A}
//! ```
//!
//! * [`series`], [`region`], [`threshold`], [`indicator`] hold the data types:
//!   observations, extremal regions bounded away from zero, empirical quantile
//!   thresholds and the binary indicator sequences derived from them.
//! * [`extremogram`] implements the univariate, cross, trivariate and
//!   return-times estimators on top of a common event representation.
//! * [`resample`] provides the stationary bootstrap (bands for every estimator
//!   family plus the closed-form bootstrap variance) and permutation bands.
//! * [`models`] simulates GARCH(1,1) and stochastic volatility processes and
//!   fits GARCH(1,1) by Gaussian quasi maximum likelihood for devolatilization.
//!
//! Everything random is driven by ChaCha8 streams keyed by a `u64` seed, see
//! [`rng`].

pub mod error;
pub mod extremogram;
pub mod indicator;
pub mod models;
pub mod region;
pub mod resample;
pub mod rng;
pub mod series;
pub mod threshold;

pub use error::{Error, Result};
pub use extremogram::{
    cross_extremogram, return_times_extremogram, sample_extremogram,
    tri_extremogram_union_source, tri_extremogram_union_target, ExtremalEvents,
    ExtremogramEstimate, Family, GeomHistogram,
};
pub use indicator::{make_indicators, IndicatorSeries};
pub use models::{
    devolatilize, fit_garch_qmle, simulate_garch, simulate_sv, GarchParams, SvParams,
    VolatilityDecomposition,
};
pub use region::{ExtremalRegion, Interval};
pub use resample::{
    bootstrap_bands, bootstrap_variance_s2, draw_block_plan, permutation_bands, BandMethod,
    BlockPlan, BootstrapBands, BootstrapConfig, PermutationBands, ResampleScheme,
};
pub use series::{log_returns, TimeSeries};
pub use threshold::{empirical_quantile, Tail, ThresholdSpec};
