//! Stationary bootstrap and permutation procedures.

mod bootstrap;
mod permutation;
mod plan;
mod variance;

pub use bootstrap::{
    bootstrap_bands, bootstrap_bands_for_lags, BandMethod, BootstrapBands, BootstrapConfig,
    ResampleScheme,
};
pub use permutation::{permutation_bands, permutation_bands_at, permutation_bands_from_orders, PermutationBands};
pub use plan::{draw_block_plan, BlockPlan};
pub use variance::{bootstrap_variance_s2, circular_autocovariances, sample_autocovariances};
