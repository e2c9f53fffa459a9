//! Seeded random streams.
//!
//! All randomness comes from [`ChaCha8Rng`]. A `(seed, stream)` pair selects
//! an independent ChaCha stream, so bootstrap replicate `r` always sees the
//! same numbers no matter how replicates are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream ids below this value are reserved for the simulators; resampling
/// derives its per-replicate streams above it.
pub(crate) const RESAMPLE_STREAM_BASE: u64 = 1 << 32;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
