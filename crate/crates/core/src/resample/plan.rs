use rand::Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, RESAMPLE_STREAM_BASE};

/// One realisation of the stationary bootstrap's block structure.
///
/// Blocks start at `starts[i]` (0-based, uniform on `0..n`) and run for
/// `lengths[i]` observations, `P(L = k) = p (1 - p)^(k - 1)`. `N` blocks are
/// drawn, the fewest whose lengths reach `n`; positions past the end of the
/// sample wrap around, and the concatenation is cut at `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPlan {
    n: usize,
    p: f64,
    seed: u64,
    replicate: u64,
    starts: Vec<usize>,
    lengths: Vec<usize>,
}

/// Plan for replicate 0 of `seed`.
pub fn draw_block_plan(n: usize, p: f64, seed: u64) -> Result<BlockPlan> {
    BlockPlan::draw(n, p, seed, 0)
}

impl BlockPlan {
    /// Replicate `r` of `seed` uses ChaCha streams `2r` (lengths) and `2r + 1`
    /// (starts) above the resampling base, so plans are independent of the
    /// order in which replicates are drawn.
    pub fn draw(n: usize, p: f64, seed: u64, replicate: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("block plan for an empty sample"));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::invalid(format!("block parameter p = {p} is outside (0, 1]")));
        }
        let geometric = Geometric::new(p).map_err(|e| Error::invalid(e.to_string()))?;
        let mut length_rng = stream_rng(seed, RESAMPLE_STREAM_BASE + 2 * replicate);
        let mut lengths = Vec::new();
        let mut covered = 0usize;
        while covered < n {
            // Geometric counts failures before the first success
            let l = geometric.sample(&mut length_rng).saturating_add(1);
            let l = usize::try_from(l).unwrap_or(usize::MAX);
            covered = covered.saturating_add(l);
            lengths.push(l);
        }
        let mut start_rng = Self::start_stream(seed, replicate);
        let starts = (0..lengths.len()).map(|_| start_rng.random_range(0..n)).collect();
        Ok(Self {
            n,
            p,
            seed,
            replicate,
            starts,
            lengths,
        })
    }

    /// The RNG stream block starts are drawn from.
    pub fn start_stream(seed: u64, replicate: u64) -> rand_chacha::ChaCha8Rng {
        stream_rng(seed, RESAMPLE_STREAM_BASE + 2 * replicate + 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    /// `N`
    pub fn block_count(&self) -> usize {
        self.lengths.len()
    }

    /// `(start, length)` per block with the last block cut so lengths sum to `n`.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let mut remaining = self.n;
        self.starts.iter().zip(&self.lengths).map(move |(&s, &l)| {
            let take = l.min(remaining);
            remaining -= take;
            (s, take)
        })
    }

    /// Source index for each of the `n` output positions.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.n;
        self.segments()
            .flat_map(move |(s, l)| (0..l).map(move |j| (s + j) % n))
    }

    pub fn materialize<T: Copy>(&self, data: &[T]) -> Result<Vec<T>> {
        self.check_len(data.len())?;
        Ok(self.indices().map(|i| data[i]).collect())
    }

    /// Applies this one plan to several aligned sequences.
    pub fn materialize_aligned<T: Copy>(&self, data: &[&[T]]) -> Result<Vec<Vec<T>>> {
        for d in data {
            self.check_len(d.len())?;
        }
        let idx: Vec<usize> = self.indices().collect();
        Ok(data
            .iter()
            .map(|d| idx.iter().map(|&i| d[i]).collect())
            .collect())
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::invalid(format!(
                "plan drawn for n = {} applied to a sequence of length {len}",
                self.n
            )));
        }
        Ok(())
    }

    #[cfg(test)]
    pub(crate) fn from_parts(n: usize, starts: Vec<usize>, lengths: Vec<usize>) -> Self {
        Self {
            n,
            p: 1.0,
            seed: 0,
            replicate: 0,
            starts,
            lengths,
        }
    }
}
