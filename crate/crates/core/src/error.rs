use thiserror::Error;

use crate::models::GarchParams;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("degenerate threshold: the resolved threshold is zero")]
    DegenerateThreshold,

    /// The conditioning event never occurs. `q` is the quantile level of the
    /// conditioning threshold when it was resolved from data.
    #[error("no exceedances of the conditioning threshold (q = {}, n = {n}); try a lower quantile level", .q.map_or("fixed".to_string(), |q| q.to_string()))]
    NoExceedances { q: Option<f64>, n: usize },

    #[error("unstable resample: {skipped} of {replicates} bootstrap replicates had no conditioning event (skip rate {skip_rate:.4})")]
    UnstableResample {
        skipped: usize,
        replicates: usize,
        skip_rate: f64,
    },

    #[error("GARCH fit did not converge after {iterations} iterations (projected gradient norm {gradient_norm:.3e}, last iterate {last:?})")]
    FitDiverged {
        last: GarchParams,
        iterations: usize,
        gradient_norm: f64,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
