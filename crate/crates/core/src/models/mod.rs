//! Validation processes and GARCH(1,1) devolatilization.

mod fit;
mod garch;
mod sv;

pub use fit::{devolatilize, fit_garch_qmle, FitReport, VolatilityDecomposition};
pub use garch::{garch_recursion, simulate_garch, GarchParams, GarchPath};
pub use sv::{simulate_sv, sv_recursion, SvParams};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};

use crate::error::{Error, Result};

/// `n` innovations: Student-t(`dof`) via `N(0,1) / sqrt(chi2(dof) / dof)`
/// (the `rand_distr` sampler), or standard normal when `dof` is `None`.
/// `standardize` rescales the t draws by `sqrt((dof - 2) / dof)` to unit variance.
pub(crate) fn draw_innovations<R: Rng>(
    rng: &mut R,
    n: usize,
    dof: Option<f64>,
    standardize: bool,
) -> Result<Vec<f64>> {
    match dof {
        None => Ok((0..n).map(|_| StandardNormal.sample(rng)).collect()),
        Some(nu) => {
            let t = StudentT::new(nu).map_err(|e| Error::invalid(format!("Student-t({nu}): {e}")))?;
            let scale = if standardize {
                if nu <= 2.0 {
                    return Err(Error::invalid(format!(
                        "cannot standardize Student-t innovations with {nu} <= 2 degrees of freedom"
                    )));
                }
                ((nu - 2.0) / nu).sqrt()
            } else {
                1.0
            };
            Ok((0..n).map(|_| t.sample(rng) * scale).collect())
        }
    }
}
