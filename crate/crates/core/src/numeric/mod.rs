//! Deterministic scalar and matrix numerics plus the seedable random
//! primitives every other module draws from.

mod linalg;
mod random;
mod rng;
mod special;

pub use linalg::{cholesky, random_correlation_matrix, CorrelationMatrix, PSD_TOLERANCE};
pub(crate) use random::log_series;
pub use random::{sample_exp_tilted_stable, sample_gamma, sample_log_series, sample_positive_stable};
pub use rng::Rng;
pub(crate) use special::one_minus_debye1;
pub use special::{debye1, normal_cdf, normal_pdf, std_normal_quantile, t_cdf, t_ln_pdf, t_quantile};
