//! Copula models: descriptions, exact samplers, closed-form distribution
//! functions, τ conversions and candidate fitting.

mod cdf;
mod density;
mod fit;
mod sample;
mod sampling;
mod spec;
mod tau;

pub use cdf::{box_probability, copula_cdf, BoxMethod, BoxProbability, MAX_CLOSED_FORM_DIM};
pub use density::{t_copula_log_density, TCopulaDensity};
pub use fit::{fit_copula, fit_t_nu, MIN_FIT_SIZE, NU_GRID};
pub use sample::Sample;
pub use sampling::sample_copula;
pub use spec::{
    average_pairwise_tau, hierarchical_correlation, ClaytonGroup, CopulaSpec, Family, NestedClayton,
};
pub use tau::{frank_tau, param_to_tau, tau_to_param};
