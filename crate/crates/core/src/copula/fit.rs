//! Candidate fitting by Kendall's-τ inversion (plus a ν grid search for t).

use ndarray::Array2;

use super::density::TCopulaDensity;
use super::sample::Sample;
use super::spec::{CopulaSpec, Family};
use super::tau::tau_to_param;
use crate::empirical::kendalls_tau_matrix;
use crate::error::{Error, Result};
use crate::numeric::{t_quantile, CorrelationMatrix};

/// Degrees-of-freedom grid for the t-copula pseudo-likelihood search.
pub const NU_GRID: std::ops::RangeInclusive<u32> = 1..=30;

pub const MIN_FIT_SIZE: usize = 10;

fn average_offdiagonal(tau: &Array2<f64>) -> f64 {
    let d = tau.nrows();
    let mut sum = 0.0;
    for i in 0..d {
        for j in 0..i {
            sum += tau[[i, j]];
        }
    }
    sum / (d * (d - 1) / 2) as f64
}

fn invert(family: Family, tau: f64) -> Result<f64> {
    tau_to_param(family, tau).map_err(|e| {
        Error::Fit(format!("average Kendall's tau {tau:.4} not attainable for {family}: {e}"))
    })
}

/// Pairwise τ inversion `sin(πτ/2)` followed by PSD repair.
fn correlation_from_tau(tau: &Array2<f64>) -> Result<CorrelationMatrix> {
    let d = tau.nrows();
    let mut p = Array2::<f64>::eye(d);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                p[[i, j]] = (std::f64::consts::FRAC_PI_2 * tau[[i, j]]).sin();
            }
        }
    }
    CorrelationMatrix::repaired(p)
}

/// Degrees of freedom on [`NU_GRID`] maximizing the t-copula pseudo
/// log-likelihood for a fixed correlation matrix. Ties keep the smaller ν.
pub fn fit_t_nu(data: &Sample, p: &CorrelationMatrix) -> Result<(f64, f64)> {
    let density = TCopulaDensity::new(p)?;
    let d = data.d();
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    let mut x = vec![0.0; d];
    for nu in NU_GRID {
        let nu = nu as f64;
        let mut ll = 0.0;
        for row in data.as_array().rows() {
            for (xj, &uj) in x.iter_mut().zip(row.iter()) {
                *xj = t_quantile(uj, nu)?;
            }
            ll += density.log_density_at_quantiles(&x, nu);
        }
        if ll > best.1 {
            best = (nu, ll);
        }
    }
    if !best.1.is_finite() {
        return Err(Error::Fit("t-copula pseudo-likelihood is not finite".into()));
    }
    Ok(best)
}

/// Fits `family` to pseudo-observations.
pub fn fit_copula(family: Family, data: &Sample) -> Result<CopulaSpec> {
    let (n, d) = (data.n(), data.d());
    if n < MIN_FIT_SIZE {
        return Err(Error::Fit(format!("need at least {MIN_FIT_SIZE} observations, got {n}")));
    }
    if d < 2 {
        return Err(Error::Fit("need at least two columns".into()));
    }
    if family == Family::Independence {
        return Ok(CopulaSpec::Independence { d });
    }
    let tau = kendalls_tau_matrix(data).map_err(|e| Error::Fit(e.to_string()))?;
    let avg = average_offdiagonal(&tau);
    let spec = match family {
        Family::Independence => unreachable!(),
        Family::Clayton => CopulaSpec::Clayton {
            d,
            theta: invert(family, avg)?,
        },
        Family::Gumbel => CopulaSpec::Gumbel {
            d,
            theta: invert(family, avg)?,
        },
        Family::Frank => {
            if avg <= 0.0 {
                return Err(Error::Fit(format!(
                    "average Kendall's tau {avg:.4} not attainable for frank (positive dependence only)"
                )));
            }
            CopulaSpec::Frank {
                d,
                theta: invert(family, avg)?,
            }
        }
        Family::NormalExchangeable => CopulaSpec::NormalExchangeable {
            d,
            rho: invert(family, avg)?,
        },
        Family::Normal => CopulaSpec::Normal {
            p: correlation_from_tau(&tau)?,
        },
        Family::StudentT => {
            let p = correlation_from_tau(&tau)?;
            let (nu, _) = fit_t_nu(data, &p)?;
            CopulaSpec::StudentT { nu, p }
        }
    };
    spec.validate().map_err(|e| Error::Fit(e.to_string()))?;
    Ok(spec)
}
