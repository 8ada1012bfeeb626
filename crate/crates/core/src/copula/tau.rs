//! Conversions between Kendall's τ and one-parameter copula families.

use std::f64::consts::FRAC_PI_2;

use super::spec::Family;
use crate::error::{Error, Result};
use crate::numeric::one_minus_debye1;

/// Kendall's τ of a Frank copula: `1 - (4/θ)(1 - D1(θ))`, odd in θ.
pub fn frank_tau(theta: f64) -> f64 {
    if theta == 0.0 {
        return 0.0;
    }
    let a = theta.abs();
    let t = 1.0 - 4.0 / a * one_minus_debye1(a);
    t.copysign(theta)
}

fn frank_theta(tau: f64) -> f64 {
    let target = tau.abs();
    let mut lo = 0.0;
    let mut hi = 1.0;
    while frank_tau(hi) < target {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if frank_tau(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    (0.5 * (lo + hi)).copysign(tau)
}

/// Parameter of `family` whose Kendall's τ equals `tau`.
///
/// Clayton and Gumbel are restricted to positive dependence; Frank accepts
/// any nonzero τ in (-1, 1); normal and t families return the correlation
/// `sin(πτ/2)`.
pub fn tau_to_param(family: Family, tau: f64) -> Result<f64> {
    if !(tau > -1.0 && tau < 1.0) {
        return Err(Error::Domain(format!("Kendall's tau must lie in (-1,1), got {tau}")));
    }
    match family {
        Family::Clayton | Family::Gumbel if tau <= 0.0 => Err(Error::Domain(format!(
            "{family} copula needs tau in (0,1), got {tau}"
        ))),
        Family::Clayton => Ok(2.0 * tau / (1.0 - tau)),
        Family::Gumbel => Ok(1.0 / (1.0 - tau)),
        Family::Frank if tau == 0.0 => Err(Error::Domain(
            "Frank copula needs a nonzero tau".into(),
        )),
        Family::Frank => Ok(frank_theta(tau)),
        Family::Normal | Family::NormalExchangeable | Family::StudentT => {
            Ok((FRAC_PI_2 * tau).sin())
        }
        Family::Independence => Err(Error::Unsupported(
            "independence copula has no parameter".into(),
        )),
    }
}

/// Kendall's τ implied by a family parameter (inverse of [`tau_to_param`]).
pub fn param_to_tau(family: Family, param: f64) -> Result<f64> {
    if !param.is_finite() {
        return Err(Error::Domain(format!("parameter must be finite, got {param}")));
    }
    match family {
        Family::Clayton if param > 0.0 => Ok(param / (param + 2.0)),
        Family::Gumbel if param >= 1.0 => Ok(1.0 - 1.0 / param),
        Family::Frank if param != 0.0 => Ok(frank_tau(param)),
        Family::Normal | Family::NormalExchangeable | Family::StudentT
            if (-1.0..=1.0).contains(&param) =>
        {
            Ok(param.asin() / FRAC_PI_2)
        }
        Family::Independence => Err(Error::Unsupported(
            "independence copula has no parameter".into(),
        )),
        _ => Err(Error::Domain(format!("invalid {family} parameter {param}"))),
    }
}
