//! Latent-variable samplers for the frailty constructions of Archimedean
//! copulas.

use std::f64::consts::PI;

use rand_distr::{Distribution, Gamma};

use super::rng::Rng;
use crate::error::{Error, Result};

/// One draw from Gamma(shape, rate 1).
pub fn sample_gamma(shape: f64, rng: &mut Rng) -> Result<f64> {
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(Error::Domain(format!("gamma shape must be > 0, got {shape}")));
    }
    let dist = Gamma::new(shape, 1.0).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(dist.sample(rng))
}

fn check_stable_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!(
            "stable index must lie in (0,1), got {alpha}"
        )));
    }
    Ok(())
}

/// Positive stable variate with Laplace transform `exp(-t^alpha)`
/// (Chambers-Mallows-Stuck / Kanter representation).
pub fn sample_positive_stable(alpha: f64, rng: &mut Rng) -> Result<f64> {
    check_stable_alpha(alpha)?;
    Ok(positive_stable(alpha, rng))
}

fn positive_stable(alpha: f64, rng: &mut Rng) -> f64 {
    let u = PI * rng.uniform();
    let e = rng.exp1();
    let ln_s = (alpha * u).sin().ln() - u.sin().ln() / alpha
        + (1.0 - alpha) / alpha * (((1.0 - alpha) * u).sin().ln() - e.ln());
    ln_s.exp()
}

/// Exponentially tilted positive stable variate `V` with
/// `E[exp(-tV)] = exp(-((tilt + t)^alpha - tilt^alpha))`.
///
/// `V` is split into `m` iid pieces with Laplace exponent
/// `((tilt + t)^alpha - tilt^alpha) / m`; each piece is a scaled stable draw
/// accepted with probability `exp(-tilt * S)`. For small `tilt^alpha` a single
/// piece suffices (expected at most 10 proposals); otherwise
/// `m = ceil(tilt^alpha)` keeps every piece's acceptance rate above `1/e`.
pub fn sample_exp_tilted_stable(alpha: f64, tilt: f64, rng: &mut Rng) -> Result<f64> {
    check_stable_alpha(alpha)?;
    if !(tilt >= 0.0) || !tilt.is_finite() {
        return Err(Error::Domain(format!("tilt must be finite and >= 0, got {tilt}")));
    }
    if tilt == 0.0 {
        return Ok(positive_stable(alpha, rng));
    }
    let mass = tilt.powf(alpha);
    let pieces = if mass <= 10f64.ln() {
        1
    } else {
        mass.ceil() as u64
    };
    let scale = (pieces as f64).powf(-1.0 / alpha);
    let mut total = 0.0;
    for _ in 0..pieces {
        loop {
            let s = scale * positive_stable(alpha, rng);
            if rng.uniform() <= (-tilt * s).exp() {
                total += s;
                break;
            }
        }
    }
    Ok(total)
}

/// Logarithmic-series variate: `P(V = k) = -p^k / (k ln(1 - p))`.
pub fn sample_log_series(p: f64, rng: &mut Rng) -> Result<u64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "log-series parameter must lie in (0,1), got {p}"
        )));
    }
    Ok(log_series(p, (-p).ln_1p(), rng))
}

/// Kemp's LK algorithm; `ln_q` is `ln(1 - p)`, passed separately so callers
/// with `p` close to one keep precision.
pub(crate) fn log_series(p: f64, ln_q: f64, rng: &mut Rng) -> u64 {
    let u = rng.uniform();
    if u > p {
        return 1;
    }
    let q = -(rng.uniform() * ln_q).exp_m1();
    if u < q * q {
        let k = (1.0 + u.ln() / q.ln()).floor();
        if k >= u64::MAX as f64 {
            u64::MAX
        } else {
            k as u64
        }
    } else if u > q {
        1
    } else {
        2
    }
}
