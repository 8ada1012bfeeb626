//! Closed-form distribution functions and box probabilities.

use super::sample::Sample;
use super::sampling::sample_copula;
use super::spec::CopulaSpec;
use crate::empirical::empirical_copula_eval;
use crate::error::{Error, Result};
use crate::numeric::Rng;

/// Largest dimension for inclusion-exclusion (2^d corner evaluations).
pub const MAX_CLOSED_FORM_DIM: usize = 20;

fn clayton_gen_inv(u: f64, theta: f64) -> f64 {
    (-theta * u.ln()).exp_m1()
}

fn clayton_gen(t: f64, theta: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    (-t.ln_1p() / theta).exp()
}

fn frank_gen_inv(u: f64, theta: f64) -> f64 {
    -((-theta * u).exp_m1() / (-theta).exp_m1()).ln()
}

fn frank_gen(t: f64, theta: f64) -> f64 {
    -((-t).exp() * (-theta).exp_m1()).ln_1p() / theta
}

fn gumbel_gen_inv(u: f64, theta: f64) -> f64 {
    (-u.ln()).powf(theta)
}

fn gumbel_gen(t: f64, theta: f64) -> f64 {
    (-t.powf(1.0 / theta)).exp()
}

fn check_point(spec: &CopulaSpec, u: &[f64]) -> Result<()> {
    if u.len() != spec.dim() {
        return Err(Error::Shape(format!(
            "point has {} coordinates, copula has dimension {}",
            u.len(),
            spec.dim()
        )));
    }
    if let Some(v) = u.iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
        return Err(Error::Domain(format!("coordinate {v} outside [0,1]")));
    }
    Ok(())
}

/// `C(u)` for the families with a closed-form distribution function.
pub fn copula_cdf(spec: &CopulaSpec, u: &[f64]) -> Result<f64> {
    spec.validate()?;
    check_point(spec, u)?;
    if let CopulaSpec::Empirical { points } = spec {
        return Ok(empirical_copula_eval(points, u));
    }
    if matches!(spec, CopulaSpec::Normal { .. } | CopulaSpec::NormalExchangeable { .. } | CopulaSpec::StudentT { .. }) {
        return Err(Error::Unsupported(format!(
            "no closed-form distribution function for {}; use Monte Carlo box probabilities",
            spec.describe()
        )));
    }
    if u.iter().any(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let value = match spec {
        CopulaSpec::Independence { .. } => u.iter().product(),
        CopulaSpec::Clayton { theta, .. } => {
            clayton_gen(u.iter().map(|&v| clayton_gen_inv(v, *theta)).sum(), *theta)
        }
        CopulaSpec::Frank { theta, .. } => {
            frank_gen(u.iter().map(|&v| frank_gen_inv(v, *theta)).sum(), *theta)
        }
        CopulaSpec::Gumbel { theta, .. } => {
            gumbel_gen(u.iter().map(|&v| gumbel_gen_inv(v, *theta)).sum(), *theta)
        }
        CopulaSpec::NestedClayton(nc) => {
            let mut s: f64 = nc
                .root_members()
                .iter()
                .map(|&j| clayton_gen_inv(u[j], nc.theta0))
                .sum();
            for g in &nc.groups {
                let inner = clayton_gen(
                    g.members.iter().map(|&j| clayton_gen_inv(u[j], g.theta)).sum(),
                    g.theta,
                );
                s += clayton_gen_inv(inner, nc.theta0);
            }
            clayton_gen(s, nc.theta0)
        }
        _ => unreachable!("handled above"),
    };
    Ok(value.clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoxMethod {
    ClosedForm,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxProbability {
    pub value: f64,
    /// Binomial standard error of the Monte Carlo estimate; `None` for the
    /// closed-form path.
    pub std_error: Option<f64>,
}

/// `P(lower < U <= upper)` by inclusion-exclusion over `copula_cdf`, or by
/// counting hits in `n_mc` draws.
pub fn box_probability(
    spec: &CopulaSpec,
    lower: &[f64],
    upper: &[f64],
    method: BoxMethod,
    n_mc: usize,
    rng: &mut Rng,
) -> Result<BoxProbability> {
    spec.validate()?;
    check_point(spec, lower)?;
    check_point(spec, upper)?;
    if lower.iter().zip(upper).any(|(l, u)| l > u) {
        return Err(Error::Domain("box lower corner exceeds upper corner".into()));
    }
    let d = spec.dim();
    match method {
        BoxMethod::ClosedForm => {
            if d > MAX_CLOSED_FORM_DIM {
                return Err(Error::Unsupported(format!(
                    "inclusion-exclusion refused for d={d} > {MAX_CLOSED_FORM_DIM}"
                )));
            }
            let mut corner = vec![0.0; d];
            let mut total = 0.0;
            for mask in 0u32..(1u32 << d) {
                let mut lowers = 0;
                for (j, c) in corner.iter_mut().enumerate() {
                    if mask & (1 << j) != 0 {
                        *c = lower[j];
                        lowers += 1;
                    } else {
                        *c = upper[j];
                    }
                }
                let c = copula_cdf(spec, &corner)?;
                if lowers % 2 == 0 {
                    total += c;
                } else {
                    total -= c;
                }
            }
            Ok(BoxProbability {
                value: total.clamp(0.0, 1.0),
                std_error: None,
            })
        }
        BoxMethod::MonteCarlo => {
            if n_mc == 0 {
                return Err(Error::Domain("Monte Carlo box probability needs n_mc >= 1".into()));
            }
            let hits = count_hits(&sample_copula(spec, n_mc, rng)?, lower, upper);
            let p = hits as f64 / n_mc as f64;
            Ok(BoxProbability {
                value: p,
                std_error: Some((p * (1.0 - p) / n_mc as f64).sqrt()),
            })
        }
    }
}

fn count_hits(sample: &Sample, lower: &[f64], upper: &[f64]) -> usize {
    sample
        .as_array()
        .rows()
        .into_iter()
        .filter(|row| {
            row.iter()
                .zip(lower.iter().zip(upper))
                .all(|(&x, (&l, &u))| x > l && x <= u)
        })
        .count()
}
