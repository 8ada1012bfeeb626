//! Exact samplers: elliptical constructions for normal and t copulas,
//! frailty (Marshall-Olkin) constructions for the Archimedean families.

use ndarray::Array2;

use super::sample::{open_unit, Sample};
use super::spec::{CopulaSpec, NestedClayton};
use crate::empirical::resample_rows;
use crate::error::{Error, Result};
use crate::numeric::{
    log_series, normal_cdf, sample_exp_tilted_stable, sample_gamma, sample_positive_stable, t_cdf,
    CorrelationMatrix, Rng,
};

/// Clayton generator `(1 + t)^(-1/θ)`.
#[inline]
fn clayton_psi(t: f64, theta: f64) -> f64 {
    (-t.ln_1p() / theta).exp()
}

/// Draws `n` iid observations from `spec`.
pub fn sample_copula(spec: &CopulaSpec, n: usize, rng: &mut Rng) -> Result<Sample> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Domain("sample size must be >= 1".into()));
    }
    let d = spec.dim();
    let mut out = Array2::<f64>::zeros((n, d));
    match spec {
        CopulaSpec::Independence { .. } => {
            out.mapv_inplace(|_| rng.uniform());
        }
        CopulaSpec::Normal { p } => elliptical(&mut out, p, None, rng)?,
        CopulaSpec::NormalExchangeable { d, rho } => {
            elliptical(&mut out, &CorrelationMatrix::exchangeable(*d, *rho)?, None, rng)?
        }
        CopulaSpec::StudentT { nu, p } => elliptical(&mut out, p, Some(*nu), rng)?,
        CopulaSpec::Clayton { theta, .. } => {
            for mut row in out.rows_mut() {
                let v = sample_gamma(1.0 / theta, rng)?;
                for u in row.iter_mut() {
                    *u = open_unit(clayton_psi(rng.exp1() / v, *theta));
                }
            }
        }
        CopulaSpec::Gumbel { theta, .. } => {
            let alpha = 1.0 / theta;
            for mut row in out.rows_mut() {
                let v = if alpha < 1.0 {
                    sample_positive_stable(alpha, rng)?
                } else {
                    1.0
                };
                for u in row.iter_mut() {
                    *u = open_unit((-(rng.exp1() / v).powf(alpha)).exp());
                }
            }
        }
        CopulaSpec::Frank { theta, .. } => {
            // bivariate negative dependence: C_{-θ}(u, v) = u - C_θ(u, 1 - v)
            let (theta, flip) = if *theta < 0.0 { (-theta, true) } else { (*theta, false) };
            let p = -(-theta).exp_m1();
            let em1 = (-theta).exp_m1();
            for mut row in out.rows_mut() {
                let v = log_series(p, -theta, rng) as f64;
                for u in row.iter_mut() {
                    let w = (-rng.exp1() / v).exp();
                    *u = open_unit(-(w * em1).ln_1p() / theta);
                }
                if flip {
                    row[1] = open_unit(1.0 - row[1]);
                }
            }
        }
        CopulaSpec::NestedClayton(nc) => nested_clayton(&mut out, nc, rng)?,
        CopulaSpec::Empirical { points } => return Ok(resample_rows(points, n, rng)),
    }
    Ok(Sample::from_unit_values(out))
}

fn elliptical(out: &mut Array2<f64>, p: &CorrelationMatrix, nu: Option<f64>, rng: &mut Rng) -> Result<()> {
    let l = p.cholesky()?;
    let d = p.dim();
    let mut z = vec![0.0; d];
    for mut row in out.rows_mut() {
        for zi in z.iter_mut() {
            *zi = rng.normal();
        }
        let scale = match nu {
            Some(nu) => (nu / (2.0 * sample_gamma(0.5 * nu, rng)?)).sqrt(),
            None => 1.0,
        };
        for (i, u) in row.iter_mut().enumerate() {
            let mut x = 0.0;
            for k in 0..=i {
                x += l[[i, k]] * z[k];
            }
            let x = x * scale;
            *u = open_unit(match nu {
                Some(nu) => t_cdf(x, nu),
                None => normal_cdf(x),
            });
        }
    }
    Ok(())
}

/// Inner frailties are `V0^(1/α) W` with `W` exponentially tilted stable of
/// index `α = θ0/θk` and tilt `V0^(1/α)`, which has Laplace transform
/// `exp(-V0((1+t)^α - 1))`.
fn nested_clayton(out: &mut Array2<f64>, nc: &NestedClayton, rng: &mut Rng) -> Result<()> {
    let root = nc.root_members();
    for mut row in out.rows_mut() {
        let v0 = sample_gamma(1.0 / nc.theta0, rng)?;
        for &j in &root {
            row[j] = open_unit(clayton_psi(rng.exp1() / v0, nc.theta0));
        }
        for g in &nc.groups {
            let alpha = nc.theta0 / g.theta;
            let v = if alpha >= 1.0 {
                v0
            } else {
                let scale = v0.powf(1.0 / alpha);
                scale * sample_exp_tilted_stable(alpha, scale, rng)?
            };
            for &j in &g.members {
                row[j] = open_unit(clayton_psi(rng.exp1() / v, g.theta));
            }
        }
    }
    Ok(())
}
