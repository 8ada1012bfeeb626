use ndarray::Array2;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::numeric::{t_ln_pdf, t_quantile, CorrelationMatrix};

/// t-copula log density with a cached Cholesky factor, for evaluating many
/// points (and several ν) against one correlation matrix.
#[derive(Clone, Debug)]
pub struct TCopulaDensity {
    chol: Array2<f64>,
    half_log_det: f64,
}

impl TCopulaDensity {
    pub fn new(p: &CorrelationMatrix) -> Result<Self> {
        let chol = p.cholesky()?;
        let d = p.dim();
        let mut half_log_det = 0.0;
        for i in 0..d {
            let l = chol[[i, i]];
            if !(l > 1e-12) {
                return Err(Error::Matrix(
                    "t-copula density needs a non-singular correlation matrix".into(),
                ));
            }
            half_log_det += l.ln();
        }
        Ok(TCopulaDensity { chol, half_log_det })
    }

    pub fn dim(&self) -> usize {
        self.chol.nrows()
    }

    /// Log density at an interior point `u`.
    pub fn log_density(&self, u: &[f64], nu: f64) -> Result<f64> {
        let d = self.dim();
        if u.len() != d {
            return Err(Error::Shape(format!("point has {} coordinates, expected {d}", u.len())));
        }
        let mut x = Vec::with_capacity(d);
        for &ui in u {
            x.push(t_quantile(ui, nu)?);
        }
        Ok(self.log_density_at_quantiles(&x, nu))
    }

    /// Same as [`log_density`](Self::log_density) with the t quantiles of the
    /// coordinates already computed.
    pub fn log_density_at_quantiles(&self, x: &[f64], nu: f64) -> f64 {
        let d = self.dim();
        // forward substitution L z = x
        let mut z = vec![0.0; d];
        let mut maha = 0.0;
        for i in 0..d {
            let mut r = x[i];
            for k in 0..i {
                r -= self.chol[[i, k]] * z[k];
            }
            z[i] = r / self.chol[[i, i]];
            maha += z[i] * z[i];
        }
        let df = d as f64;
        let joint = ln_gamma(0.5 * (nu + df)) - ln_gamma(0.5 * nu)
            - 0.5 * df * (nu * std::f64::consts::PI).ln()
            - self.half_log_det
            - 0.5 * (nu + df) * (maha / nu).ln_1p();
        let margins: f64 = x.iter().map(|&xi| t_ln_pdf(xi, nu)).sum();
        joint - margins
    }
}

/// Log density of the t copula with `nu` degrees of freedom and correlation
/// matrix `p` at the interior point `u`.
pub fn t_copula_log_density(u: &[f64], nu: f64, p: &CorrelationMatrix) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::Domain(format!("degrees of freedom must be > 0, got {nu}")));
    }
    if u.iter().any(|&v| !(v > 0.0 && v < 1.0)) {
        return Err(Error::Domain("t-copula density needs an interior point".into()));
    }
    TCopulaDensity::new(p)?.log_density(u, nu)
}
