//! Exact Rosenblatt transforms for the families with tractable conditional
//! distributions: independence, Clayton, normal and t.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::{Array2, ArrayView1, ArrayViewMut1, Axis, Zip};

use crate::copula::{sample_copula, CopulaSpec, Sample};
use crate::empirical::cvm_score;
use crate::error::{Error, Result};
use crate::numeric::{normal_cdf, std_normal_quantile, t_cdf, t_quantile, CorrelationMatrix, Rng};

/// Number of uniform replicates in the null CvM distribution.
pub const NULL_REPLICATES: usize = 200;
const NULL_SEED: u64 = 0x5eed_0f_4e11;

#[derive(Clone, Debug)]
enum Kind {
    Independence,
    Clayton { theta: f64 },
    Normal { chol: Array2<f64> },
    StudentT { nu: f64, chol: Array2<f64> },
}

/// A copula whose Rosenblatt transform is available in closed form.
#[derive(Clone, Debug)]
pub struct RosenblattSpec {
    copula: CopulaSpec,
    kind: Kind,
}

fn nonsingular_cholesky(p: &CorrelationMatrix) -> Result<Array2<f64>> {
    let chol = p.cholesky()?;
    if chol.diag().iter().any(|&l| !(l > 1e-12)) {
        return Err(Error::Matrix(
            "Rosenblatt transform needs a non-singular correlation matrix".into(),
        ));
    }
    Ok(chol)
}

impl RosenblattSpec {
    pub fn new(spec: &CopulaSpec) -> Result<Self> {
        spec.validate()?;
        let kind = match spec {
            CopulaSpec::Independence { .. } => Kind::Independence,
            CopulaSpec::Clayton { theta, .. } => Kind::Clayton { theta: *theta },
            CopulaSpec::Normal { p } => Kind::Normal {
                chol: nonsingular_cholesky(p)?,
            },
            CopulaSpec::NormalExchangeable { d, rho } => Kind::Normal {
                chol: nonsingular_cholesky(&CorrelationMatrix::exchangeable(*d, *rho)?)?,
            },
            CopulaSpec::StudentT { nu, p } => Kind::StudentT {
                nu: *nu,
                chol: nonsingular_cholesky(p)?,
            },
            other => {
                return Err(Error::Unsupported(format!(
                    "no closed-form Rosenblatt transform for {}",
                    other.describe()
                )))
            }
        };
        Ok(RosenblattSpec {
            copula: spec.clone(),
            kind,
        })
    }

    pub fn copula(&self) -> &CopulaSpec {
        &self.copula
    }

    pub fn dim(&self) -> usize {
        self.copula.dim()
    }

    fn transform_row(&self, u: ArrayView1<'_, f64>, mut out: ArrayViewMut1<'_, f64>) -> Result<()> {
        let d = u.len();
        match &self.kind {
            Kind::Independence => out.assign(&u),
            Kind::Clayton { theta } => {
                let mut s = 0.0;
                for j in 0..d {
                    let a = (-theta * u[j].ln()).exp_m1();
                    out[j] = if j == 0 {
                        u[0]
                    } else {
                        (-(j as f64 + 1.0 / theta) * (a / (1.0 + s)).ln_1p()).exp()
                    };
                    s += a;
                }
            }
            Kind::Normal { chol } => {
                let mut z = vec![0.0; d];
                for j in 0..d {
                    let mut r = std_normal_quantile(u[j])?;
                    for k in 0..j {
                        r -= chol[[j, k]] * z[k];
                    }
                    z[j] = r / chol[[j, j]];
                    out[j] = if j == 0 { u[0] } else { normal_cdf(z[j]) };
                }
            }
            Kind::StudentT { nu, chol } => {
                let mut z = vec![0.0; d];
                let mut maha = 0.0;
                for j in 0..d {
                    let mut r = t_quantile(u[j], *nu)?;
                    for k in 0..j {
                        r -= chol[[j, k]] * z[k];
                    }
                    z[j] = r / chol[[j, j]];
                    out[j] = if j == 0 {
                        u[0]
                    } else {
                        let df = nu + j as f64;
                        t_cdf(z[j] * (df / (nu + maha)).sqrt(), df)
                    };
                    maha += z[j] * z[j];
                }
            }
        }
        for v in out.iter_mut() {
            *v = v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        }
        Ok(())
    }
}

/// Applies the Rosenblatt transform row by row. Column 1 is passed through
/// unchanged; column j is the conditional distribution of `U_j` given the
/// preceding coordinates.
pub fn rosenblatt(spec: &RosenblattSpec, u: &Sample) -> Result<Sample> {
    if u.d() != spec.dim() {
        return Err(Error::Shape(format!(
            "sample has {} columns, transform expects {}",
            u.d(),
            spec.dim()
        )));
    }
    let mut out = Array2::<f64>::zeros(u.as_array().raw_dim());
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    Zip::from(u.as_array().axis_iter(Axis(0)))
        .and(out.axis_iter_mut(Axis(0)))
        .par_for_each(|row, out_row| {
            if let Err(e) = spec.transform_row(row, out_row) {
                failure.lock().unwrap().get_or_insert(e);
            }
        });
    if let Some(e) = failure.into_inner().unwrap() {
        return Err(e);
    }
    Ok(Sample::from_unit_values(out))
}

fn null_cache() -> &'static Mutex<HashMap<(usize, usize), Arc<Vec<f64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Vec<f64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Sorted CvM scores of [`NULL_REPLICATES`] genuine uniform samples of size
/// `n` in dimension `d`, generated from fixed seeds and cached per process.
pub fn null_cvm_distribution(n: usize, d: usize) -> Result<Arc<Vec<f64>>> {
    if let Some(v) = null_cache().lock().unwrap().get(&(n, d)) {
        return Ok(v.clone());
    }
    let indep = CopulaSpec::Independence { d };
    let mut scores = Vec::with_capacity(NULL_REPLICATES);
    for r in 0..NULL_REPLICATES {
        let mut rng = Rng::with_stream(NULL_SEED, r as u64);
        scores.push(cvm_score(sample_copula(&indep, n, &mut rng)?.view())?);
    }
    scores.sort_by(f64::total_cmp);
    let scores = Arc::new(scores);
    null_cache().lock().unwrap().insert((n, d), scores.clone());
    Ok(scores)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformityCheck {
    pub score: f64,
    /// Fraction of null scores strictly below `score`.
    pub percentile: f64,
}

/// Samples `n` points from `source`, transforms them with `transform` and
/// locates the CvM score of the result within the uniform null.
pub fn uniformity_check(
    source: &CopulaSpec,
    transform: &RosenblattSpec,
    n: usize,
    rng: &mut Rng,
) -> Result<UniformityCheck> {
    let u = sample_copula(source, n, rng)?;
    let r = rosenblatt(transform, &u)?;
    let score = cvm_score(r.view())?;
    let null = null_cvm_distribution(n, r.d())?;
    let below = null.partition_point(|&s| s < score);
    Ok(UniformityCheck {
        score,
        percentile: below as f64 / null.len() as f64,
    })
}

/// [`uniformity_check`] with the sample drawn from the transform's own copula.
pub fn rosenblatt_uniformity_check(spec: &RosenblattSpec, n: usize, rng: &mut Rng) -> Result<UniformityCheck> {
    uniformity_check(&spec.copula, spec, n, rng)
}
