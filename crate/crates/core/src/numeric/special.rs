//! Scalar special functions: normal and Student-t distribution functions,
//! quantiles, and the first-order Debye function.

use std::f64::consts::{PI, SQRT_2};

use statrs::function::beta::{beta_reg, inv_beta_reg};
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Standard normal distribution function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

// Rational approximation coefficients for the normal quantile (Acklam).
const QA: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const QB: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const QC: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const QD: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];

fn acklam_lower(p: f64) -> f64 {
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((QC[0] * q + QC[1]) * q + QC[2]) * q + QC[3]) * q + QC[4]) * q + QC[5])
            / ((((QD[0] * q + QD[1]) * q + QD[2]) * q + QD[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((QA[0] * r + QA[1]) * r + QA[2]) * r + QA[3]) * r + QA[4]) * r + QA[5]) * q
            / (((((QB[0] * r + QB[1]) * r + QB[2]) * r + QB[3]) * r + QB[4]) * r + 1.0)
    }
}

/// Inverse of the standard normal distribution function on the open unit
/// interval.
///
/// The upper half is obtained by reflection, `-q(1 - p)`, which is exact in
/// floating point for `p >= 1/2` and keeps the Halley correction working on a
/// small, relatively accurate tail probability.
pub fn std_normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "normal quantile needs p in (0,1), got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        return Ok(-lower_normal_quantile(1.0 - p));
    }
    Ok(lower_normal_quantile(p))
}

fn lower_normal_quantile(p: f64) -> f64 {
    let mut x = acklam_lower(p);
    // Halley steps on the tail probability.
    for _ in 0..2 {
        let e = normal_cdf(x) - p;
        let u = e * SQRT_2PI * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Student-t distribution function with `nu > 0` degrees of freedom.
pub fn t_cdf(x: f64, nu: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    let x2 = x * x;
    if x2 < nu {
        // Central region: I_{x^2/(nu+x^2)}(1/2, nu/2) avoids the cancellation
        // in 1 - nu/(nu+x^2).
        let half = 0.5 * beta_reg(0.5, 0.5 * nu, x2 / (nu + x2));
        if x > 0.0 {
            0.5 + half
        } else {
            0.5 - half
        }
    } else {
        let tail = 0.5 * beta_reg(0.5 * nu, 0.5, nu / (nu + x2));
        if x > 0.0 {
            1.0 - tail
        } else {
            tail
        }
    }
}

pub fn t_ln_pdf(x: f64, nu: f64) -> f64 {
    ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln()
        - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()
}

/// Student-t quantile. Closed forms for one and two degrees of freedom,
/// otherwise an incomplete-beta inversion polished by Newton steps on the
/// lower tail.
pub fn t_quantile(p: f64, nu: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("t quantile needs p in (0,1), got {p}")));
    }
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::Domain(format!(
            "t quantile needs nu > 0, got {nu}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        return Ok(-lower_t_quantile(1.0 - p, nu));
    }
    Ok(lower_t_quantile(p, nu))
}

fn lower_t_quantile(p: f64, nu: f64) -> f64 {
    if nu == 1.0 {
        return -1.0 / (PI * p).tan();
    }
    if nu == 2.0 {
        return (2.0 * p - 1.0) / (2.0 * p * (1.0 - p)).sqrt();
    }
    let y = inv_beta_reg(0.5 * nu, 0.5, 2.0 * p);
    let mut x = -(nu * (1.0 - y) / y).sqrt();
    if !x.is_finite() {
        x = -1e10;
    }
    let ln_norm = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln();
    for _ in 0..3 {
        let f = (ln_norm - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()).exp();
        if !(f > 0.0) {
            break;
        }
        let step = (t_cdf(x, nu) - p) / f;
        if !step.is_finite() {
            break;
        }
        let next = x - step;
        // Stay on the lower tail; the cdf is convex there so Newton from the
        // right never overshoots past zero.
        x = if next < 0.0 { next } else { 0.5 * x };
    }
    x
}

const BERNOULLI_EVEN: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

/// `1 - D1(x)` for `0 <= x <= 2` from the Bernoulli expansion, without the
/// leading one so small arguments keep full relative precision.
fn one_minus_debye1_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut sum = 0.0;
    let mut pow = 1.0; // x^(2k)
    let mut fact = 1.0; // (2k)!
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let n = 2 * (k + 1);
        pow *= x2;
        fact *= ((n - 1) * n) as f64;
        sum += b * pow / ((n + 1) as f64 * fact);
    }
    x / 4.0 - sum
}

/// `D1(x)` for `x > 2`: `(pi^2/6 - sum_k e^{-kx}(x/k + 1/k^2)) / x`.
fn debye1_large(x: f64) -> f64 {
    let mut tail = 0.0;
    let mut k = 1.0;
    loop {
        let term = (-k * x).exp() * (x / k + 1.0 / (k * k));
        tail += term;
        if term < 1e-18 * tail || term == 0.0 || k > 200.0 {
            break;
        }
        k += 1.0;
    }
    (PI * PI / 6.0 - tail) / x
}

/// First-order Debye function `D1(x) = (1/x) int_0^x t/(e^t - 1) dt`, with
/// `D1(0) = 1`.
pub fn debye1(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("debye1 needs x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x <= 2.0 {
        Ok(1.0 - one_minus_debye1_series(x))
    } else {
        Ok(debye1_large(x))
    }
}

/// `1 - D1(x)` for `x >= 0`, accurate for tiny `x`.
pub(crate) fn one_minus_debye1(x: f64) -> f64 {
    if x <= 2.0 {
        one_minus_debye1_series(x)
    } else {
        1.0 - debye1_large(x)
    }
}
