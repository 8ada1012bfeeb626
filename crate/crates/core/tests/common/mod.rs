//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

pub mod checks;

use std::f64::consts::PI;

/// Adaptive Simpson quadrature.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        // stop once the requested tolerance is below what rounding allows
        let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
        if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) {
            return left + right + delta / 15.0;
        }
        rec(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + rec(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    rec(f, a, fa, b, fb, m, fm, whole, tol, 40)
}

/// Root of an increasing function on `[lo, hi]` by bisection.
pub fn bisect(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Maclaurin series of erf; accurate to ~1e-13 for |x| <= 3.
pub fn erf_series(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= -x * x / n;
        let add = term / (2.0 * n + 1.0);
        sum += add;
        if add.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    2.0 / PI.sqrt() * sum
}

pub fn phi_oracle(z: f64) -> f64 {
    0.5 * (1.0 + erf_series(z / 2f64.sqrt()))
}

pub fn ln_gamma_oracle(x: f64) -> f64 {
    // Lanczos, g = 7
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

pub fn t_pdf_oracle(x: f64, nu: f64) -> f64 {
    (ln_gamma_oracle((nu + 1.0) / 2.0) - ln_gamma_oracle(nu / 2.0) - 0.5 * (nu * PI).ln()
        - (nu + 1.0) / 2.0 * (x * x / nu).ln_1p())
    .exp()
}

/// t CDF by quadrature of the density from the centre.
pub fn t_cdf_oracle(x: f64, nu: f64) -> f64 {
    0.5 + integrate(&|s| t_pdf_oracle(s, nu), 0.0, x, 1e-14)
}

/// `∫_0^x t/(e^t-1) dt / x`.
pub fn debye1_oracle(x: f64) -> f64 {
    integrate(&|t| if t == 0.0 { 1.0 } else { t / t.exp_m1() }, 0.0, x, 1e-15) / x
}

pub fn frank_tau_oracle(theta: f64) -> f64 {
    1.0 - 4.0 / theta * (1.0 - debye1_oracle(theta))
}

/// Asymptotic Kolmogorov tail probability with Stephens' small-sample
/// correction.
pub fn ks_p_value(sample: &[f64], cdf: &dyn Fn(f64) -> f64) -> f64 {
    let mut v = sample.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in v.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..200 {
        let k = k as f64;
        let term = 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

pub fn uniform_ks_p(sample: &[f64]) -> f64 {
    ks_p_value(sample, &|x| x.clamp(0.0, 1.0))
}

/// Central difference of `f` at `x` with step `h`.
pub fn central_diff(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Mixed partial `∂^k/∂x_1...∂x_k` of `f` at `x` over the first `k`
/// coordinates by nested central differences.
pub fn mixed_partial(f: &dyn Fn(&[f64]) -> f64, x: &[f64], k: usize, h: f64) -> f64 {
    if k == 0 {
        return f(x);
    }
    let mut up = x.to_vec();
    let mut dn = x.to_vec();
    up[k - 1] += h;
    dn[k - 1] -= h;
    (mixed_partial(f, &up, k - 1, h) - mixed_partial(f, &dn, k - 1, h)) / (2.0 * h)
}

/// Two-sample Kolmogorov-Smirnov p-value (asymptotic).
pub fn ks_two_sample_p(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    let lambda = (ne + 0.12 + 0.11 / ne) * d;
    let mut p = 0.0;
    for k in 1..200 {
        let k = k as f64;
        p += 2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * lambda * lambda).exp();
    }
    p.clamp(0.0, 1.0)
}

/// Naive O(n²) Kendall τ-b, used to cross-check library estimates.
pub fn kendall_oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len();
    let (mut c, mut tx, mut ty) = (0i64, 0i64, 0i64);
    let mut n0 = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let a = (x[i] - x[j]).signum() * if x[i] == x[j] { 0.0 } else { 1.0 };
            let b = (y[i] - y[j]).signum() * if y[i] == y[j] { 0.0 } else { 1.0 };
            n0 += 1;
            if a == 0.0 {
                tx += 1;
            }
            if b == 0.0 {
                ty += 1;
            }
            c += (a * b) as i64;
        }
    }
    c as f64 / (((n0 - tx) as f64) * ((n0 - ty) as f64)).sqrt()
}

/// [`integrate`] over `[0, hi]` split at powers of two, for integrands with
/// most of their mass near the origin.
pub fn integrate_from_zero(f: &dyn Fn(f64) -> f64, hi: f64, tol: f64) -> f64 {
    let mut total = 0.0;
    let mut a = 0.0;
    let mut b: f64 = 1.0 / 64.0;
    while a < hi {
        let end = b.min(hi);
        total += integrate(f, a, end, tol);
        a = end;
        b *= 2.0;
    }
    total
}

/// Inverse and log-determinant of a small symmetric positive-definite matrix
/// by Gauss-Jordan elimination.
pub fn inverse_logdet(a: &[Vec<f64>]) -> (Vec<Vec<f64>>, f64) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let mut logdet = 0.0;
    for c in 0..n {
        let piv = (c..n).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())).unwrap();
        m.swap(c, piv);
        inv.swap(c, piv);
        let p = m[c][c];
        logdet += p.abs().ln();
        for j in 0..n {
            m[c][j] /= p;
            inv[c][j] /= p;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                for j in 0..n {
                    m[r][j] -= f * m[c][j];
                    inv[r][j] -= f * inv[c][j];
                }
            }
        }
    }
    (inv, logdet)
}

/// Joint density of the leading `x.len()` coordinates of a centred elliptical
/// vector with correlation `p`: Gaussian when `nu` is `None`, Student t
/// otherwise.
pub fn elliptical_density(x: &[f64], p: &[Vec<f64>], nu: Option<f64>) -> f64 {
    let k = x.len();
    let sub: Vec<Vec<f64>> = p[..k].iter().map(|r| r[..k].to_vec()).collect();
    let (inv, logdet) = inverse_logdet(&sub);
    let mut q = 0.0;
    for i in 0..k {
        for j in 0..k {
            q += x[i] * inv[i][j] * x[j];
        }
    }
    let kf = k as f64;
    match nu {
        None => (-0.5 * q - 0.5 * kf * (2.0 * PI).ln() - 0.5 * logdet).exp(),
        Some(nu) => (ln_gamma_oracle((nu + kf) / 2.0) - ln_gamma_oracle(nu / 2.0) - 0.5 * kf * (nu * PI).ln()
            - 0.5 * logdet
            - (nu + kf) / 2.0 * (q / nu).ln_1p())
        .exp(),
    }
}

/// Conditional distribution function of coordinate `x.len() - 1` given the
/// preceding ones, by quadrature of the joint density over the real line
/// mapped to a finite interval.
pub fn elliptical_conditional_cdf(x: &[f64], p: &[Vec<f64>], nu: Option<f64>) -> f64 {
    let k = x.len();
    let mut y = x.to_vec();
    let joint = |s: f64| {
        let mut y = x.to_vec();
        y[k - 1] = s;
        elliptical_density(&y, p, nu)
    };
    let mapped = |t: f64| {
        let c = t.cos();
        if c.abs() < 1e-300 {
            return 0.0;
        }
        joint(t.tan()) / (c * c)
    };
    let top = x[k - 1].atan();
    let lower = -PI / 2.0;
    // equal pieces so a narrow conditional peak cannot be stepped over
    let pieces = 32;
    let width = (top - lower) / pieces as f64;
    let num: f64 = (0..pieces)
        .map(|i| {
            let a = lower + width * i as f64;
            integrate(&mapped, a, a + width, 1e-14)
        })
        .sum();
    y.truncate(k - 1);
    let den = if k == 1 { 1.0 } else { elliptical_density(&y, p, nu) };
    num / den
}
