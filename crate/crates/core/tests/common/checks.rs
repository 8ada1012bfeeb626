//! Criterion-level checks shared by the integration tests and the acceptance
//! harness. Each returns a short summary on success and a diagnosis on
//! failure.

use std::f64::consts::PI;

use decouplenet::copula::{copula_cdf, sample_copula, CopulaSpec, Sample};
use decouplenet::empirical::kendalls_tau_matrix;
use decouplenet::net::{
    forward, glorot_init, loss_and_gradient, mmd_loss, Activation, NetConfig, NetWeights, DEFAULT_BANDWIDTHS,
};
use decouplenet::numeric::{random_correlation_matrix, std_normal_quantile, t_quantile, CorrelationMatrix, Rng};
use decouplenet::rosenblatt::{rosenblatt, RosenblattSpec};
use ndarray::Array2;

use super::*;

pub type Check = Result<String, String>;

/// Max relative error between analytic and central-difference gradients on
/// a [3→8→4→2] net with batches of 16, over `draws` random weight/batch
/// draws. ReLU draws with a pre-activation within `kink` of zero are redrawn,
/// since a central difference straddling the kink is not a derivative.
pub fn gradient_check(draws: usize, activation: Activation, seed: u64) -> Check {
    let cfg = NetConfig::new(3, 2).with_hidden(vec![8, 4], activation);
    let h = 1e-5;
    let kink = 1e-3;
    let mut rng = Rng::new(seed);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    let mut redrawn = 0;
    while done < draws {
        let mut net = glorot_init(&cfg, &mut rng).map_err(|e| e.to_string())?;
        let mut flat = net.to_flat();
        for v in flat.iter_mut() {
            *v += 0.3 * rng.normal();
        }
        net.set_flat(&flat).map_err(|e| e.to_string())?;
        let x = Array2::from_shape_simple_fn((16, 3), || rng.normal());
        let target = Array2::from_shape_simple_fn((16, 2), || rng.uniform());
        if activation == Activation::Relu && min_hidden_preactivation(&net, &x) < kink {
            redrawn += 1;
            continue;
        }
        let (_, grad) = loss_and_gradient(&net, x.view(), target.view(), &DEFAULT_BANDWIDTHS).map_err(|e| e.to_string())?;
        let analytic = grad.to_flat();
        let loss_at = |w: &[f64]| -> f64 {
            let mut n = net.clone();
            n.set_flat(w).unwrap();
            mmd_loss(forward(&n, x.view()).unwrap().view(), target.view(), &DEFAULT_BANDWIDTHS).unwrap()
        };
        for k in 0..flat.len() {
            let mut up = flat.clone();
            let mut dn = flat.clone();
            up[k] += h;
            dn[k] -= h;
            let fd = (loss_at(&up) - loss_at(&dn)) / (2.0 * h);
            let rel = (analytic[k] - fd).abs() / analytic[k].abs().max(fd.abs()).max(1e-8);
            worst = worst.max(rel);
        }
        done += 1;
    }
    if worst < 1e-5 {
        Ok(format!("max rel err {worst:.2e} over {draws} draws ({redrawn} redrawn near kinks)"))
    } else {
        Err(format!("max rel err {worst:.2e} >= 1e-5"))
    }
}

fn min_hidden_preactivation(net: &NetWeights, x: &Array2<f64>) -> f64 {
    let mut a = x.clone();
    let mut min = f64::INFINITY;
    let layers = net.layers();
    for layer in &layers[..layers.len() - 1] {
        let z = a.dot(&layer.w.t()) + &layer.b;
        min = z.iter().fold(min, |m, v| m.min(v.abs()));
        a = z.mapv(|v| v.max(0.0));
    }
    min
}

/// `loss(A, A)` and `loss(A, B)` over random batch pairs, plus the one-row
/// closed form.
pub fn mmd_properties(pairs: usize, seed: u64) -> Check {
    let mut rng = Rng::new(seed);
    let (mut max_self, mut min_cross) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..pairs {
        let m = 1 + i % 64;
        let d = 1 + i % 3;
        let spread = [0.01, 1.0, 10.0][i % 3];
        let a = Array2::from_shape_simple_fn((m, d), || spread * rng.normal());
        let b = if i % 5 == 0 {
            // near-identical batches stress cancellation
            a.mapv(|v| v + 1e-9 * rng.normal())
        } else {
            Array2::from_shape_simple_fn((m, d), || spread * rng.normal())
        };
        let bw: &[f64] = if i % 2 == 0 { &DEFAULT_BANDWIDTHS } else { &[0.3] };
        max_self = max_self.max(mmd_loss(a.view(), a.view(), bw).map_err(|e| e.to_string())?);
        min_cross = min_cross.min(mmd_loss(a.view(), b.view(), bw).map_err(|e| e.to_string())?);
    }
    let one = mmd_loss(
        ndarray::array![[0.0, 0.0]].view(),
        ndarray::array![[1.0, 0.0]].view(),
        &[1.0],
    )
    .map_err(|e| e.to_string())?;
    let closed = 2.0 - 2.0 * (-1.0f64).exp();
    let summary = format!("max loss(A,A) {max_self:.1e}, min loss(A,B) {min_cross:.1e}, m=1 case {one:.12}");
    if max_self <= 1e-12 && min_cross >= -1e-10 && (one - closed).abs() < 1e-12 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

/// Specs with their pairwise τ targets for the sampler suite.
pub fn sampler_cases() -> Vec<(CopulaSpec, Array2<f64>)> {
    let constant = |d: usize, tau: f64| Array2::from_elem((d, d), tau);
    let from_p = |p: &CorrelationMatrix| {
        let d = p.dim();
        Array2::from_shape_fn((d, d), |(i, j)| 2.0 / PI * p.get(i, j).asin())
    };
    let mut cases = vec![
        (CopulaSpec::Independence { d: 3 }, constant(3, 0.0)),
        (CopulaSpec::Clayton { d: 2, theta: 4.0 / 3.0 }, constant(2, 0.4)),
        (CopulaSpec::clayton_tau(5, 0.6).unwrap(), constant(5, 0.6)),
        (CopulaSpec::gumbel_tau(3, 0.4).unwrap(), constant(3, 0.4)),
        (CopulaSpec::gumbel_tau(2, 0.75).unwrap(), constant(2, 0.75)),
        (CopulaSpec::frank_tau(3, 0.4).unwrap(), constant(3, 0.4)),
        (CopulaSpec::frank_tau(2, 0.1).unwrap(), constant(2, 0.1)),
        (CopulaSpec::frank_tau(2, -0.3).unwrap(), constant(2, -0.3)),
        (CopulaSpec::normal_exchangeable_tau(4, 0.3).unwrap(), constant(4, 0.3)),
        (CopulaSpec::t_tau(3, 4.0, 0.4).unwrap(), constant(3, 0.4)),
    ];
    let p = random_correlation_matrix(4, &mut Rng::new(10)).unwrap();
    let e = from_p(&p);
    cases.push((CopulaSpec::Normal { p }, e));
    let p = random_correlation_matrix(3, &mut Rng::new(14)).unwrap();
    let t = from_p(&p);
    cases.push((CopulaSpec::StudentT { nu: 1.5, p }, t));

    let mut expected = constant(3, 0.2);
    expected[[0, 1]] = 0.7;
    expected[[1, 0]] = 0.7;
    cases.push((CopulaSpec::t_hierarchical(3, 4.0, 0.2, &[(vec![0, 1], 0.7)]).unwrap(), expected));

    let mut expected = constant(3, 0.2);
    expected[[0, 1]] = 0.4;
    expected[[1, 0]] = 0.4;
    cases.push((CopulaSpec::nested_clayton_tau(3, 0.2, &[(vec![0, 1], 0.4)]).unwrap(), expected));

    let groups = [(vec![0, 1], 0.5), (vec![2, 3, 4], 0.75)];
    let mut expected = constant(5, 0.2);
    for (members, tau) in &groups {
        for &a in members {
            for &b in members {
                expected[[a, b]] = *tau;
            }
        }
    }
    cases.push((CopulaSpec::nested_clayton_tau(5, 0.2, &groups).unwrap(), expected));
    cases
}

/// Per-margin KS uniformity (p > 0.001) and pairwise τ within 0.01 of the
/// target at `n` draws.
pub fn sampler_check(spec: &CopulaSpec, expected: &Array2<f64>, n: usize, seed: u64) -> Check {
    let s = sample_copula(spec, n, &mut Rng::new(seed)).map_err(|e| e.to_string())?;
    let mut min_p: f64 = 1.0;
    for j in 0..s.d() {
        min_p = min_p.min(uniform_ks_p(&s.column(j).to_vec()));
    }
    let tau = kendalls_tau_matrix(&s).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for i in 0..s.d() {
        for j in i + 1..s.d() {
            worst = worst.max((tau[[i, j]] - expected[[i, j]]).abs());
        }
    }
    let summary = format!("{}: min KS p {min_p:.3}, max |tau err| {worst:.4}", spec.describe());
    if min_p > 0.001 && worst < 0.01 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

/// Step for a mixed partial of order `k`: balances truncation against
/// cancellation in nested central differences.
fn fd_step(k: usize) -> f64 {
    match k {
        1 => 1e-6,
        2 => 1e-4,
        _ => 1e-3,
    }
}

/// Conditional distribution of coordinate `j` given the first `j`, as a
/// ratio of mixed partial derivatives of the copula CDF.
pub fn fd_conditional(spec: &CopulaSpec, u: &[f64], j: usize) -> f64 {
    let d = spec.dim();
    let cdf = |x: &[f64]| copula_cdf(spec, x).unwrap();
    let mut num = vec![1.0; d];
    num[..=j].copy_from_slice(&u[..=j]);
    let mut den = vec![1.0; d];
    den[..j].copy_from_slice(&u[..j]);
    let h = fd_step(j);
    // Richardson extrapolation removes the O(h²) term for higher orders
    let partial = |x: &[f64]| {
        if j == 1 {
            mixed_partial(&cdf, x, j, h)
        } else {
            (4.0 * mixed_partial(&cdf, x, j, h) - mixed_partial(&cdf, x, j, 2.0 * h)) / 3.0
        }
    };
    partial(&num) / partial(&den)
}

pub fn random_points(d: usize, count: usize, lo: f64, seed: u64) -> Array2<f64> {
    let mut rng = Rng::new(seed);
    Array2::from_shape_simple_fn((count, d), || lo + (1.0 - 2.0 * lo) * rng.uniform())
}

fn correlation_rows(p: &CorrelationMatrix) -> Vec<Vec<f64>> {
    (0..p.dim()).map(|i| (0..p.dim()).map(|j| p.get(i, j)).collect()).collect()
}

/// Largest deviation of the closed-form conditionals from the oracle at 100
/// random interior points: finite differences of the CDF for Clayton and
/// independence, density quadrature for normal and t.
pub fn rosenblatt_oracle_error(spec: &CopulaSpec, seed: u64) -> Result<f64, String> {
    let d = spec.dim();
    let r = RosenblattSpec::new(spec).map_err(|e| e.to_string())?;
    let (lo, elliptical) = match spec {
        CopulaSpec::Normal { p } => (0.01, Some((correlation_rows(p), None))),
        CopulaSpec::NormalExchangeable { d, rho } => {
            let p = CorrelationMatrix::exchangeable(*d, *rho).map_err(|e| e.to_string())?;
            (0.01, Some((correlation_rows(&p), None)))
        }
        CopulaSpec::StudentT { nu, p } => (0.01, Some((correlation_rows(p), Some(*nu)))),
        _ => (0.05, None),
    };
    let pts = random_points(d, 100, lo, seed);
    let out = rosenblatt(&r, &Sample::new(pts.clone()).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?
        .into_array();
    let mut worst: f64 = 0.0;
    for (i, row) in pts.rows().into_iter().enumerate() {
        if out[[i, 0]] != row[0] {
            return Err("first column altered".into());
        }
        let u = row.to_vec();
        let x: Option<Vec<f64>> = elliptical.as_ref().map(|(_, nu)| {
            u.iter()
                .map(|&v| match nu {
                    None => std_normal_quantile(v).unwrap(),
                    Some(nu) => t_quantile(v, *nu).unwrap(),
                })
                .collect()
        });
        for j in 1..d {
            let want = match (&elliptical, &x) {
                (Some((p, nu)), Some(x)) => elliptical_conditional_cdf(&x[..=j], p, *nu),
                _ => fd_conditional(spec, &u, j),
            };
            worst = worst.max((out[[i, j]] - want).abs());
        }
    }
    Ok(worst)
}

/// The specs exercised by the Rosenblatt oracle comparison, d ≤ 4.
pub fn rosenblatt_cases() -> Vec<CopulaSpec> {
    let mut v = vec![CopulaSpec::Independence { d: 3 }];
    for d in 2..=4 {
        v.push(CopulaSpec::clayton_tau(d, 0.4).unwrap());
        v.push(CopulaSpec::Normal {
            p: random_correlation_matrix(d, &mut Rng::new(40 + d as u64)).unwrap(),
        });
        v.push(CopulaSpec::StudentT {
            nu: [4.0, 2.5, 12.0][d - 2],
            p: random_correlation_matrix(d, &mut Rng::new(50 + d as u64)).unwrap(),
        });
    }
    v.push(CopulaSpec::normal_exchangeable_tau(3, 0.4).unwrap());
    v.push(CopulaSpec::t_tau(3, 4.0, 0.4).unwrap());
    v
}
