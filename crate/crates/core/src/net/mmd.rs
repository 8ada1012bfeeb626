//! Gaussian-kernel-mixture MMD and its gradient with respect to the
//! transformed batch.

use ndarray::{Array2, ArrayView2};

use super::config::check_bandwidths;
use crate::error::{Error, Result};

#[inline]
fn sq_dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `Σ_m exp(-‖u - v‖² / σ_m)`.
pub fn kernel_mixture(u: &[f64], v: &[f64], bandwidths: &[f64]) -> f64 {
    let d2 = sq_dist(u, v);
    bandwidths.iter().map(|s| (-d2 / s).exp()).sum()
}

/// Order-independent accumulator: every term is truncated to a multiple of
/// 2^-90 and summed as an integer, so the total does not depend on the order
/// of the rows.
#[derive(Default)]
struct FixedSum(i128);

const FIXED_SCALE: f64 = (1u128 << 90) as f64;

impl FixedSum {
    #[inline]
    fn add(&mut self, v: f64) {
        self.0 += (v * FIXED_SCALE) as i128;
    }

    fn value(&self) -> f64 {
        self.0 as f64 / FIXED_SCALE
    }
}

fn rows<'a>(x: &'a ArrayView2<'_, f64>) -> Vec<&'a [f64]> {
    let d = x.ncols().max(1);
    x.as_slice().expect("row-major batch").chunks_exact(d).collect()
}

fn check_pair(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::Shape(format!(
            "batches must have equal shapes, got {:?} and {:?}",
            a.dim(),
            b.dim()
        )));
    }
    if a.nrows() == 0 {
        return Err(Error::Shape("MMD of empty batches".into()));
    }
    Ok(())
}

fn cross_sum(a: &[&[f64]], b: &[&[f64]], bandwidths: &[f64]) -> FixedSum {
    let mut s = FixedSum::default();
    for u in a {
        for v in b {
            s.add(kernel_mixture(u, v, bandwidths));
        }
    }
    s
}

/// Biased V-statistic
/// `(1/m²) Σ_i Σ_i' [K(A_i, A_i') - 2 K(A_i', B_i) + K(B_i, B_i')]`.
pub fn mmd_loss(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, bandwidths: &[f64]) -> Result<f64> {
    check_pair(a, b)?;
    check_bandwidths(bandwidths)?;
    let (a, b) = (a.as_standard_layout(), b.as_standard_layout());
    let (av, bv) = (a.view(), b.view());
    let (ra, rb) = (rows(&av), rows(&bv));
    let aa = cross_sum(&ra, &ra, bandwidths);
    let ab = cross_sum(&ra, &rb, bandwidths);
    let bb = cross_sum(&rb, &rb, bandwidths);
    let m = ra.len() as f64;
    let total = FixedSum(aa.0 - 2 * ab.0 + bb.0);
    Ok(total.value() / (m * m))
}

/// Evaluates `k'(d²) = Σ_m exp(-d²/σ_m)/σ_m`. When the sorted inverse
/// bandwidths form a divisibility chain of integer multiples (true for the
/// default set) one exponential is raised to integer powers instead of
/// calling `exp` once per bandwidth.
pub(crate) struct KernelDerivative {
    inv: Vec<f64>,
    /// Smallest inverse bandwidth `c0` and, for each bandwidth in ascending
    /// order of `1/σ`, `(step, weight)` where the term is the previous term
    /// (starting from `exp(-d² c0)`) raised to `step`, scaled by `weight = 1/σ`.
    chain: Option<(f64, Vec<(u32, f64)>)>,
}

#[inline(always)]
fn ipow(mut b: f64, mut k: u32) -> f64 {
    let mut acc = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            acc *= b;
        }
        b *= b;
        k >>= 1;
    }
    acc
}

impl KernelDerivative {
    pub(crate) fn new(bandwidths: &[f64]) -> Self {
        let mut inv: Vec<f64> = bandwidths.iter().map(|s| 1.0 / s).collect();
        inv.sort_by(f64::total_cmp);
        let c0 = inv[0];
        let mut chain = Vec::with_capacity(inv.len());
        let mut prev = 1u64;
        for &c in &inv {
            let k = (c / c0).round();
            if (c / c0 - k).abs() > 1e-9 || k > 1e6 || (k as u64) % prev != 0 {
                return KernelDerivative { inv, chain: None };
            }
            chain.push((((k as u64) / prev) as u32, c));
            prev = k as u64;
        }
        KernelDerivative {
            inv,
            chain: Some((c0, chain)),
        }
    }

    #[inline]
    fn eval(&self, d2: f64) -> f64 {
        match &self.chain {
            Some((c0, chain)) => {
                let mut term = (-d2 * c0).exp();
                let mut sum = 0.0;
                for &(step, weight) in chain {
                    term = ipow(term, step);
                    sum += weight * term;
                }
                sum
            }
            None => self.inv.iter().map(|&c| c * (-d2 * c).exp()).sum(),
        }
    }
}

/// Gradient of [`mmd_loss`] with respect to `a`:
/// `dL/dA_p = (4/m²) [Σ_i k'(A_p, B_i)(A_p - B_i) - Σ_i' k'(A_p, A_i')(A_p - A_i')]`
/// with `k' = Σ_m exp(-d²/σ_m)/σ_m`.
pub(crate) fn mmd_gradient(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>, kd: &KernelDerivative) -> Array2<f64> {
    let (m, dp) = a.dim();
    let (a, b) = (a.as_standard_layout(), b.as_standard_layout());
    let (av, bv) = (a.view(), b.view());
    let (ra, rb) = (rows(&av), rows(&bv));
    let mut g = Array2::<f64>::zeros((m, dp));
    let scale = 4.0 / (m as f64 * m as f64);
    let gs = g.as_slice_mut().unwrap();
    if dp == 2 {
        let pa: Vec<[f64; 2]> = ra.iter().map(|r| [r[0], r[1]]).collect();
        let pb: Vec<[f64; 2]> = rb.iter().map(|r| [r[0], r[1]]).collect();
        for p in 0..m {
            let [x0, x1] = pa[p];
            let (mut g0, mut g1) = (0.0, 0.0);
            for q in (p + 1)..m {
                let (e0, e1) = (x0 - pa[q][0], x1 - pa[q][1]);
                let k = kd.eval(e0 * e0 + e1 * e1);
                g0 -= k * e0;
                g1 -= k * e1;
                gs[2 * q] += k * e0;
                gs[2 * q + 1] += k * e1;
            }
            for v in &pb {
                let (e0, e1) = (x0 - v[0], x1 - v[1]);
                let k = kd.eval(e0 * e0 + e1 * e1);
                g0 += k * e0;
                g1 += k * e1;
            }
            gs[2 * p] += g0;
            gs[2 * p + 1] += g1;
        }
    } else {
        for p in 0..m {
            let ap = ra[p];
            for q in (p + 1)..m {
                let aq = ra[q];
                let k = kd.eval(sq_dist(ap, aq));
                for c in 0..dp {
                    let t = k * (ap[c] - aq[c]);
                    gs[p * dp + c] -= t;
                    gs[q * dp + c] += t;
                }
            }
            for bi in &rb {
                let k = kd.eval(sq_dist(ap, bi));
                for c in 0..dp {
                    gs[p * dp + c] += k * (ap[c] - bi[c]);
                }
            }
        }
    }
    g.mapv_inplace(|v| v * scale);
    g
}
