//! Ranks, pseudo-observations, the empirical copula, Kendall's τ and the
//! Cramér-von Mises uniformity score.

use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

use crate::copula::Sample;
use crate::error::{Error, Result};
use crate::numeric::Rng;

/// Pseudo-observations `R/(n+1)` of a data matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedSample {
    base: Sample,
    source_n: usize,
}

impl RankedSample {
    pub fn sample(&self) -> &Sample {
        &self.base
    }

    pub fn into_sample(self) -> Sample {
        self.base
    }

    pub fn source_n(&self) -> usize {
        self.source_n
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn d(&self) -> usize {
        self.base.d()
    }
}

/// Twice the average rank (1-based) of each entry, so tied ranks stay integral.
fn doubled_ranks(col: ArrayView1<'_, f64>) -> Vec<u64> {
    let n = col.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| col[a].total_cmp(&col[b]));
    let mut out = vec![0u64; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && col[order[end + 1]] == col[order[start]] {
            end += 1;
        }
        // positions start..=end share ranks start+1..=end+1
        let r2 = (start + end + 2) as u64;
        for &i in &order[start..=end] {
            out[i] = r2;
        }
        start = end + 1;
    }
    out
}

fn rank_columns(x: ArrayView2<'_, f64>) -> Vec<Vec<u64>> {
    x.columns().into_iter().map(doubled_ranks).collect()
}

/// Rank-transforms each column to `R/(n+1)` with average ranks for ties.
pub fn pseudo_observations(x: &Array2<f64>) -> Result<RankedSample> {
    let (n, d) = x.dim();
    if n == 0 || d == 0 {
        return Err(Error::Input("pseudo-observations need a non-empty matrix".into()));
    }
    if let Some(((i, j), v)) = x.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Input(format!("non-finite entry {v} at row {}, column {}", i + 1, j + 1)));
    }
    let denom = 2.0 * (n + 1) as f64;
    let mut out = Array2::<f64>::zeros((n, d));
    for (j, ranks) in rank_columns(x.view()).into_iter().enumerate() {
        for (i, r2) in ranks.into_iter().enumerate() {
            out[[i, j]] = r2 as f64 / denom;
        }
    }
    Ok(RankedSample {
        base: Sample::from_unit_values(out),
        source_n: n,
    })
}

/// `(1/n) #{i : point_i <= u}` componentwise.
pub fn empirical_copula_eval(points: &Sample, u: &[f64]) -> f64 {
    let hits = points
        .as_array()
        .rows()
        .into_iter()
        .filter(|row| row.iter().zip(u).all(|(&p, &v)| p <= v))
        .count();
    hits as f64 / points.n() as f64
}

fn check_score_input(x: ArrayView2<'_, f64>) -> Result<()> {
    let (n, d) = x.dim();
    if n == 0 {
        return Err(Error::Input("CvM score of an empty sample".into()));
    }
    if d < 2 {
        return Err(Error::Input(format!("CvM score needs d >= 2, got d={d}")));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("CvM score of a sample with non-finite entries".into()));
    }
    Ok(())
}

fn score_from_counts(ranks: &[Vec<u64>], counts: &[u64]) -> f64 {
    let n = counts.len();
    let denom = 2.0 * (n + 1) as f64;
    let nf = n as f64;
    let mut s = 0.0;
    for (i, &c) in counts.iter().enumerate() {
        let prod: f64 = ranks.iter().map(|col| col[i] as f64 / denom).product();
        let diff = c as f64 / nf - prod;
        s += diff * diff;
    }
    s
}

/// Reference `O(n² d)` evaluation of [`cvm_score`].
pub fn cvm_score_naive(x: ArrayView2<'_, f64>) -> Result<f64> {
    check_score_input(x)?;
    let ranks = rank_columns(x);
    let n = x.nrows();
    let counts: Vec<u64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&k| ranks.iter().all(|col| col[k] <= col[i]))
                .count() as u64
        })
        .collect();
    Ok(score_from_counts(&ranks, &counts))
}

/// Cramér-von Mises distance of the sample's empirical copula from the
/// independence copula: `Σ_i (C_n(Û_i) - Π_j Û_ij)²`, computed on the
/// re-ranked sample so only the rank pattern matters.
pub fn cvm_score(x: ArrayView2<'_, f64>) -> Result<f64> {
    check_score_input(x)?;
    let ranks = rank_columns(x);
    let counts = if ranks.len() == 2 {
        dominance_counts_2d(&ranks[0], &ranks[1])
    } else {
        dominance_counts_scan(&ranks)
    };
    Ok(score_from_counts(&ranks, &counts))
}

/// Convenience wrapper for [`Sample`].
pub fn cvm_score_sample(sample: &Sample) -> Result<f64> {
    cvm_score(sample.view())
}

/// Sweep over the first coordinate with a Fenwick tree on the second.
fn dominance_counts_2d(r1: &[u64], r2: &[u64]) -> Vec<u64> {
    let n = r1.len();
    let size = 2 * n + 1;
    let mut tree = vec![0u64; size + 1];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| r1[i]);
    let mut counts = vec![0u64; n];
    let mut start = 0;
    while start < n {
        let mut end = start;
        while end + 1 < n && r1[order[end + 1]] == r1[order[start]] {
            end += 1;
        }
        for &i in &order[start..=end] {
            let mut k = r2[i] as usize;
            while k <= size {
                tree[k] += 1;
                k += k & k.wrapping_neg();
            }
        }
        for &i in &order[start..=end] {
            let mut k = r2[i] as usize;
            let mut c = 0;
            while k > 0 {
                c += tree[k];
                k -= k & k.wrapping_neg();
            }
            counts[i] = c;
        }
        start = end + 1;
    }
    counts
}

/// Sorted prefix scan for d >= 3, parallel over rows.
fn dominance_counts_scan(ranks: &[Vec<u64>]) -> Vec<u64> {
    let n = ranks[0].len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| ranks[0][i]);
    // row-major copy of the remaining coordinates in sorted order
    let rest = ranks.len() - 1;
    let mut packed = Vec::with_capacity(n * rest);
    for &i in &order {
        for col in &ranks[1..] {
            packed.push(col[i]);
        }
    }
    let first: Vec<u64> = order.iter().map(|&i| ranks[0][i]).collect();
    let sorted_counts: Vec<u64> = (0..n)
        .into_par_iter()
        .map(|p| {
            let bound = first.partition_point(|&v| v <= first[p]);
            let me = &packed[p * rest..(p + 1) * rest];
            packed[..bound * rest]
                .chunks_exact(rest)
                .filter(|other| other.iter().zip(me).all(|(a, b)| a <= b))
                .count() as u64
        })
        .collect();
    let mut counts = vec![0u64; n];
    for (p, &i) in order.iter().enumerate() {
        counts[i] = sorted_counts[p];
    }
    counts
}

fn tau_from_counts(numerator: i64, n0: i64, n1: i64, n2: i64) -> Result<f64> {
    if n0 == n1 || n0 == n2 {
        return Err(Error::Numeric("Kendall's tau undefined for a constant column".into()));
    }
    let t = numerator as f64 / ((n0 - n1) as f64).sqrt() / ((n0 - n2) as f64).sqrt();
    Ok(t.clamp(-1.0, 1.0))
}

fn tied_pairs_sorted<T: PartialEq>(sorted: &[T]) -> i64 {
    let mut total = 0i64;
    let mut run = 1i64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

fn merge_count(v: &mut [f64], buf: &mut [f64]) -> i64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut v[..mid], &mut buf[..mid]) + merge_count(&mut v[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as i64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Kendall's τ-b in `O(n log n)` (Knight's merge-sort algorithm).
pub fn kendall_tau(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Shape(format!("column lengths differ: {n} vs {}", y.len())));
    }
    if n < 2 {
        return Err(Error::Input("Kendall's tau needs at least two observations".into()));
    }
    let mut pairs: Vec<(f64, f64)> = x.iter().copied().zip(y.iter().copied()).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let n0 = (n as i64) * (n as i64 - 1) / 2;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let n1 = tied_pairs_sorted(&xs);
    let n3 = tied_pairs_sorted(&pairs);
    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);
    let n2 = tied_pairs_sorted(&ys);
    tau_from_counts(n0 - n1 - n2 + n3 - 2 * swaps, n0, n1, n2)
}

/// `O(n²)` pair-counting Kendall's τ-b; agrees with [`kendall_tau`] exactly.
pub fn kendall_tau_naive(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n != y.len() {
        return Err(Error::Shape(format!("column lengths differ: {n} vs {}", y.len())));
    }
    if n < 2 {
        return Err(Error::Input("Kendall's tau needs at least two observations".into()));
    }
    let sign = |a: f64, b: f64| -> i64 {
        if a < b {
            -1
        } else if a > b {
            1
        } else {
            0
        }
    };
    let (mut s, mut n1, mut n2) = (0i64, 0i64, 0i64);
    for i in 0..n {
        for j in 0..i {
            let sx = sign(x[i], x[j]);
            let sy = sign(y[i], y[j]);
            s += sx * sy;
            n1 += (sx == 0) as i64;
            n2 += (sy == 0) as i64;
        }
    }
    let n0 = (n as i64) * (n as i64 - 1) / 2;
    tau_from_counts(s, n0, n1, n2)
}

/// Pairwise Kendall's τ; symmetric with unit diagonal.
pub fn kendalls_tau_matrix(sample: &Sample) -> Result<Array2<f64>> {
    kendalls_tau_matrix_view(sample.view())
}

pub fn kendalls_tau_matrix_view(x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let d = x.ncols();
    let cols: Vec<Vec<f64>> = x.columns().into_iter().map(|c| c.to_vec()).collect();
    let mut out = Array2::<f64>::eye(d);
    for i in 0..d {
        for j in 0..i {
            let t = kendall_tau(&cols[i], &cols[j])
                .map_err(|e| Error::Numeric(format!("columns {} and {}: {e}", j + 1, i + 1)))?;
            out[[i, j]] = t;
            out[[j, i]] = t;
        }
    }
    Ok(out)
}

/// Rows drawn uniformly with replacement.
pub(crate) fn resample_rows(points: &Sample, n: usize, rng: &mut Rng) -> Sample {
    let src = points.as_array();
    let d = points.d();
    let mut out = Array2::<f64>::zeros((n, d));
    for mut row in out.rows_mut() {
        row.assign(&src.row(rng.below(points.n())));
    }
    Sample::from_unit_values(out)
}

/// Resamples `n_gen` pseudo-observations with replacement.
pub fn sample_empirical(points: &RankedSample, n_gen: usize, rng: &mut Rng) -> Sample {
    resample_rows(&points.base, n_gen, rng)
}
