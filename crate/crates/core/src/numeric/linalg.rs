//! Correlation matrices and the small dense factorizations the samplers need.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;

use super::rng::Rng;
use crate::error::{Error, Result};

/// Eigenvalues down to this (negative) level are treated as zero.
pub const PSD_TOLERANCE: f64 = 1e-10;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// A symmetric, unit-diagonal, positive semi-definite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationMatrix {
    entries: Array2<f64>,
}

impl CorrelationMatrix {
    /// Validates `entries` without modifying them.
    pub fn new(entries: Array2<f64>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c || r == 0 {
            return Err(Error::Matrix(format!(
                "correlation matrix must be square and non-empty, got {r}x{c}"
            )));
        }
        for i in 0..r {
            if entries[[i, i]] != 1.0 {
                return Err(Error::Matrix(format!(
                    "diagonal entry {i} is {} instead of 1",
                    entries[[i, i]]
                )));
            }
            for j in 0..i {
                let (a, b) = (entries[[i, j]], entries[[j, i]]);
                if !a.is_finite() || (a - b).abs() > SYMMETRY_TOLERANCE || a.abs() > 1.0 {
                    return Err(Error::Matrix(format!(
                        "entries ({i},{j})={a} and ({j},{i})={b} are not a valid symmetric correlation"
                    )));
                }
            }
        }
        let min_eig = min_eigenvalue(&entries);
        if min_eig < -PSD_TOLERANCE {
            return Err(Error::Matrix(format!(
                "matrix is not positive semi-definite (smallest eigenvalue {min_eig:e})"
            )));
        }
        Ok(CorrelationMatrix { entries })
    }

    pub fn identity(dim: usize) -> Self {
        CorrelationMatrix {
            entries: Array2::eye(dim),
        }
    }

    /// Equicorrelation matrix; valid for `-1/(dim-1) <= rho <= 1`.
    pub fn exchangeable(dim: usize, rho: f64) -> Result<Self> {
        let mut m = Array2::from_elem((dim, dim), rho);
        for i in 0..dim {
            m[[i, i]] = 1.0;
        }
        Self::new(m)
    }

    /// Projects a symmetric matrix with unit diagonal onto the PSD cone by
    /// clipping negative eigenvalues, then rescales back to unit diagonal.
    pub fn repaired(entries: Array2<f64>) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c || r == 0 {
            return Err(Error::Matrix(format!("expected a square matrix, got {r}x{c}")));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::Matrix("matrix has non-finite entries".into()));
        }
        let sym = symmetrize(&entries);
        if min_eigenvalue(&sym) >= 0.0 {
            return Self::new(unit_diagonal(sym));
        }
        let eig = SymmetricEigen::new(to_nalgebra(&sym));
        let clipped = eig.eigenvalues.map(|v| v.max(0.0));
        let rebuilt = &eig.eigenvectors
            * DMatrix::from_diagonal(&clipped)
            * eig.eigenvectors.transpose();
        let mut out = Array2::zeros((r, r));
        for i in 0..r {
            for j in 0..r {
                out[[i, j]] = rebuilt[(i, j)];
            }
        }
        let d: Vec<f64> = (0..r).map(|i| out[[i, i]]).collect();
        if d.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Matrix("repaired matrix has a zero diagonal entry".into()));
        }
        for i in 0..r {
            for j in 0..r {
                out[[i, j]] /= (d[i] * d[j]).sqrt();
            }
        }
        Self::new(unit_diagonal(symmetrize(&out)))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[[i, j]]
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.entries
    }

    pub fn cholesky(&self) -> Result<Array2<f64>> {
        cholesky(&self.entries)
    }

    /// Smallest eigenvalue, for diagnostics.
    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.entries)
    }
}

fn symmetrize(m: &Array2<f64>) -> Array2<f64> {
    let n = m.nrows();
    let mut out = m.clone();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (m[[i, j]] + m[[j, i]]);
            out[[i, j]] = v;
            out[[j, i]] = v;
        }
    }
    out
}

fn unit_diagonal(mut m: Array2<f64>) -> Array2<f64> {
    for i in 0..m.nrows() {
        m[[i, i]] = 1.0;
    }
    m
}

fn to_nalgebra(m: &Array2<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    DMatrix::from_fn(n, n, |i, j| m[[i, j]])
}

fn min_eigenvalue(m: &Array2<f64>) -> f64 {
    SymmetricEigen::new(to_nalgebra(m))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Lower-triangular `L` with `L Lᵀ = a` for a symmetric positive
/// semi-definite `a`.
///
/// Pivots within the tolerance of zero produce a zero column, so singular
/// but valid matrices (e.g. perfect correlation) factor without error.
pub fn cholesky(a: &Array2<f64>) -> Result<Array2<f64>> {
    let (n, c) = a.dim();
    if n != c {
        return Err(Error::Matrix(format!("cholesky needs a square matrix, got {n}x{c}")));
    }
    let scale = (0..n).map(|i| a[[i, i]].abs()).fold(1.0, f64::max);
    let tol = PSD_TOLERANCE * scale * n.max(1) as f64;
    let mut l = Array2::<f64>::zeros((n, n));
    for j in 0..n {
        let mut s = a[[j, j]];
        for k in 0..j {
            s -= l[[j, k]] * l[[j, k]];
        }
        if s < -tol || !s.is_finite() {
            return Err(Error::Matrix(format!(
                "matrix is not positive semi-definite (pivot {j} is {s:e})"
            )));
        }
        if s <= tol {
            for i in (j + 1)..n {
                let mut r = a[[i, j]];
                for k in 0..j {
                    r -= l[[i, k]] * l[[j, k]];
                }
                if r.abs() > tol.sqrt() {
                    return Err(Error::Matrix(format!(
                        "matrix is not positive semi-definite (zero pivot {j} with residual {r:e})"
                    )));
                }
            }
            continue;
        }
        let d = s.sqrt();
        l[[j, j]] = d;
        for i in (j + 1)..n {
            let mut r = a[[i, j]];
            for k in 0..j {
                r -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = r / d;
        }
    }
    Ok(l)
}

/// Random correlation matrix from a full-rank Gaussian factor: normalize
/// `W Wᵀ` for a `d x d` standard-normal `W`.
pub fn random_correlation_matrix(d: usize, rng: &mut Rng) -> Result<CorrelationMatrix> {
    if d < 2 {
        return Err(Error::Domain(format!("random correlation matrix needs d >= 2, got {d}")));
    }
    let w = Array2::from_shape_fn((d, d), |_| rng.normal());
    let s = w.dot(&w.t());
    let mut p = Array2::<f64>::eye(d);
    for i in 0..d {
        for j in 0..i {
            let v = s[[i, j]] / (s[[i, i]] * s[[j, j]]).sqrt();
            p[[i, j]] = v;
            p[[j, i]] = v;
        }
    }
    CorrelationMatrix::new(p)
}
