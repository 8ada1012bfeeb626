use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// An `n x d` matrix of observations in the open unit hypercube; one row
/// per observation.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    values: Array2<f64>,
}

impl Sample {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if values.ncols() == 0 {
            return Err(Error::Shape("sample must have at least one column".into()));
        }
        for ((i, j), &v) in values.indexed_iter() {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::Input(format!(
                    "sample entry ({i},{j}) = {v} is not inside (0,1)"
                )));
            }
        }
        Ok(Sample { values })
    }

    /// Caller guarantees every entry lies in (0,1).
    pub(crate) fn from_unit_values(values: Array2<f64>) -> Self {
        debug_assert!(values.iter().all(|&v| v > 0.0 && v < 1.0));
        Sample { values }
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_array(self) -> Array2<f64> {
        self.values
    }
}

/// Clamp a value produced by a sampler into the open unit interval.
#[inline]
pub(crate) fn open_unit(u: f64) -> f64 {
    u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}
