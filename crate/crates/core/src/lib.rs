//! Dependence-model assessment with decoupling networks.
//!
//! A copula sample is pushed through `D = T ∘ Φ⁻¹`, a small network trained
//! by maximum mean discrepancy to map samples of one reference copula to
//! uniformity in `d'` dimensions. Candidate copulas are then ranked by how
//! close their transformed samples come to uniform, measured by a
//! Cramér-von Mises score.

pub mod copula;
pub mod empirical;
pub mod error;
pub mod io;
pub mod net;
pub mod numeric;
pub mod pipeline;
pub mod plot;
pub mod rosenblatt;

pub use error::{Error, Result};
