//! Exact pairwise correlations of one-dimensional Gaussian graphical models.
//!
//! Three conditional-independence graphs are covered: the open chain
//! `1..=n`, the centered chain `-n..=n` and the cycle on `n` nodes. All share
//! one edge weight, the partial correlation `tau`, with `0 <= tau < 1/2`.
//!
//! * [`model`] builds the partial-correlation and precision matrices and the
//!   decay parameters `lambda = arccosh(1 / 2 tau)` and `alpha = exp(-lambda)`.
//! * [`closed_form`] evaluates the finite-size chain correlations, their
//!   infinite-size limits and the leading asymptotic error coefficients.
//! * [`circulant`] handles the cycle through the spectrum of the circulant
//!   precision matrix.
//! * [`oracle`] is the independent ground truth: matrix inversion followed by
//!   the correlation transform, plus a seeded Monte Carlo sampler.
//! * [`analysis`] runs convergence sweeps, error-rate fits and the
//!   free-field consistency table.

pub mod analysis;
pub mod circulant;
pub mod closed_form;
mod error;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};
pub use model::{DecayParams, GffParams, GraphKind, GraphSpec, StructuredMatrix, Tau};
