//! Closed-form covariances and correlations of the open chain `1..=n` and
//! the centered chain `-n..=n`, their `n -> infinity` limits and the leading
//! coefficients of the finite-size error.
//!
//! Every kernel is evaluated in exponential-product form. With
//! `lo = min(i, j)` and `hi = max(i, j)` the open-chain correlation reads
//!
//! ```text
//! psi = exp(-(hi - lo) lambda)
//!     * sqrt[(1 - e^{-2 lo lambda}) / (1 - e^{-2 hi lambda})]                  (left end)
//!     * sqrt[(1 - e^{-2 (n+1-hi) lambda}) / (1 - e^{-2 (n+1-lo) lambda})]      (right end)
//! ```
//!
//! Each factor `1 - e^{-2 k lambda}` lies in `(0, 1)`, so nothing overflows
//! for any `n`. The centered chain is the open chain of size `2n + 1` with
//! indices shifted by `n + 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{decay_params, DecayParams, GraphSpec, Tau};

/// Largest sinh/exp argument accepted by the coefficient functions.
pub const MAX_EXP_ARG: f64 = 700.0;

/// A pair of node labels checked against a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainIndex {
    pub i: i64,
    pub j: i64,
}

impl ChainIndex {
    pub fn new(g: &GraphSpec, i: i64, j: i64) -> Result<Self> {
        g.position(i)?;
        g.position(j)?;
        Ok(ChainIndex { i, j })
    }

    pub fn lo(&self) -> i64 {
        self.i.min(self.j)
    }

    pub fn hi(&self) -> i64 {
        self.i.max(self.j)
    }

    pub fn distance(&self) -> u64 {
        self.i.abs_diff(self.j)
    }
}

/// Natural logarithm of a correlation split into its three factors.
///
/// `distance = -|j - i| lambda`; `left_end` and `right_end` are the logs of
/// the two square-root boundary factors, both `<= 0` and strictly negative
/// whenever `i != j`. Keeping them apart preserves the sign of deviations
/// that are far below the resolution of the correlation itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogCorrelation {
    pub distance: f64,
    pub left_end: f64,
    pub right_end: f64,
}

impl LogCorrelation {
    const ZERO: LogCorrelation = LogCorrelation {
        distance: 0.0,
        left_end: 0.0,
        right_end: 0.0,
    };

    /// `exp(distance + left_end + right_end)`.
    pub fn value(&self) -> f64 {
        self.distance.exp() * (self.left_end + self.right_end).exp()
    }
}

/// Leading terms of the finite-size error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticCoefficients {
    /// `2 (n + 1) lambda`: both errors are `O(exp(-abs_order))`.
    pub abs_order: f64,
    /// Coefficient of `exp(-2 (n + 1) lambda)` in the relative error.
    pub rel_coeff: f64,
}

/// `ln(1 - exp(-x))` for `x > 0`.
fn log1mexp(x: f64) -> f64 {
    if x < std::f64::consts::LN_2 {
        (-(-x).exp_m1()).ln()
    } else {
        (-(-x).exp()).ln_1p()
    }
}

/// `1 - exp(-x)`.
fn one_minus_exp(x: f64) -> f64 {
    -(-x).exp_m1()
}

fn finite_decay(tau: Tau) -> Result<DecayParams> {
    decay_params(tau)
}

fn check_open(n: usize, i: i64, j: i64) -> Result<()> {
    ChainIndex::new(&GraphSpec::open(n)?, i, j).map(|_| ())
}

fn check_centered(n: usize, i: i64, j: i64) -> Result<()> {
    ChainIndex::new(&GraphSpec::centered(n)?, i, j).map(|_| ())
}

fn open_log_parts(n: usize, lo: i64, hi: i64, lambda: f64) -> LogCorrelation {
    if lo == hi {
        return LogCorrelation::ZERO;
    }
    let end = n as f64 + 1.0;
    let (lo, hi) = (lo as f64, hi as f64);
    LogCorrelation {
        distance: -(hi - lo) * lambda,
        left_end: 0.5 * (log1mexp(2.0 * lo * lambda) - log1mexp(2.0 * hi * lambda)),
        right_end: 0.5 * (log1mexp(2.0 * (end - hi) * lambda) - log1mexp(2.0 * (end - lo) * lambda)),
    }
}

/// Covariance `Sigma_ij` of the open chain, an entry of `(2I - Pi)^{-1}`.
pub fn sigma_open(n: usize, i: i64, j: i64, tau: Tau) -> Result<f64> {
    check_open(n, i, j)?;
    let d = finite_decay(tau)?;
    let (lo, hi) = (i.min(j) as f64, i.max(j) as f64);
    let end = n as f64 + 1.0;
    let lambda = d.lambda;
    let num = one_minus_exp(2.0 * (end - hi) * lambda) * one_minus_exp(2.0 * lo * lambda);
    let den = 2.0 * tau.get() * lambda.sinh() * one_minus_exp(2.0 * end * lambda);
    Ok((-(hi - lo) * lambda).exp() * num / den)
}

/// Log-factor decomposition of `psi_open(n, i, j, tau)`.
pub fn open_log_correlation(n: usize, i: i64, j: i64, tau: Tau) -> Result<LogCorrelation> {
    check_open(n, i, j)?;
    let d = finite_decay(tau)?;
    Ok(open_log_parts(n, i.min(j), i.max(j), d.lambda))
}

/// Pairwise correlation `Psi_ij` of the open chain on `1..=n`.
pub fn psi_open(n: usize, i: i64, j: i64, tau: Tau) -> Result<f64> {
    if i == j {
        check_open(n, i, j)?;
        finite_decay(tau)?;
        return Ok(1.0);
    }
    Ok(open_log_correlation(n, i, j, tau)?.value())
}

/// `Psi_ij` as `n -> infinity`:
/// `exp(-|j - i| lambda) sqrt[(1 - e^{-2 lo lambda}) / (1 - e^{-2 hi lambda})]`.
pub fn psi_limit(i: i64, j: i64, tau: Tau) -> Result<f64> {
    if i < 1 || j < 1 {
        return Err(Error::domain(format!("open-chain indices must be >= 1, got ({i}, {j})")));
    }
    let d = finite_decay(tau)?;
    if i == j {
        return Ok(1.0);
    }
    // any n past both indices gives the same left factor
    let lc = open_log_parts(i.max(j) as usize, i.min(j), i.max(j), d.lambda);
    Ok(lc.distance.exp() * lc.left_end.exp())
}

/// `Psi^(n) / Psi^(inf) - 1`, computed from the log factors with `expm1`.
pub fn open_relative_error(n: usize, i: i64, j: i64, tau: Tau) -> Result<f64> {
    Ok(open_log_correlation(n, i, j, tau)?.right_end.exp_m1())
}

/// `Psi^(inf) exp(|j - i| lambda) - 1`.
pub fn open_limit_relative_gap(i: i64, j: i64, tau: Tau) -> Result<f64> {
    if i < 1 || j < 1 {
        return Err(Error::domain(format!("open-chain indices must be >= 1, got ({i}, {j})")));
    }
    let d = finite_decay(tau)?;
    let lc = open_log_parts(i.max(j) as usize, i.min(j), i.max(j), d.lambda);
    Ok(lc.left_end.exp_m1())
}

/// Log-factor decomposition of `omega_centered(n, i, j, tau)`.
pub fn centered_log_correlation(n: usize, i: i64, j: i64, tau: Tau) -> Result<LogCorrelation> {
    check_centered(n, i, j)?;
    let shift = n as i64 + 1;
    open_log_correlation(2 * n + 1, shift + i, shift + j, tau)
}

/// Pairwise correlation `Omega_ij` of the centered chain on `-n..=n`,
/// i.e. `Psi^(2n+1)` at `(n + 1 + i, n + 1 + j)`.
pub fn omega_centered(n: usize, i: i64, j: i64, tau: Tau) -> Result<f64> {
    check_centered(n, i, j)?;
    let shift = n as i64 + 1;
    psi_open(2 * n + 1, shift + i, shift + j, tau)
}

/// `Omega_ij exp(|j - i| lambda) - 1`, computed from the log factors with `expm1`.
pub fn centered_relative_error(n: usize, i: i64, j: i64, tau: Tau) -> Result<f64> {
    let lc = centered_log_correlation(n, i, j, tau)?;
    Ok((lc.left_end + lc.right_end).exp_m1())
}

/// `Omega_ij` as `n -> infinity`: `alpha^|j - i|`.
pub fn omega_limit(i: i64, j: i64, tau: Tau) -> Result<f64> {
    let d = finite_decay(tau)?;
    Ok(d.alpha_pow(i.abs_diff(j)))
}

fn guard(i: i64, j: i64, lambda: f64) -> Result<()> {
    let arg = 2.0 * i.unsigned_abs().max(j.unsigned_abs()) as f64 * lambda;
    if arg > MAX_EXP_ARG {
        return Err(Error::Overflow(format!(
            "coefficient argument 2 max(|i|, |j|) lambda = {arg} exceeds {MAX_EXP_ARG}"
        )));
    }
    Ok(())
}

/// Leading coefficient of the centered-chain relative error:
/// `-[sinh(2 max(i, j) lambda) - sinh(2 min(i, j) lambda)]`, with min and
/// max taken over the signed labels.
pub fn rel_error_coeff_centered(i: i64, j: i64, tau: Tau) -> Result<f64> {
    let d = finite_decay(tau)?;
    guard(i, j, d.lambda)?;
    if i == j {
        return Ok(0.0);
    }
    let (lo, hi) = (i.min(j) as f64, i.max(j) as f64);
    Ok(-((2.0 * hi * d.lambda).sinh() - (2.0 * lo * d.lambda).sinh()))
}

/// Leading coefficient of `Psi^(n) / Psi^(inf) - 1`:
/// `-(e^{2 max lambda} - e^{2 min lambda}) / 2`.
pub fn rel_error_coeff_open(i: i64, j: i64, tau: Tau) -> Result<f64> {
    if i < 1 || j < 1 {
        return Err(Error::domain(format!("open-chain indices must be >= 1, got ({i}, {j})")));
    }
    let d = finite_decay(tau)?;
    guard(i, j, d.lambda)?;
    if i == j {
        return Ok(0.0);
    }
    let (lo, hi) = (i.min(j) as f64, i.max(j) as f64);
    Ok(-0.5 * ((2.0 * hi * d.lambda).exp() - (2.0 * lo * d.lambda).exp()))
}

pub fn asymptotic_coefficients_centered(n: usize, i: i64, j: i64, tau: Tau) -> Result<AsymptoticCoefficients> {
    check_centered(n, i, j)?;
    let rel_coeff = rel_error_coeff_centered(i, j, tau)?;
    Ok(AsymptoticCoefficients {
        abs_order: 2.0 * (n as f64 + 1.0) * finite_decay(tau)?.lambda,
        rel_coeff,
    })
}

pub fn asymptotic_coefficients_open(n: usize, i: i64, j: i64, tau: Tau) -> Result<AsymptoticCoefficients> {
    check_open(n, i, j)?;
    let rel_coeff = rel_error_coeff_open(i, j, tau)?;
    Ok(AsymptoticCoefficients {
        abs_order: 2.0 * (n as f64 + 1.0) * finite_decay(tau)?.lambda,
        rel_coeff,
    })
}
