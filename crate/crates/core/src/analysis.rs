//! Numerical experiments on the closed forms: convergence sweeps in `n`,
//! log-linear fits of the absolute error, Riemann-sum gaps on the cycle and
//! the free-field rate table.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circulant::{correlation_sequence, integral_ik, riemann_sum};
use crate::closed_form::{
    centered_relative_error, omega_centered, omega_limit, open_relative_error, psi_limit, psi_open,
    rel_error_coeff_centered, rel_error_coeff_open,
};
use crate::error::{Error, Result};
use crate::model::{decay_params, gff_to_tau, xi_mass, DecayParams, GffParams, GraphKind, GraphSpec, Tau};

/// Errors below this are binary64 noise.
pub const NOISE_FLOOR: f64 = 1e-14;
/// Errors above this are outside the asymptotic regime.
pub const ASYMPTOTIC_CEILING: f64 = 1e-2;
pub const MIN_FIT_POINTS: usize = 5;
/// Keeps `exp(-2(n+1) lambda)` above the noise floor up to `n ~ 32`.
pub const DEFAULT_TAU: f64 = 0.45;

/// One row of an `n` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub exact: f64,
    pub limit: f64,
    /// `exact - limit`.
    pub abs_err: f64,
    /// `exact / limit - 1`.
    pub rel_err: f64,
    /// `rel_err / exp(-2 (n + 1) lambda)`.
    pub scaled_rel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub graph: GraphKind,
    pub i: i64,
    pub j: i64,
    pub decay: DecayParams,
    /// Closed-form leading coefficient that `scaled_rel` approaches.
    pub coefficient: f64,
    pub records: Vec<ConvergenceRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `-2 lambda`.
    pub expected_slope: f64,
    /// `|slope - expected| / |expected|`.
    pub relative_slope_error: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiemannGapRow {
    pub n: usize,
    pub s_k: f64,
    pub i_k: f64,
    /// `S_k - I_k`.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GffRow {
    pub m: f64,
    pub tau: f64,
    pub lambda: f64,
    pub xi: f64,
    pub diff: f64,
}

fn record(n: usize, exact: f64, limit: f64, rel_err: f64, lambda: f64) -> ConvergenceRecord {
    let scale = (2.0 * (n as f64 + 1.0) * lambda).exp();
    let scaled_rel = rel_err * scale;
    ConvergenceRecord {
        n,
        exact,
        limit,
        abs_err: limit * rel_err,
        rel_err,
        scaled_rel: if scaled_rel.is_finite() { scaled_rel } else { f64::NAN },
    }
}

fn check_window(i: i64, j: i64, n_min: usize, n_max: usize) -> Result<()> {
    let need = i.unsigned_abs().max(j.unsigned_abs()) as usize + 1;
    if n_min < need {
        return Err(Error::domain(format!("n_min = {n_min} must be >= max(|i|, |j|) + 1 = {need}")));
    }
    if n_max < n_min {
        return Err(Error::domain(format!("n_max = {n_max} < n_min = {n_min}")));
    }
    Ok(())
}

/// Centered chain: `Omega^(n)` against `alpha^|j - i|` for `n` in `n_min..=n_max`.
///
/// The relative error is taken from the log factors of the kernel, so its
/// sign and leading digits survive even when `exact` and `limit` round to
/// the same double.
pub fn sweep_centered(i: i64, j: i64, tau: Tau, n_min: usize, n_max: usize) -> Result<Sweep> {
    let decay = decay_params(tau)?;
    check_window(i, j, n_min, n_max)?;
    let coefficient = rel_error_coeff_centered(i, j, tau)?;
    let limit = omega_limit(i, j, tau)?;
    let records = (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let exact = omega_centered(n, i, j, tau)?;
            let rel = centered_relative_error(n, i, j, tau)?;
            Ok(record(n, exact, limit, rel, decay.lambda))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep {
        graph: GraphKind::CenteredChain,
        i,
        j,
        decay,
        coefficient,
        records,
    })
}

/// Open chain: `Psi^(n)` against `Psi^(inf)`.
pub fn sweep_open(i: i64, j: i64, tau: Tau, n_min: usize, n_max: usize) -> Result<Sweep> {
    let decay = decay_params(tau)?;
    check_window(i, j, n_min, n_max)?;
    let coefficient = rel_error_coeff_open(i, j, tau)?;
    let limit = psi_limit(i, j, tau)?;
    let records = (n_min..=n_max)
        .into_par_iter()
        .map(|n| {
            let exact = psi_open(n, i, j, tau)?;
            let rel = open_relative_error(n, i, j, tau)?;
            Ok(record(n, exact, limit, rel, decay.lambda))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep {
        graph: GraphKind::OpenChain,
        i,
        j,
        decay,
        coefficient,
        records,
    })
}

/// Least-squares slope of `ln|abs_err|` against `n`, over the records whose
/// error lies in `[NOISE_FLOOR, ASYMPTOTIC_CEILING]`.
pub fn fit_abs_error_rate(sweep: &Sweep) -> Result<RateFit> {
    if sweep.graph == GraphKind::Cycle {
        return Err(Error::Unsupported("no asymptotic expansion available for cycle".into()));
    }
    let pts: Vec<(f64, f64)> = sweep
        .records
        .iter()
        .filter(|r| {
            let e = r.abs_err.abs();
            e.is_finite() && (NOISE_FLOOR..=ASYMPTOTIC_CEILING).contains(&e)
        })
        .map(|r| (r.n as f64, r.abs_err.abs().ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData {
            usable: pts.len(),
            required: MIN_FIT_POINTS,
        });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    let expected_slope = -2.0 * sweep.decay.lambda;
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        expected_slope,
        relative_slope_error: ((slope - expected_slope) / expected_slope).abs(),
        points: pts.len(),
    })
}

/// `S_k^(n) - I_k` for each `n` in `n_list`.
pub fn riemann_gap(k: usize, tau: Tau, n_list: &[usize]) -> Result<Vec<RiemannGapRow>> {
    let i_k = integral_ik(k, tau)?;
    n_list
        .iter()
        .map(|&n| {
            let s_k = riemann_sum(n, k, tau)?;
            Ok(RiemannGapRow { n, s_k, i_k, gap: s_k - i_k })
        })
        .collect()
}

/// For each mass `m` (at `beta = 1`): `tau(m)`, `lambda(tau)`, `xi_m` and `|lambda - xi_m|`.
pub fn gff_table(m_list: &[f64]) -> Result<Vec<GffRow>> {
    m_list
        .iter()
        .map(|&m| {
            let xi = xi_mass(m)?;
            let tau = gff_to_tau(GffParams::new(1.0, m, 1)?)?;
            let lambda = decay_params(tau)?.lambda;
            Ok(GffRow {
                m,
                tau: tau.get(),
                lambda,
                xi,
                diff: (lambda - xi).abs(),
            })
        })
        .collect()
}

/// Correlation matrix of `g` from the closed forms (identity at `tau = 0`).
pub fn closed_form_correlation(g: GraphSpec, tau: Tau) -> Result<DMatrix<f64>> {
    let size = g.size();
    if tau.is_zero() {
        return Ok(DMatrix::identity(size, size));
    }
    let labels: Vec<i64> = g.indices().collect();
    let mut out = DMatrix::identity(size, size);
    match g.kind() {
        GraphKind::OpenChain | GraphKind::CenteredChain => {
            for r in 0..size {
                for c in (r + 1)..size {
                    let v = match g.kind() {
                        GraphKind::OpenChain => psi_open(g.n(), labels[r], labels[c], tau)?,
                        _ => omega_centered(g.n(), labels[r], labels[c], tau)?,
                    };
                    out[(r, c)] = v;
                    out[(c, r)] = v;
                }
            }
        }
        GraphKind::Cycle => {
            let seq = correlation_sequence(size, tau)?;
            for r in 0..size {
                for c in 0..size {
                    out[(r, c)] = seq.entry(r, c);
                }
            }
        }
    }
    Ok(out)
}
