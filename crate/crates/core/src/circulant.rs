//! The cycle graph. Its precision matrix `circ(1, -tau, 0, .., 0, -tau)` is
//! symmetric circulant, so it is inverted through its spectrum
//! `mu_k = 1 - 2 tau cos(2 pi k / n)`.
//!
//! With `Q = n Upsilon^{-1} = circ(q_0, .., q_{n-1})` and
//! `q_k = sum_j cos(j k theta) / mu_j`, the covariance is `sigma_k = q_k / n`
//! and the correlation `omega_k = q_k / q_0`. The sum `theta q_k` is a left
//! Riemann sum of `e^{-ikx} / (1 - 2 tau cos x)` over `[0, 2 pi]`, whose
//! integral is `I_k = 2 pi alpha^k / sqrt(1 - 4 tau^2)`.

use std::f64::consts::TAU as TWO_PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{decay_params, Tau};

/// Above this size `q_k` terms are added pairwise.
const PAIRWISE_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CirculantSpectrum {
    pub n: usize,
    pub mu: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CirculantCorrelation {
    pub n: usize,
    pub tau: Tau,
    pub q: Vec<f64>,
    pub sigma: Vec<f64>,
    pub omega: Vec<f64>,
}

impl CirculantCorrelation {
    /// `Omega_ij = omega_{|j - i| mod n}` for zero-based positions.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.omega[i.abs_diff(j) % self.n]
    }
}

fn check(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::domain(format!("cycle needs n >= 3, got {n}")));
    }
    Ok(())
}

/// `cos(2 pi m / n)` for `m` in `0..n`, with `c[n - m] == c[m]` exactly.
fn cos_table(n: usize) -> Vec<f64> {
    let mut c = vec![0.0; n];
    let theta = TWO_PI / n as f64;
    for m in 0..=n / 2 {
        c[m] = (m as f64 * theta).cos();
    }
    if n.is_multiple_of(2) {
        c[n / 2] = -1.0;
    }
    for m in 1..n.div_ceil(2) {
        c[n - m] = c[m];
    }
    c[0] = 1.0;
    c
}

fn mu_from(cos: &[f64], tau: f64) -> Vec<f64> {
    cos.iter().map(|c| 1.0 - 2.0 * tau * c).collect()
}

fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// `q_k` with the `j` and `n - j` terms folded together.
fn q_folded(cos: &[f64], mu: &[f64], k: usize) -> f64 {
    let n = cos.len();
    let half = n.div_ceil(2);
    let term = |j: usize| cos[(j * k) % n] / mu[j];
    let mut q = 1.0 / mu[0];
    if n > PAIRWISE_THRESHOLD {
        let terms: Vec<f64> = (1..half).map(|j| 2.0 * term(j)).collect();
        q += pairwise_sum(&terms);
    } else {
        q += (1..half).map(|j| 2.0 * term(j)).sum::<f64>();
    }
    if n.is_multiple_of(2) {
        q += term(n / 2);
    }
    q
}

/// Eigenvalues of the cycle's precision matrix.
pub fn spectrum(n: usize, tau: Tau) -> Result<CirculantSpectrum> {
    check(n)?;
    Ok(CirculantSpectrum {
        n,
        mu: mu_from(&cos_table(n), tau.get()),
    })
}

/// `q_k = sum_{j<n} cos(j k theta_n) / mu_j`, the real part of the spectral sum.
pub fn q_k(n: usize, k: usize, tau: Tau) -> Result<f64> {
    check(n)?;
    if k >= n {
        return Err(Error::domain(format!("k = {k} must be < n = {n}")));
    }
    let cos = cos_table(n);
    let mu = mu_from(&cos, tau.get());
    Ok(q_folded(&cos, &mu, k))
}

/// `sum_{j<n} sin(j k theta_n) / mu_j`, the imaginary part dropped by
/// [`q_k`]. Summed naively in index order; it vanishes analytically.
pub fn q_k_imaginary(n: usize, k: usize, tau: Tau) -> Result<f64> {
    check(n)?;
    if k >= n {
        return Err(Error::domain(format!("k = {k} must be < n = {n}")));
    }
    let theta = TWO_PI / n as f64;
    let t = tau.get();
    Ok((0..n)
        .map(|j| {
            let angle = ((j * k) % n) as f64 * theta;
            angle.sin() / (1.0 - 2.0 * t * (j as f64 * theta).cos())
        })
        .sum())
}

/// Full `q`, `sigma` and `omega` sequences of the `n`-cycle.
///
/// Only `k <= n/2` is summed; the rest is mirrored so `omega_k == omega_{n-k}`
/// exactly. The `k` loop runs on the rayon pool and the result does not
/// depend on the number of workers.
pub fn correlation_sequence(n: usize, tau: Tau) -> Result<CirculantCorrelation> {
    check(n)?;
    let cos = cos_table(n);
    let mu = mu_from(&cos, tau.get());
    let half: Vec<f64> = (0..=n / 2)
        .into_par_iter()
        .map(|k| q_folded(&cos, &mu, k))
        .collect();
    let q: Vec<f64> = (0..n).map(|k| half[k.min(n - k)]).collect();
    let sigma = q.iter().map(|v| v / n as f64).collect();
    let mut omega: Vec<f64> = q.iter().map(|v| v / q[0]).collect();
    omega[0] = 1.0;
    Ok(CirculantCorrelation {
        n,
        tau,
        q,
        sigma,
        omega,
    })
}

/// Left Riemann sum `S_k = (2 pi / n) q_k`, evaluated as `2 pi sigma_k`.
pub fn riemann_sum(n: usize, k: usize, tau: Tau) -> Result<f64> {
    Ok(TWO_PI * (q_k(n, k, tau)? / n as f64))
}

/// `I_k = 2 pi alpha^k / sqrt(1 - 4 tau^2)`. At `tau = 0` this is the limit
/// `2 pi [k = 0]`.
pub fn integral_ik(k: usize, tau: Tau) -> Result<f64> {
    if tau.is_zero() {
        return Ok(if k == 0 { TWO_PI } else { 0.0 });
    }
    let d = decay_params(tau)?;
    let t = tau.get();
    let root = ((1.0 - 2.0 * t) * (1.0 + 2.0 * t)).sqrt();
    Ok(TWO_PI * d.alpha_pow(k as u64) / root)
}

/// `alpha^k`, the `n -> infinity` limit of `omega_k`.
pub fn omega_cycle_limit(k: usize, tau: Tau) -> Result<f64> {
    Ok(decay_params(tau)?.alpha_pow(k as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tau(v: f64) -> Tau {
        Tau::new(v).unwrap()
    }

    #[test]
    fn spectrum_examples() {
        let s = spectrum(3, tau(0.4)).unwrap();
        let want = [0.2, 1.4, 1.4];
        for (a, b) in s.mu.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let s = spectrum(4, tau(0.3)).unwrap();
        let want = [0.4, 1.0, 1.6, 1.0];
        for (a, b) in s.mu.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!(spectrum(9, Tau::ZERO).unwrap().mu.iter().all(|&m| m == 1.0));
        assert!(spectrum(2, tau(0.1)).is_err());
    }

    #[test]
    fn spectrum_invariants() {
        for n in 3..64 {
            let t = 0.45;
            let s = spectrum(n, tau(t)).unwrap();
            assert_eq!(s.mu[0], 1.0 - 2.0 * t);
            for k in 1..n {
                assert_eq!(s.mu[k], s.mu[n - k]);
            }
            if n.is_multiple_of(2) {
                assert_eq!(s.mu[n / 2], 1.0 + 2.0 * t);
            }
            assert!(s.mu.iter().all(|&m| m > 0.0));
        }
    }

    #[test]
    fn q_examples() {
        assert!((q_k(3, 0, tau(0.4)).unwrap() - 45.0 / 7.0).abs() < 1e-13);
        assert!((q_k(3, 1, tau(0.4)).unwrap() - 30.0 / 7.0).abs() < 1e-13);
        assert!(q_k(3, 3, tau(0.4)).is_err());
        for n in [3, 4, 7, 16] {
            assert_eq!(q_k(n, 0, Tau::ZERO).unwrap(), n as f64);
            for k in 1..n {
                assert!(q_k(n, k, Tau::ZERO).unwrap().abs() < 1e-13);
            }
        }
    }

    #[test]
    fn pairwise_path_agrees() {
        let n = PAIRWISE_THRESHOLD + 7;
        let v = q_k(n, 3, tau(0.45)).unwrap();
        let cos = cos_table(n);
        let mu = mu_from(&cos, 0.45);
        let naive: f64 = (0..n).map(|j| cos[(j * 3) % n] / mu[j]).sum();
        assert!((v - naive).abs() <= 1e-9 * naive.abs());
    }

    #[test]
    fn correlation_examples() {
        let c = correlation_sequence(3, tau(0.4)).unwrap();
        assert!((c.omega[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((c.sigma[0] - 15.0 / 7.0).abs() < 1e-13);
        assert_eq!(c.omega[0], 1.0);
        let c = correlation_sequence(8, Tau::ZERO).unwrap();
        assert_eq!(c.omega[0], 1.0);
        assert!(c.omega[1..].iter().all(|w| w.abs() < 1e-15));
        assert_eq!(c.entry(0, 7), c.omega[7]);
    }

    #[test]
    fn omega_mirrored() {
        for n in 3..40 {
            let c = correlation_sequence(n, tau(0.45)).unwrap();
            for k in 1..n {
                assert_eq!(c.omega[k], c.omega[n - k]);
                assert!(c.omega[k] > 0.0 && c.omega[k] < 1.0);
            }
        }
    }

    #[test]
    fn riemann_examples() {
        let s = riemann_sum(3, 0, tau(0.4)).unwrap();
        assert!((s - TWO_PI / 3.0 * 45.0 / 7.0).abs() < 1e-12);
        assert!((riemann_sum(3, 0, tau(0.4)).unwrap() - 13.4639685).abs() < 1e-7);
        for n in 3..50 {
            assert_eq!(riemann_sum(n, 0, Tau::ZERO).unwrap(), TWO_PI);
        }
        let big = riemann_sum(10_000, 0, tau(0.4)).unwrap();
        assert!((big - integral_ik(0, tau(0.4)).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn integral_examples() {
        assert!((integral_ik(0, tau(0.4)).unwrap() - TWO_PI / 0.6).abs() < 1e-13);
        assert!((integral_ik(1, tau(0.4)).unwrap() - 5.2359878).abs() < 1e-7);
        assert!((integral_ik(2, tau(0.4)).unwrap() - integral_ik(1, tau(0.4)).unwrap() / 2.0).abs() < 1e-13);
        assert_eq!(integral_ik(0, Tau::ZERO).unwrap(), TWO_PI);
        assert_eq!(integral_ik(3, Tau::ZERO).unwrap(), 0.0);
    }

    #[test]
    fn cycle_limit_examples() {
        assert_eq!(omega_cycle_limit(0, tau(0.4)).unwrap(), 1.0);
        assert!((omega_cycle_limit(2, tau(0.4)).unwrap() - 0.25).abs() < 1e-15);
        assert!(omega_cycle_limit(1, Tau::ZERO).is_err());
        for k in 0..10 {
            for t in [0.05, 0.25, 0.45, 0.49] {
                let r = integral_ik(k, tau(t)).unwrap() / integral_ik(0, tau(t)).unwrap();
                let a = omega_cycle_limit(k, tau(t)).unwrap();
                assert!((r / a - 1.0).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn omega_one_approaches_alpha() {
        // at tau = 0.4 the n = 64 gap (~ alpha^63) is already below one ulp
        let a = omega_cycle_limit(1, tau(0.4)).unwrap();
        let g64 = (correlation_sequence(64, tau(0.4)).unwrap().omega[1] - a).abs();
        let g128 = (correlation_sequence(128, tau(0.4)).unwrap().omega[1] - a).abs();
        assert!(g128 <= g64.max(4.0 * f64::EPSILON));
        let a = omega_cycle_limit(1, tau(0.49)).unwrap();
        let g64 = (correlation_sequence(64, tau(0.49)).unwrap().omega[1] - a).abs();
        let g128 = (correlation_sequence(128, tau(0.49)).unwrap().omega[1] - a).abs();
        assert!(g128 < g64);
    }

    #[test]
    fn imaginary_part_small() {
        for n in [3, 4, 5, 16, 33, 64] {
            for k in 0..n {
                assert!(q_k_imaginary(n, k, tau(0.45)).unwrap().abs() <= 1e-11);
            }
        }
    }
}
