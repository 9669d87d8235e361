//! Ground truth independent of the closed forms: invert the precision
//! matrix, then rescale the covariance to unit diagonal.
//!
//! Chains go through a symmetric `L D L^T` elimination of the tridiagonal
//! precision matrix. Everything else, and the cross-check of the tridiagonal
//! path itself, goes through a dense Cholesky factorization.

mod sampler;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{precision_matrix, GraphSpec, StructuredMatrix, Tau};

pub use sampler::{sample, SampleBatch, NORMAL_METHOD, RNG_NAME};

/// `L D L^T` factorization of a symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalFactor {
    /// Pivots `d_k`, all positive.
    pub pivots: Vec<f64>,
    /// Sub-diagonal of the unit lower factor; `multipliers[k]` sits at `(k, k - 1)`, index 0 unused.
    pub multipliers: Vec<f64>,
}

impl TridiagonalFactor {
    pub fn new(diag: f64, off: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("empty matrix"));
        }
        let mut pivots = Vec::with_capacity(n);
        let mut multipliers = vec![0.0; n];
        let mut d = diag;
        for k in 0..n {
            if k > 0 {
                let l = off / pivots[k - 1];
                multipliers[k] = l;
                d = diag - l * off;
            }
            if !(d > 0.0) {
                return Err(Error::NotPositiveDefinite { row: k, pivot: d });
            }
            pivots.push(d);
        }
        Ok(TridiagonalFactor { pivots, multipliers })
    }

    pub fn dim(&self) -> usize {
        self.pivots.len()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.dim();
        for k in 1..n {
            b[k] -= self.multipliers[k] * b[k - 1];
        }
        for k in 0..n {
            b[k] /= self.pivots[k];
        }
        for k in (0..n.saturating_sub(1)).rev() {
            b[k] -= self.multipliers[k + 1] * b[k + 1];
        }
    }

    /// Solves `R x = z` where `A = R^T R` and `R = D^{1/2} L^T` is upper
    /// bidiagonal; `x` then has covariance `A^{-1}` when `z` is white noise.
    pub fn solve_upper_root(&self, z: &mut [f64]) {
        let n = self.dim();
        let last = n - 1;
        z[last] /= self.pivots[last].sqrt();
        for k in (0..last).rev() {
            let r = self.pivots[k].sqrt();
            // R[k, k + 1] = sqrt(d_k) * l_{k+1}
            z[k] = (z[k] - r * self.multipliers[k + 1] * z[k + 1]) / r;
        }
    }
}

/// Covariance, its square-root diagonal and the correlation matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub sigma: DMatrix<f64>,
    pub delta: DVector<f64>,
    pub psi: DMatrix<f64>,
}

/// Inverse of the symmetric tridiagonal matrix with constant `diag` and
/// `off`, column by column through its `L D L^T` factorization.
pub fn invert_tridiagonal(diag: f64, off: f64, n: usize) -> Result<DMatrix<f64>> {
    let f = TridiagonalFactor::new(diag, off, n)?;
    let mut inv = DMatrix::zeros(n, n);
    let mut col = vec![0.0; n];
    for c in 0..n {
        col.iter_mut().for_each(|v| *v = 0.0);
        col[c] = 1.0;
        f.solve_in_place(&mut col);
        for r in c..n {
            inv[(r, c)] = col[r];
            inv[(c, r)] = col[r];
        }
    }
    Ok(inv)
}

/// Inverse of a symmetric positive definite matrix via Cholesky.
pub fn invert_dense_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !m.is_square() {
        return Err(Error::domain("matrix is not square"));
    }
    let n = m.nrows();
    let chol = Cholesky::new(m.clone()).ok_or_else(|| {
        // nalgebra does not report where it failed; find the first bad leading minor
        let row = (1..=n)
            .find(|&k| Cholesky::new(m.view((0, 0), (k, k)).into_owned()).is_none())
            .unwrap_or(0)
            .saturating_sub(1);
        Error::NotPositiveDefinite { row, pivot: f64::NAN }
    })?;
    let inv = chol.inverse();
    Ok(DMatrix::from_fn(n, n, |r, c| 0.5 * (inv[(r, c)] + inv[(c, r)])))
}

/// `Psi = Delta^{-1} Sigma Delta^{-1}` with `Delta = diag(sqrt(Sigma_ii))`.
pub fn correlation_transform(sigma: DMatrix<f64>) -> Result<CorrelationResult> {
    let n = sigma.nrows();
    if let Some(k) = (0..n).find(|&k| !(sigma[(k, k)] > 0.0)) {
        return Err(Error::domain(format!("covariance diagonal entry {k} is not positive")));
    }
    let delta = DVector::from_fn(n, |k, _| sigma[(k, k)].sqrt());
    let psi = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            1.0
        } else {
            sigma[(r, c)] / (delta[r] * delta[c])
        }
    });
    Ok(CorrelationResult { sigma, delta, psi })
}

/// Inverse of a structured matrix: tridiagonal elimination where possible,
/// dense Cholesky otherwise.
pub fn invert_structured(m: &StructuredMatrix) -> Result<DMatrix<f64>> {
    match m {
        StructuredMatrix::SymTridiagonal { diag, off, n } => invert_tridiagonal(*diag, *off, *n),
        other => invert_dense_spd(&other.to_dense()),
    }
}

/// Precision matrix of `g`, inverted and transformed to correlations.
pub fn model_correlation(g: GraphSpec, tau: Tau) -> Result<CorrelationResult> {
    let sigma = invert_structured(&precision_matrix(g, tau))?;
    correlation_transform(sigma)
}

/// Largest entry of `|A B - I|`.
pub fn inverse_residual(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    (a * b - DMatrix::<f64>::identity(n, n)).amax()
}
