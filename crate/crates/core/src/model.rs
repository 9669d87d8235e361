//! Model family: graphs, the partial correlation `tau`, decay parameters and
//! the structured matrices built from them.

use std::fmt;
use std::ops::RangeInclusive;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Partial correlation between chain neighbours, `0 <= tau < 1/2`.
///
/// `tau = 0` is representable (the identity model) but every operation that
/// needs a finite decay rate rejects it.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Tau(f64);

impl Tau {
    pub const ZERO: Tau = Tau(0.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || !(0.0..0.5).contains(&value) {
            return Err(Error::domain(format!("tau = {value} is outside [0, 1/2)")));
        }
        Ok(Tau(value))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    /// Rejects `tau = 0`, for which the decay rate is infinite.
    pub fn require_positive(self) -> Result<Self> {
        if self.0 > 0.0 {
            Ok(self)
        } else {
            Err(Error::domain("tau must be strictly positive for a finite decay rate"))
        }
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// `tau` together with the decay rate `lambda` (nats per lattice step) and
/// the decay base `alpha = exp(-lambda)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayParams {
    pub tau: Tau,
    pub lambda: f64,
    pub alpha: f64,
}

impl DecayParams {
    /// `alpha^k`, evaluated as `exp(-k lambda)`.
    pub fn alpha_pow(&self, k: u64) -> f64 {
        (-(k as f64) * self.lambda).exp()
    }
}

/// Computes `lambda = arccosh(1 / (2 tau))` and `alpha = exp(-lambda)`.
///
/// The logarithmic form `ln[(1 + sqrt(1 - 4 tau^2)) / (2 tau)]` is used with
/// the square root taken as `sqrt((1 - 2 tau)(1 + 2 tau))` and the logarithm
/// as `ln_1p` of `(sqrt(..) + (1 - 2 tau)) / (2 tau)`, which keeps full
/// relative accuracy as `tau -> 1/2` where `lambda -> 0`.
pub fn decay_params(tau: Tau) -> Result<DecayParams> {
    let t = tau.require_positive()?.get();
    let root = ((1.0 - 2.0 * t) * (1.0 + 2.0 * t)).sqrt();
    let lambda = ((root + (1.0 - 2.0 * t)) / (2.0 * t)).ln_1p();
    Ok(DecayParams {
        tau,
        lambda,
        alpha: (-lambda).exp(),
    })
}

/// Parameters of the massive Gaussian free field on `Z^d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GffParams {
    beta: f64,
    mass: f64,
    dim: u32,
}

impl GffParams {
    /// Only `d = 1` is supported.
    pub fn new(beta: f64, mass: f64, dim: u32) -> Result<Self> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::domain(format!("beta = {beta} must be finite and >= 0")));
        }
        if !(mass.is_finite() && mass >= 0.0) {
            return Err(Error::domain(format!("mass = {mass} must be finite and >= 0")));
        }
        if dim != 1 {
            return Err(Error::domain(format!("dimension d = {dim} is not supported, only d = 1")));
        }
        Ok(GffParams { beta, mass, dim })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }
}

/// Maps free-field parameters to the chain's partial correlation,
/// `tau = (beta / 4d) / (2 beta / 4d + m^2 / 2)`.
pub fn gff_to_tau(p: GffParams) -> Result<Tau> {
    let coupling = p.beta / (4.0 * f64::from(p.dim));
    let denom = 2.0 * coupling + 0.5 * p.mass * p.mass;
    if denom == 0.0 {
        return Err(Error::domain("beta and mass cannot both be zero"));
    }
    Tau::new(coupling / denom)
}

/// Free-field correlation rate at `beta = 1`:
/// `xi_m = ln(1 + m^2 + sqrt(2 m^2 + m^4))`.
pub fn xi_mass(m: f64) -> Result<f64> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::domain(format!("mass = {m} must be strictly positive")));
    }
    let m2 = m * m;
    Ok((m2 + m * (2.0 + m2).sqrt()).ln_1p())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    /// Path on nodes `1..=n`.
    OpenChain,
    /// Path on nodes `-n..=n`.
    CenteredChain,
    /// Cycle on nodes `1..=n`, `n >= 3`.
    Cycle,
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphKind::OpenChain => "open",
            GraphKind::CenteredChain => "centered",
            GraphKind::Cycle => "cycle",
        })
    }
}

/// A conditional-independence graph and its size parameter.
///
/// For the centered chain `n` is the half-width: the graph has `2n + 1` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GraphSpec {
    kind: GraphKind,
    n: usize,
}

impl GraphSpec {
    pub fn new(kind: GraphKind, n: usize) -> Result<Self> {
        match kind {
            GraphKind::OpenChain if n == 0 => Err(Error::domain("open chain needs n >= 1")),
            GraphKind::Cycle if n < 3 => Err(Error::domain(format!("cycle needs n >= 3, got {n}"))),
            _ => Ok(GraphSpec { kind, n }),
        }
    }

    pub fn open(n: usize) -> Result<Self> {
        Self::new(GraphKind::OpenChain, n)
    }

    pub fn centered(n: usize) -> Result<Self> {
        Self::new(GraphKind::CenteredChain, n)
    }

    pub fn cycle(n: usize) -> Result<Self> {
        Self::new(GraphKind::Cycle, n)
    }

    pub fn kind(&self) -> GraphKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self.kind {
            GraphKind::CenteredChain => 2 * self.n + 1,
            _ => self.n,
        }
    }

    /// Native node labels: `-n..=n` for the centered chain, `1..=n` otherwise.
    pub fn indices(&self) -> RangeInclusive<i64> {
        let n = self.n as i64;
        match self.kind {
            GraphKind::CenteredChain => -n..=n,
            _ => 1..=n,
        }
    }

    pub fn contains(&self, i: i64) -> bool {
        self.indices().contains(&i)
    }

    /// Zero-based matrix row of node label `i`.
    pub fn position(&self, i: i64) -> Result<usize> {
        if !self.contains(i) {
            let r = self.indices();
            return Err(Error::domain(format!(
                "index {i} outside {}..={} for {} graph",
                r.start(),
                r.end(),
                self.kind
            )));
        }
        Ok((i - self.indices().start()) as usize)
    }
}

/// Symmetric matrix in compact form.
#[derive(Debug, Clone, PartialEq)]
pub enum StructuredMatrix {
    SymTridiagonal { diag: f64, off: f64, n: usize },
    /// First row of a symmetric circulant, `row[k] == row[n - k]`.
    SymCirculant(Vec<f64>),
    Dense(DMatrix<f64>),
}

impl StructuredMatrix {
    pub fn circulant(first_row: Vec<f64>) -> Result<Self> {
        let n = first_row.len();
        if n == 0 {
            return Err(Error::domain("circulant needs at least one entry"));
        }
        if (1..n).any(|k| first_row[k] != first_row[n - k]) {
            return Err(Error::domain("circulant first row is not symmetric"));
        }
        Ok(StructuredMatrix::SymCirculant(first_row))
    }

    pub fn dim(&self) -> usize {
        match self {
            StructuredMatrix::SymTridiagonal { n, .. } => *n,
            StructuredMatrix::SymCirculant(row) => row.len(),
            StructuredMatrix::Dense(m) => m.nrows(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        match self {
            StructuredMatrix::SymTridiagonal { diag, off, .. } => match r.abs_diff(c) {
                0 => *diag,
                1 => *off,
                _ => 0.0,
            },
            StructuredMatrix::SymCirculant(row) => {
                let n = row.len();
                row[(c + n - r % n) % n]
            }
            StructuredMatrix::Dense(m) => m[(r, c)],
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            StructuredMatrix::Dense(m) => m.clone(),
            _ => {
                let n = self.dim();
                DMatrix::from_fn(n, n, |r, c| self.get(r, c))
            }
        }
    }
}

fn structured(g: GraphSpec, diag: f64, off: f64) -> StructuredMatrix {
    match g.kind() {
        GraphKind::OpenChain | GraphKind::CenteredChain => StructuredMatrix::SymTridiagonal {
            diag,
            off,
            n: g.size(),
        },
        GraphKind::Cycle => {
            let n = g.size();
            let mut row = vec![0.0; n];
            row[0] = diag;
            row[1] = off;
            row[n - 1] = off;
            StructuredMatrix::SymCirculant(row)
        }
    }
}

/// Partial correlation matrix: unit diagonal and `tau` on every edge.
pub fn partial_correlation_matrix(g: GraphSpec, tau: Tau) -> StructuredMatrix {
    structured(g, 1.0, tau.get())
}

/// Precision matrix `2I - Pi`: unit diagonal and `-tau` on every edge.
pub fn precision_matrix(g: GraphSpec, tau: Tau) -> StructuredMatrix {
    structured(g, 1.0, -tau.get())
}
