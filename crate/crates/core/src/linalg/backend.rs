use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use super::cholesky::{factorize_blocked, Factor, CHOLESKY_BLOCK};
use super::gram::gram_blocked;
use super::LinalgError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Capabilities {
    /// Factorizes into the caller's buffer without a copy.
    pub in_place: bool,
    /// Uses more than one thread.
    pub parallel: bool,
}

/// The plug point for dense factorization.
///
/// A backend must pass the shared conformance suite in `tests/backend_conformance.rs`
/// before it is added to [`backend_by_name`].
pub trait FactorizationBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn capabilities(&self) -> Capabilities;
    /// Factorizes a symmetric positive-definite matrix (lower triangle read).
    fn factorize(&self, m: &DMatrix<f64>) -> Result<Factor, LinalgError>;
    fn solve(&self, factor: &Factor, rhs: &DVector<f64>) -> Result<DVector<f64>, LinalgError> {
        factor.solve(rhs)
    }
    /// `Jᵀ diag(σ) J`, exactly symmetric.
    fn gram_weighted(&self, j: &DMatrix<f64>, sigma: &DVector<f64>) -> DMatrix<f64>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceBackend;

impl FactorizationBackend for ReferenceBackend {
    fn name(&self) -> &'static str {
        "reference"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities::default()
    }

    fn factorize(&self, m: &DMatrix<f64>) -> Result<Factor, LinalgError> {
        factorize_blocked(m, CHOLESKY_BLOCK, false)
    }

    fn gram_weighted(&self, j: &DMatrix<f64>, sigma: &DVector<f64>) -> DMatrix<f64> {
        gram_blocked(j, sigma, false)
    }
}

#[cfg(feature = "parallel")]
#[derive(Debug, Clone, Copy, Default)]
pub struct ParallelBackend;

#[cfg(feature = "parallel")]
impl FactorizationBackend for ParallelBackend {
    fn name(&self) -> &'static str {
        "parallel"
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities {
            in_place: false,
            parallel: true,
        }
    }

    fn factorize(&self, m: &DMatrix<f64>) -> Result<Factor, LinalgError> {
        factorize_blocked(m, CHOLESKY_BLOCK, true)
    }

    fn gram_weighted(&self, j: &DMatrix<f64>, sigma: &DVector<f64>) -> DMatrix<f64> {
        gram_blocked(j, sigma, true)
    }
}

/// Selector carried by solver options and the CLI `--backend` flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendKind {
    #[default]
    Reference,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl BackendKind {
    pub fn backend(self) -> &'static dyn FactorizationBackend {
        match self {
            BackendKind::Reference => &ReferenceBackend,
            #[cfg(feature = "parallel")]
            BackendKind::Parallel => &ParallelBackend,
        }
    }

    pub fn name(self) -> &'static str {
        self.backend().name()
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BackendKind {
    type Err = LinalgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "reference" => Ok(BackendKind::Reference),
            #[cfg(feature = "parallel")]
            "parallel" => Ok(BackendKind::Parallel),
            other => Err(LinalgError::UnknownBackend(other.to_string())),
        }
    }
}

pub fn available_backends() -> Vec<BackendKind> {
    vec![
        BackendKind::Reference,
        #[cfg(feature = "parallel")]
        BackendKind::Parallel,
    ]
}

pub fn backend_by_name(name: &str) -> Result<&'static dyn FactorizationBackend, LinalgError> {
    name.parse::<BackendKind>().map(BackendKind::backend)
}
