//! Dense symmetric positive-definite kernels.
//!
//! Everything the interior-point loop needs from linear algebra goes through
//! [`FactorizationBackend`]: forming `Jᵀ diag(σ) J`, factorizing the condensed
//! matrix and solving with the factor. Two backends ship with the crate:
//!
//! * `reference`: sequential blocked right-looking Cholesky.
//! * `parallel` (feature `parallel`): the same blocking with the trailing
//!   updates and the column blocks of the Gram product spread over rayon.
//!
//! Both use a fixed partition of the work, so each one is bitwise
//! deterministic regardless of thread scheduling.

mod backend;
mod cholesky;
mod gram;
mod kernels;

pub use backend::{
    available_backends, backend_by_name, BackendKind, Capabilities, FactorizationBackend,
    ReferenceBackend,
};
#[cfg(feature = "parallel")]
pub use backend::ParallelBackend;
pub use cholesky::{cholesky_factorize, cholesky_solve, Factor, CHOLESKY_BLOCK};
pub use gram::{gram_weighted, GRAM_COLUMN_BLOCK, GRAM_ROW_CHUNK};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot})")]
    NotPositiveDefinite { pivot: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("unknown factorization backend `{0}`")]
    UnknownBackend(String),
}
