//! Condensed-space primal-dual interior-point method.
//!
//! Slacks turn `Jv ≤ d` into `Jv - d + s = 0, s ≥ 0`, the bound is replaced
//! by a log barrier, and each Newton step eliminates `p_s` and `p_λ` so that
//! only the `Tn_u x Tn_u` positive-definite matrix `H + JᵀΣ_sJ` is
//! factorized:
//!
//! ```text
//! (H + JᵀΣ_sJ) p_v = -r1 + Jᵀr2 - JᵀΣ_s r3
//! p_s = -r3 - J p_v
//! p_λ = -r2 + Σ_s r3 + Σ_s J p_v
//! p_z = μS⁻¹1 - z - Σ_s p_s
//! ```
//!
//! `v`, `s` and `λ` share the step length from a backtracking line search on
//! a barrier merit function; `z` takes its own fraction-to-boundary step.

mod line_search;
mod options;
mod residuals;
mod solver;
mod step;

pub use line_search::{
    fraction_to_boundary, line_search, merit, merit_slope, penalty_parameter, MAX_BACKTRACKS,
};
pub use options::IpmOptions;
pub use residuals::{
    complementarity_scaling, compute_residuals, dual_scaling, IpmState, Residuals,
};
pub use solver::{
    check_termination, solve, solve_program, update_barrier, IpmResult, IpmStatus,
    IterationRecord, Termination, Timing, LOG_HEADER,
};
pub use step::{
    assemble_condensed, augmented_residual, factorize_with_ladder, sigma, step_directions,
    StepDirections, REGULARIZATION_LADDER,
};

use thiserror::Error;

use crate::problem::ProblemError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IpmError {
    #[error("invalid solver options: {0}")]
    InvalidOptions(String),
    #[error("line search failed after {} trials (merit {merit:.6e}, slope {slope:.3e})", MAX_BACKTRACKS + 1)]
    LineSearchFailure { merit: f64, slope: f64 },
    #[error(transparent)]
    Problem(#[from] ProblemError),
}
