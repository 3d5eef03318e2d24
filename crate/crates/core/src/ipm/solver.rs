use std::time::{Duration, Instant};

use nalgebra::DVector;

use crate::reduction::{recover_trajectory, DenseQp, QuadProgram, Trajectory};

use super::line_search::{fraction_to_boundary, line_search, penalty_parameter};
use super::options::IpmOptions;
use super::residuals::{compute_residuals, IpmState, Residuals};
use super::step::{
    assemble_condensed, augmented_residual, factorize_with_ladder, sigma, step_directions,
};
use super::IpmError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpmStatus {
    Converged,
    MaxIter,
    FactorizationFailure,
    LineSearchFailure,
}

impl IpmStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            IpmStatus::Converged => "converged",
            IpmStatus::MaxIter => "max_iter",
            IpmStatus::FactorizationFailure => "factorization_failure",
            IpmStatus::LineSearchFailure => "line_search_failure",
        }
    }
}

impl std::fmt::Display for IpmStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of a termination test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIter,
    Continue,
}

/// `converged` iff `kkt_error ≤ tol` and `μ ≤ tol`; `max_iter` once the cap
/// is reached.
pub fn check_termination(res: &Residuals, state: &IpmState, opts: &IpmOptions) -> Termination {
    if res.kkt_error <= opts.tol && state.mu <= opts.tol {
        Termination::Converged
    } else if state.iter >= opts.max_iter {
        Termination::MaxIter
    } else {
        Termination::Continue
    }
}

/// Monotone barrier rule: once the barrier subproblem is solved to `10μ`,
/// shrink μ by `kappa_mu`, never below `tol/10`.
pub fn update_barrier(mu: f64, subproblem_error: f64, opts: &IpmOptions) -> f64 {
    if subproblem_error <= 10.0 * mu {
        (opts.kappa_mu * mu).max(opts.tol / 10.0).min(mu)
    } else {
        mu
    }
}

/// Column order of the iteration log.
pub const LOG_HEADER: &str = "iter mu alpha alpha_z kkt_error objective";

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub mu: f64,
    pub alpha: f64,
    pub alpha_z: f64,
    pub kkt_error: f64,
    pub objective: f64,
    /// Shift from the regularization ladder, when one was needed.
    pub regularization: Option<f64>,
    /// Residual of the uncondensed Newton system (see
    /// [`IpmOptions::check_augmented`]).
    pub augmented_residual: Option<f64>,
    pub min_slack: f64,
    pub min_dual: f64,
}

impl IterationRecord {
    pub fn log_line(&self) -> String {
        format!(
            "{} {:.6e} {:.6e} {:.6e} {:.6e} {:.12e}",
            self.iter, self.mu, self.alpha, self.alpha_z, self.kkt_error, self.objective
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Timing {
    pub total: Duration,
    /// Factorization and triangular solves.
    pub linalg: Duration,
}

#[derive(Debug, Clone)]
pub struct IpmResult {
    pub status: IpmStatus,
    /// Recovered trajectory; only present when solving a [`DenseQp`].
    pub solution: Option<Trajectory>,
    pub v: DVector<f64>,
    pub s: DVector<f64>,
    pub lambda: DVector<f64>,
    pub z: DVector<f64>,
    pub mu: f64,
    pub iterations: usize,
    pub kkt_error: f64,
    /// Dense objective `½vᵀHv + hᵀv + h0` at exit.
    pub objective: f64,
    pub timing: Timing,
    pub history: Vec<IterationRecord>,
    /// Diagnostic for the failure statuses.
    pub message: Option<String>,
}

impl IpmResult {
    pub fn converged(&self) -> bool {
        self.status == IpmStatus::Converged
    }
}

/// Solves a reduced MPC problem and maps the result back to trajectories.
pub fn solve(qp: &DenseQp, opts: &IpmOptions) -> Result<IpmResult, IpmError> {
    let mut result = solve_program(&qp.program, opts)?;
    result.solution = Some(recover_trajectory(qp, &result.v).map_err(IpmError::Problem)?);
    Ok(result)
}

/// Condensed-space interior-point loop on a plain dense QP.
pub fn solve_program(qp: &QuadProgram, opts: &IpmOptions) -> Result<IpmResult, IpmError> {
    opts.validate()?;
    let start = Instant::now();
    let backend = opts.backend.backend();
    let mut linalg = Duration::ZERO;
    let mut state = IpmState::initial(qp, opts.mu_init);
    let mut history = Vec::new();
    let mut message = None;

    let status = loop {
        let mut res = compute_residuals(qp, &state);
        let mu = update_barrier(state.mu, res.kkt_error, opts);
        if mu != state.mu {
            state.mu = mu;
            res = compute_residuals(qp, &state);
        }
        match check_termination(&res, &state, opts) {
            Termination::Converged => break IpmStatus::Converged,
            Termination::MaxIter => break IpmStatus::MaxIter,
            Termination::Continue => {}
        }

        let sig = sigma(&state);
        let condensed = assemble_condensed(qp, &sig, backend);
        let t0 = Instant::now();
        let factored = factorize_with_ladder(backend, &condensed);
        linalg += t0.elapsed();
        let (factor, regularization) = match factored {
            Ok(f) => f,
            Err(e) => {
                message = Some(format!("condensed matrix could not be factorized: {e}"));
                break IpmStatus::FactorizationFailure;
            }
        };
        let t0 = Instant::now();
        let dirs = step_directions(qp, &state, &res, &factor, backend);
        linalg += t0.elapsed();
        let dirs = match dirs {
            Ok(d) => d,
            Err(e) => {
                message = Some(format!("triangular solve failed: {e}"));
                break IpmStatus::FactorizationFailure;
            }
        };
        let augmented = opts
            .check_augmented
            .then(|| augmented_residual(qp, &state, &res, &dirs));

        let (alpha_max, alpha_z) =
            fraction_to_boundary(&state.s, &dirs.ps, &state.z, &dirs.pz, opts.tau);
        let rho = penalty_parameter(&state.lambda, &dirs);
        let alpha = match line_search(qp, &state, &dirs, &res.r3, alpha_max, opts.armijo_eta, rho) {
            Ok(a) => a,
            Err(e) => {
                message = Some(e.to_string());
                break IpmStatus::LineSearchFailure;
            }
        };

        state.v += &dirs.pv * alpha;
        state.s += &dirs.ps * alpha;
        state.lambda += &dirs.plambda * alpha;
        state.z += &dirs.pz * alpha_z;
        state.iter += 1;

        history.push(IterationRecord {
            iter: state.iter,
            mu: state.mu,
            alpha,
            alpha_z,
            kkt_error: res.kkt_error,
            objective: qp.objective(&state.v),
            regularization,
            augmented_residual: augmented,
            min_slack: state.min_slack(),
            min_dual: state.min_dual(),
        });
    };

    let res = compute_residuals(qp, &state);
    Ok(IpmResult {
        status,
        solution: None,
        objective: qp.objective(&state.v),
        iterations: state.iter,
        kkt_error: res.kkt_error,
        mu: state.mu,
        v: state.v,
        s: state.s,
        lambda: state.lambda,
        z: state.z,
        timing: Timing {
            total: start.elapsed(),
            linalg,
        },
        history,
        message,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn res_with(kkt: f64) -> Residuals {
        Residuals {
            r1: DVector::zeros(0),
            r2: DVector::zeros(0),
            r3: DVector::zeros(0),
            kkt_error: kkt,
        }
    }

    fn state_with(mu: f64, iter: usize) -> IpmState {
        IpmState {
            v: DVector::zeros(0),
            s: DVector::zeros(0),
            lambda: DVector::zeros(0),
            z: DVector::zeros(0),
            mu,
            iter,
        }
    }

    #[test]
    fn barrier_rule() {
        let opts = IpmOptions::default();
        assert_abs_diff_eq!(update_barrier(0.1, 1e-3, &opts), 0.02, epsilon = 1e-17);
        assert_eq!(update_barrier(0.1, 10.0, &opts), 0.1);
        assert_eq!(update_barrier(1e-9, 0.0, &opts), 1e-9);
    }

    #[test]
    fn termination_branches() {
        let opts = IpmOptions { max_iter: 5, ..Default::default() };
        assert_eq!(
            check_termination(&res_with(1e-9), &state_with(1e-9, 3), &opts),
            Termination::Converged
        );
        assert_eq!(
            check_termination(&res_with(1e-3), &state_with(1e-9, 5), &opts),
            Termination::MaxIter
        );
        assert_eq!(
            check_termination(&res_with(1e-9), &state_with(1e-2, 2), &opts),
            Termination::Continue
        );
    }

    #[test]
    fn unconstrained_scalar() {
        let qp = QuadProgram::new(
            DMatrix::from_element(1, 1, 4.0),
            DVector::from_element(1, 2.0),
            2.0,
            DMatrix::zeros(0, 1),
            DVector::zeros(0),
        );
        let r = solve_program(&qp, &IpmOptions::default()).unwrap();
        assert!(r.converged());
        assert_abs_diff_eq!(r.v[0], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(r.objective, 1.5, epsilon = 1e-12);
    }

    #[test]
    fn bound_active_at_zero() {
        // min ½·4v² + 2v  s.t. v ≥ 0
        let qp = QuadProgram::new(
            DMatrix::from_element(1, 1, 4.0),
            DVector::from_element(1, 2.0),
            0.0,
            DMatrix::from_element(1, 1, -1.0),
            DVector::from_element(1, 0.0),
        );
        let r = solve_program(&qp, &IpmOptions::default()).unwrap();
        assert!(r.converged(), "{:?}", r.status);
        assert!(r.v[0].abs() < 1e-7);
        assert_abs_diff_eq!(r.z[0], 2.0, epsilon = 1e-6);
        assert!((r.lambda[0] - r.z[0]).abs() <= 10.0 * 1e-8);
    }

    #[test]
    fn iteration_cap() {
        let qp = QuadProgram::new(
            DMatrix::from_element(1, 1, 4.0),
            DVector::from_element(1, 2.0),
            0.0,
            DMatrix::from_element(1, 1, -1.0),
            DVector::from_element(1, 0.0),
        );
        let r = solve_program(&qp, &IpmOptions { max_iter: 1, ..Default::default() }).unwrap();
        assert_eq!(r.status, IpmStatus::MaxIter);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn log_line_has_six_columns() {
        let rec = IterationRecord {
            iter: 3,
            mu: 0.1,
            alpha: 1.0,
            alpha_z: 0.5,
            kkt_error: 1e-3,
            objective: -2.0,
            regularization: None,
            augmented_residual: None,
            min_slack: 1.0,
            min_dual: 1.0,
        };
        assert_eq!(rec.log_line().split_whitespace().count(), LOG_HEADER.split(' ').count());
    }
}
