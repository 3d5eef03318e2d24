use nalgebra::DVector;

use crate::reduction::QuadProgram;

use super::residuals::IpmState;
use super::step::StepDirections;
use super::IpmError;

/// Halvings tried before giving up.
pub const MAX_BACKTRACKS: usize = 30;

/// Largest steps in `(0, 1]` keeping `s + α p_s ≥ (1-τ)s` and the same for
/// `z`.
pub fn fraction_to_boundary(
    s: &DVector<f64>,
    ps: &DVector<f64>,
    z: &DVector<f64>,
    pz: &DVector<f64>,
    tau: f64,
) -> (f64, f64) {
    (max_step(s, ps, tau), max_step(z, pz, tau))
}

fn max_step(x: &DVector<f64>, p: &DVector<f64>, tau: f64) -> f64 {
    let mut alpha: f64 = 1.0;
    for (xi, pi) in x.iter().zip(p.iter()) {
        if *pi < 0.0 {
            alpha = alpha.min(-tau * xi / pi);
        }
    }
    alpha
}

/// Exact-penalty weight: `10‖λ‖∞ + 1`, raised to `‖λ + p_λ‖∞ + 1` when that
/// is larger so the Newton direction stays a descent direction.
pub fn penalty_parameter(lambda: &DVector<f64>, dirs: &StepDirections) -> f64 {
    let base = 10.0 * lambda.amax() + 1.0;
    let next = (lambda + &dirs.plambda).amax() + 1.0;
    base.max(next)
}

/// `½vᵀHv + hᵀv - μ Σ log s_i + ρ ‖Jv - d + s‖₁`. Returns `+inf` outside
/// the domain.
pub fn merit(qp: &QuadProgram, v: &DVector<f64>, s: &DVector<f64>, mu: f64, rho: f64) -> f64 {
    if s.iter().any(|&si| si <= 0.0) {
        return f64::INFINITY;
    }
    let quad = 0.5 * v.dot(&(&qp.hessian * v)) + qp.linear.dot(v);
    let barrier: f64 = s.iter().map(|si| si.ln()).sum();
    let infeas = (&qp.jacobian * v - &qp.rhs + s).lp_norm(1);
    quad - mu * barrier + rho * infeas
}

/// Directional derivative of [`merit`] along `(p_v, p_s)`. The penalty term
/// uses the fact that the linearized constraint residual after the step is
/// zero.
pub fn merit_slope(
    qp: &QuadProgram,
    state: &IpmState,
    dirs: &StepDirections,
    r3: &DVector<f64>,
    rho: f64,
) -> f64 {
    let grad = &qp.hessian * &state.v + &qp.linear;
    let barrier: f64 = dirs
        .ps
        .iter()
        .zip(state.s.iter())
        .map(|(p, s)| p / s)
        .sum();
    grad.dot(&dirs.pv) - state.mu * barrier - rho * r3.lp_norm(1)
}

/// Backtracking from `alpha_max` by halving until the Armijo condition
/// holds on the barrier merit function.
#[allow(clippy::too_many_arguments)]
pub fn line_search(
    qp: &QuadProgram,
    state: &IpmState,
    dirs: &StepDirections,
    r3: &DVector<f64>,
    alpha_max: f64,
    eta: f64,
    rho: f64,
) -> Result<f64, IpmError> {
    let phi0 = merit(qp, &state.v, &state.s, state.mu, rho);
    let slope = merit_slope(qp, state, dirs, r3, rho);
    // Differences below this are roundoff in evaluating the merit itself.
    let noise = 10.0 * f64::EPSILON * (1.0 + phi0.abs());
    let mut alpha = alpha_max;
    for _ in 0..=MAX_BACKTRACKS {
        let v = &state.v + &dirs.pv * alpha;
        let s = &state.s + &dirs.ps * alpha;
        let phi = merit(qp, &v, &s, state.mu, rho);
        if phi <= phi0 + eta * alpha * slope + noise {
            return Ok(alpha);
        }
        alpha *= 0.5;
    }
    Err(IpmError::LineSearchFailure {
        merit: phi0,
        slope,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    #[test]
    fn nonnegative_directions_allow_full_step() {
        let s = DVector::from_vec(vec![1.0, 2.0]);
        let p = DVector::from_vec(vec![0.0, 3.0]);
        assert_eq!(fraction_to_boundary(&s, &p, &s, &p, 0.995), (1.0, 1.0));
    }

    #[test]
    fn single_blocking_component() {
        let s = DVector::from_vec(vec![1.0]);
        let p = DVector::from_vec(vec![-1.0]);
        let (a, _) = fraction_to_boundary(&s, &p, &s, &DVector::zeros(1), 0.995);
        assert_abs_diff_eq!(a, 0.995);
    }

    #[test]
    fn tightest_component_wins() {
        let s = DVector::from_vec(vec![2.0, 1.0]);
        let p = DVector::from_vec(vec![-4.0, -1.0]);
        let z = DVector::from_vec(vec![1.0, 1.0]);
        let (a, az) = fraction_to_boundary(&s, &p, &z, &DVector::zeros(2), 0.9);
        assert_abs_diff_eq!(a, 0.45, epsilon = 1e-15);
        assert_eq!(az, 1.0);
        let next = &s + &p * a;
        for i in 0..2 {
            assert!(next[i] >= 0.1 * s[i] - 1e-15);
        }
    }

    fn unconstrained() -> QuadProgram {
        QuadProgram::new(
            DMatrix::from_element(1, 1, 4.0),
            DVector::from_element(1, 2.0),
            0.0,
            DMatrix::zeros(0, 1),
            DVector::zeros(0),
        )
    }

    fn state_at(v: f64) -> IpmState {
        IpmState {
            v: DVector::from_element(1, v),
            s: DVector::zeros(0),
            lambda: DVector::zeros(0),
            z: DVector::zeros(0),
            mu: 0.1,
            iter: 0,
        }
    }

    fn dirs(pv: f64) -> StepDirections {
        StepDirections {
            pv: DVector::from_element(1, pv),
            ps: DVector::zeros(0),
            plambda: DVector::zeros(0),
            pz: DVector::zeros(0),
        }
    }

    #[test]
    fn newton_step_accepted_immediately() {
        // from v = 100, the Newton step to -0.5 is -100.5
        let qp = unconstrained();
        let alpha = line_search(&qp, &state_at(100.0), &dirs(-100.5), &DVector::zeros(0), 1.0, 1e-4, 1.0)
            .unwrap();
        assert_eq!(alpha, 1.0);
    }

    #[test]
    fn ascent_direction_fails() {
        let qp = unconstrained();
        let err = line_search(&qp, &state_at(100.0), &dirs(100.5), &DVector::zeros(0), 1.0, 1e-4, 1.0)
            .unwrap_err();
        assert!(matches!(err, IpmError::LineSearchFailure { .. }));
    }

    #[test]
    fn toy_step_decreases_merit() {
        // m = 1 toy with the hand-computed directions
        let qp = QuadProgram::new(
            DMatrix::from_element(1, 1, 4.0),
            DVector::from_element(1, 2.0),
            0.0,
            DMatrix::from_element(1, 1, -1.0),
            DVector::from_element(1, 0.0),
        );
        let state = IpmState {
            v: DVector::from_element(1, 0.0),
            s: DVector::from_element(1, 1.0),
            lambda: DVector::from_element(1, 1.0),
            z: DVector::from_element(1, 1.0),
            mu: 0.1,
            iter: 0,
        };
        let d = StepDirections {
            pv: DVector::from_element(1, -0.18),
            ps: DVector::from_element(1, -1.18),
            plambda: DVector::from_element(1, 0.28),
            pz: DVector::from_element(1, 0.28),
        };
        let r3 = DVector::from_element(1, 1.0);
        let (amax, _) = fraction_to_boundary(&state.s, &d.ps, &state.z, &d.pz, 0.995);
        assert_abs_diff_eq!(amax, 0.995 / 1.18, epsilon = 1e-15);
        let rho = penalty_parameter(&state.lambda, &d);
        assert_abs_diff_eq!(rho, 11.0);
        let alpha = line_search(&qp, &state, &d, &r3, amax, 1e-4, rho).unwrap();
        assert!(alpha > 0.0);
        // merit by hand: φ(0) = 0 - 0 + 11·|0 - 0 + 1| = 11
        assert_abs_diff_eq!(merit(&qp, &state.v, &state.s, 0.1, rho), 11.0);
        let v = -0.18 * alpha;
        let s = 1.0 - 1.18 * alpha;
        let by_hand = 2.0 * v * v + 2.0 * v - 0.1 * s.ln() + 11.0 * (-v + s).abs();
        let next = merit(
            &qp,
            &DVector::from_element(1, v),
            &DVector::from_element(1, s),
            0.1,
            rho,
        );
        assert_abs_diff_eq!(next, by_hand, epsilon = 1e-12);
        assert!(next < 11.0);
    }
}
