use nalgebra::DVector;

use crate::reduction::QuadProgram;

/// Primal-dual iterate. `s` and `z` stay strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct IpmState {
    pub v: DVector<f64>,
    pub s: DVector<f64>,
    pub lambda: DVector<f64>,
    pub z: DVector<f64>,
    pub mu: f64,
    pub iter: usize,
}

impl IpmState {
    /// `v = 0`, `s = max(1, d - Jv)`, `z = μ/s`, `λ = z`.
    pub fn initial(qp: &QuadProgram, mu: f64) -> Self {
        let v = DVector::zeros(qp.num_vars());
        let jv = &qp.jacobian * &v;
        let s = (&qp.rhs - jv).map(|gap| gap.max(1.0));
        let z = s.map(|si| mu / si);
        IpmState {
            lambda: z.clone(),
            v,
            s,
            z,
            mu,
            iter: 0,
        }
    }

    pub fn min_slack(&self) -> f64 {
        self.s.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_dual(&self) -> f64 {
        self.z.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    /// `Hv + h + Jᵀλ`.
    pub r1: DVector<f64>,
    /// `λ - μ S⁻¹ 1`.
    pub r2: DVector<f64>,
    /// `Jv - d + s`.
    pub r3: DVector<f64>,
    pub kkt_error: f64,
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

/// Dual scaling: `max(1, ‖(h, λ)‖∞ / (m + n))`.
pub fn dual_scaling(qp: &QuadProgram, state: &IpmState) -> f64 {
    let count = (qp.num_vars() + qp.num_ineq()).max(1) as f64;
    (inf_norm(&qp.linear).max(inf_norm(&state.lambda)) / count).max(1.0)
}

/// Complementarity scaling: `max(1, ‖(s, z)‖∞ / (m + n))`.
pub fn complementarity_scaling(qp: &QuadProgram, state: &IpmState) -> f64 {
    let count = (qp.num_vars() + qp.num_ineq()).max(1) as f64;
    (inf_norm(&state.s).max(inf_norm(&state.z)) / count).max(1.0)
}

/// Residuals of the barrier KKT conditions at the state's μ.
///
/// `kkt_error` is the largest of `‖r1‖∞/σd`, `‖r3‖∞`, `‖SZ1 - μ1‖∞/σc` and
/// `‖λ - z‖∞/σd`.
pub fn compute_residuals(qp: &QuadProgram, state: &IpmState) -> Residuals {
    let mu = state.mu;
    let r1 = &qp.hessian * &state.v + &qp.linear + qp.jacobian.tr_mul(&state.lambda);
    let r2 = DVector::from_iterator(
        state.s.len(),
        state.lambda.iter().zip(state.s.iter()).map(|(l, s)| l - mu / s),
    );
    let r3 = &qp.jacobian * &state.v - &qp.rhs + &state.s;

    let sd = dual_scaling(qp, state);
    let sc = complementarity_scaling(qp, state);
    let comp = state
        .s
        .iter()
        .zip(state.z.iter())
        .map(|(s, z)| (s * z - mu).abs())
        .fold(0.0, f64::max);
    let consistency = (&state.lambda - &state.z).amax();
    let kkt_error = (inf_norm(&r1) / sd)
        .max(inf_norm(&r3))
        .max(comp / sc)
        .max(consistency / sd);
    Residuals {
        r1,
        r2,
        r3,
        kkt_error,
    }
}
