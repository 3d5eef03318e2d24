use nalgebra::{DMatrix, DVector};

use crate::linalg::{Factor, FactorizationBackend, LinalgError};
use crate::reduction::QuadProgram;

use super::residuals::{IpmState, Residuals};

/// Shifts tried, in order, when the condensed matrix fails to factorize.
pub const REGULARIZATION_LADDER: [f64; 6] = [1e-8, 1e-6, 1e-4, 1e-2, 1e0, 1e2];

#[derive(Debug, Clone, PartialEq)]
pub struct StepDirections {
    pub pv: DVector<f64>,
    pub ps: DVector<f64>,
    pub plambda: DVector<f64>,
    pub pz: DVector<f64>,
}

/// `Σ_s = S⁻¹Z`, stored as its diagonal.
pub fn sigma(state: &IpmState) -> DVector<f64> {
    state.z.component_div(&state.s)
}

/// `H + Jᵀ diag(σ) J`.
pub fn assemble_condensed(
    qp: &QuadProgram,
    sigma: &DVector<f64>,
    backend: &dyn FactorizationBackend,
) -> DMatrix<f64> {
    let mut m = backend.gram_weighted(&qp.jacobian, sigma);
    m += &qp.hessian;
    m
}

/// Factorizes `m`, retrying with `m + δI` along [`REGULARIZATION_LADDER`].
/// Returns the factor and the shift that was needed, if any.
pub fn factorize_with_ladder(
    backend: &dyn FactorizationBackend,
    m: &DMatrix<f64>,
) -> Result<(Factor, Option<f64>), LinalgError> {
    match backend.factorize(m) {
        Ok(f) => return Ok((f, None)),
        Err(LinalgError::NotPositiveDefinite { .. }) => {}
        Err(e) => return Err(e),
    }
    let n = m.nrows();
    let mut last = LinalgError::NotPositiveDefinite { pivot: 0 };
    for delta in REGULARIZATION_LADDER {
        let shifted = m + DMatrix::identity(n, n) * delta;
        match backend.factorize(&shifted) {
            Ok(f) => return Ok((f, Some(delta))),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Solves the condensed system
///
/// ```text
/// (H + JᵀΣJ) p_v = -r1 + Jᵀr2 - JᵀΣ r3
/// ```
///
/// and recovers `p_s = -r3 - J p_v`, `p_λ = -r2 + Σ r3 + Σ J p_v` and
/// `p_z = μ S⁻¹1 - z - Σ p_s`.
pub fn step_directions(
    qp: &QuadProgram,
    state: &IpmState,
    res: &Residuals,
    factor: &Factor,
    backend: &dyn FactorizationBackend,
) -> Result<StepDirections, LinalgError> {
    let sig = sigma(state);
    let weighted = res.r2.clone() - sig.component_mul(&res.r3);
    let rhs = -&res.r1 + qp.jacobian.tr_mul(&weighted);
    let pv = backend.solve(factor, &rhs)?;
    let jpv = &qp.jacobian * &pv;
    let ps = -&res.r3 - &jpv;
    let plambda = -&res.r2 + sig.component_mul(&(&res.r3 + &jpv));
    let pz = DVector::from_iterator(
        state.s.len(),
        (0..state.s.len()).map(|i| state.mu / state.s[i] - state.z[i] - sig[i] * ps[i]),
    );
    Ok(StepDirections {
        pv,
        ps,
        plambda,
        pz,
    })
}

/// Normwise relative residual of the uncondensed Newton system
///
/// ```text
/// [H  0  Jᵀ] [p_v]     [r1]
/// [0  Σ  I ] [p_s] = - [r2]
/// [J  I  0 ] [p_λ]     [r3]
/// ```
///
/// measured as `‖K p + r‖∞ / (‖K‖∞ ‖p‖∞ + ‖r‖∞)`.
pub fn augmented_residual(
    qp: &QuadProgram,
    state: &IpmState,
    res: &Residuals,
    dirs: &StepDirections,
) -> f64 {
    let sig = sigma(state);
    let e1 = &qp.hessian * &dirs.pv + qp.jacobian.tr_mul(&dirs.plambda) + &res.r1;
    let e2 = sig.component_mul(&dirs.ps) + &dirs.plambda + &res.r2;
    let e3 = &qp.jacobian * &dirs.pv + &dirs.ps + &res.r3;
    let err = e1.amax().max(e2.amax()).max(e3.amax());

    let n = qp.num_vars();
    let m = qp.num_ineq();
    let j_abs = qp.jacobian.abs();
    let mut k_norm: f64 = 0.0;
    for i in 0..n {
        let row = qp.hessian.row(i).abs().sum() + j_abs.column(i).sum();
        k_norm = k_norm.max(row);
    }
    for i in 0..m {
        k_norm = k_norm.max(sig[i].abs() + 1.0);
        k_norm = k_norm.max(j_abs.row(i).sum() + 1.0);
    }
    let p_norm = dirs.pv.amax().max(dirs.ps.amax()).max(dirs.plambda.amax());
    let r_norm = res.r1.amax().max(res.r2.amax()).max(res.r3.amax());
    let denom = k_norm * p_norm + r_norm;
    if denom == 0.0 {
        0.0
    } else {
        err / denom
    }
}
