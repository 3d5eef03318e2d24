use crate::linalg::BackendKind;

use super::IpmError;

#[derive(Debug, Clone, PartialEq)]
pub struct IpmOptions {
    /// Scaled KKT tolerance; also the bound on μ at convergence.
    pub tol: f64,
    pub mu_init: f64,
    /// Barrier reduction factor, in (0, 1).
    pub kappa_mu: f64,
    /// Fraction-to-boundary parameter, in (0, 1).
    pub tau: f64,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo_eta: f64,
    pub backend: BackendKind,
    /// Evaluate the residual of the uncondensed Newton system at every
    /// iteration and store it in the history. Costs one extra pass over `J`.
    pub check_augmented: bool,
}

impl Default for IpmOptions {
    fn default() -> Self {
        IpmOptions {
            tol: 1e-8,
            mu_init: 1e-1,
            kappa_mu: 0.2,
            tau: 0.995,
            max_iter: 200,
            armijo_eta: 1e-4,
            backend: BackendKind::Reference,
            check_augmented: false,
        }
    }
}

impl IpmOptions {
    // negated comparisons so NaN is rejected too
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), IpmError> {
        let bad = |msg: &str| Err(IpmError::InvalidOptions(msg.to_string()));
        if !(self.tol > 0.0) {
            return bad("tol must be positive");
        }
        if !(self.mu_init > 0.0) {
            return bad("mu_init must be positive");
        }
        if !(self.kappa_mu > 0.0 && self.kappa_mu < 1.0) {
            return bad("kappa_mu must lie in (0, 1)");
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return bad("tau must lie in (0, 1)");
        }
        if !(self.armijo_eta > 0.0 && self.armijo_eta < 1.0) {
            return bad("armijo_eta must lie in (0, 1)");
        }
        Ok(())
    }
}
