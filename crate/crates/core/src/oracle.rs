//! Exact reference solver for tiny dense QPs by active-set enumeration.
//!
//! Every subset of inequality rows is treated as a set of equalities, the
//! resulting KKT system is solved directly, and the best primal- and
//! dual-feasible candidate wins. Subsets whose rows are linearly dependent
//! are pruned together with all their supersets, which also rules out
//! selecting both sides of a two-sided bound.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::reduction::QuadProgram;

/// Largest number of inequality rows accepted.
pub const MAX_ROWS: usize = 22;
/// Pivot threshold for the rank test and the KKT solve.
pub const RANK_TOL: f64 = 1e-10;
/// Primal and dual feasibility slack for accepting a candidate.
pub const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{m} inequality rows exceed the enumeration cap of {MAX_ROWS}")]
    CapExceeded { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleStatus {
    Optimal,
    Infeasible,
    /// Some candidate was primal feasible but none passed the dual test,
    /// which only happens when the objective is unbounded below (or the
    /// curvature assumption fails).
    UnboundedGuard,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub v: DVector<f64>,
    pub objective: f64,
    /// Tight rows, ascending.
    pub active_set: Vec<usize>,
    /// One multiplier per entry of `active_set`.
    pub multipliers: Vec<f64>,
    pub status: OracleStatus,
}

impl OracleResult {
    /// Multipliers scattered to all `m` rows.
    pub fn full_multipliers(&self, m: usize) -> DVector<f64> {
        let mut full = DVector::zeros(m);
        for (&i, &l) in self.active_set.iter().zip(&self.multipliers) {
            full[i] = l;
        }
        full
    }
}

struct Candidate {
    v: DVector<f64>,
    objective: f64,
    active: Vec<usize>,
    multipliers: Vec<f64>,
}

struct Search<'a> {
    qp: &'a QuadProgram,
    best: Option<Candidate>,
    any_primal_feasible: bool,
}

/// Row-echelon basis used for the incremental rank test.
#[derive(Clone)]
struct Echelon {
    rows: Vec<(usize, DVector<f64>)>,
}

impl Echelon {
    /// Reduces `row` against the basis; returns the extended basis when the
    /// row is independent.
    fn extend(&self, row: DVector<f64>) -> Option<Echelon> {
        let scale = row.amax().max(1.0);
        let mut r = row;
        for (pivot, basis) in &self.rows {
            let f = r[*pivot] / basis[*pivot];
            if f != 0.0 {
                r.axpy(-f, basis, 1.0);
            }
        }
        if r.is_empty() {
            return None;
        }
        let pivot = r.iamax();
        if r[pivot].abs() <= RANK_TOL * scale {
            return None;
        }
        let mut rows = self.rows.clone();
        rows.push((pivot, r));
        Some(Echelon { rows })
    }
}

impl Search<'_> {
    fn visit(&mut self, start: usize, active: &mut Vec<usize>, echelon: &Echelon) {
        self.evaluate(active);
        let n = self.qp.num_vars();
        if active.len() == n {
            return;
        }
        for i in start..self.qp.num_ineq() {
            let row = self.qp.jacobian.row(i).transpose();
            if let Some(next) = echelon.extend(row) {
                active.push(i);
                self.visit(i + 1, active, &next);
                active.pop();
            }
        }
    }

    fn evaluate(&mut self, active: &[usize]) {
        let Some((v, lambda)) = solve_kkt(self.qp, active) else {
            return;
        };
        let jv = &self.qp.jacobian * &v;
        let primal = (0..self.qp.num_ineq()).all(|i| jv[i] <= self.qp.rhs[i] + FEAS_TOL);
        if !primal {
            return;
        }
        self.any_primal_feasible = true;
        if lambda.iter().any(|&l| l < -FEAS_TOL) {
            return;
        }
        let objective = self.qp.objective(&v);
        let better = match &self.best {
            None => true,
            Some(b) => {
                let tie = 1e-12 * (1.0 + b.objective.abs());
                objective < b.objective - tie
                    || (objective <= b.objective + tie && active < b.active.as_slice())
            }
        };
        if better {
            self.best = Some(Candidate {
                v,
                objective,
                active: active.to_vec(),
                multipliers: lambda.iter().copied().collect(),
            });
        }
    }
}

/// Solves `[H J_Wᵀ; J_W 0] [v; λ] = [-h; d_W]` by fully pivoted
/// elimination; `None` when the system is numerically singular.
fn solve_kkt(qp: &QuadProgram, active: &[usize]) -> Option<(DVector<f64>, DVector<f64>)> {
    let n = qp.num_vars();
    let k = active.len();
    let mut kkt = DMatrix::zeros(n + k, n + k);
    kkt.view_mut((0, 0), (n, n)).copy_from(&qp.hessian);
    let mut rhs = DVector::zeros(n + k);
    rhs.rows_mut(0, n).copy_from(&(-&qp.linear));
    for (a, &i) in active.iter().enumerate() {
        for c in 0..n {
            kkt[(n + a, c)] = qp.jacobian[(i, c)];
            kkt[(c, n + a)] = qp.jacobian[(i, c)];
        }
        rhs[n + a] = qp.rhs[i];
    }
    let scale = kkt.amax().max(1.0);
    let lu = kkt.full_piv_lu();
    let u = lu.u();
    if (0..n + k).any(|i| u[(i, i)].abs() <= RANK_TOL * scale) {
        return None;
    }
    let sol = lu.solve(&rhs)?;
    Some((sol.rows(0, n).into_owned(), sol.rows(n, k).into_owned()))
}

/// Minimizes `½vᵀHv + hᵀv + h0` subject to `Jv ≤ d` exactly.
///
/// Ties in the objective (within `1e-12` relative) go to the
/// lexicographically smallest active set.
pub fn solve_enumeration(qp: &QuadProgram) -> Result<OracleResult, OracleError> {
    let m = qp.num_ineq();
    if m > MAX_ROWS {
        return Err(OracleError::CapExceeded { m });
    }
    let mut search = Search {
        qp,
        best: None,
        any_primal_feasible: false,
    };
    search.visit(0, &mut Vec::new(), &Echelon { rows: Vec::new() });

    let n = qp.num_vars();
    Ok(match search.best {
        Some(c) => OracleResult {
            v: c.v,
            objective: c.objective,
            active_set: c.active,
            multipliers: c.multipliers,
            status: OracleStatus::Optimal,
        },
        None => OracleResult {
            v: DVector::zeros(n),
            objective: f64::NAN,
            active_set: Vec::new(),
            multipliers: Vec::new(),
            status: if search.any_primal_feasible {
                OracleStatus::UnboundedGuard
            } else {
                OracleStatus::Infeasible
            },
        },
    })
}
