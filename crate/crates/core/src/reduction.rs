//! State elimination: rewrites the structured problem as a dense QP in the
//! auxiliary inputs `v`, with `u_t = K x_t + v_t` and
//!
//! ```text
//! x = 𝐀 x̄ + 𝐁 v + 𝐀̃ w
//! ```
//!
//! giving `min ½ vᵀHv + hᵀv + h0  s.t.  Jv ≤ d`.
//!
//! Inequality rows are stacked time-major. For each step `t = 0..T-1` the
//! block is: mixed upper, mixed lower, state upper, state lower, input
//! upper, input lower, where the mixed and input rows act on `(x_t, u_t)`
//! and the state rows on `x_{t+1}`. A lower bound `l ≤ a` is stored as
//! `-a ≤ -l`, and rows with an infinite bound are dropped.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::problem::{Dims, LqProblemData, ProblemError};

/// Stacked elimination matrices.
///
/// `𝐀̃` is never stored: its blocks are powers of `A_K`, which are already
/// held in `big_a`. Use [`BlockMatrices::big_a_tilde`] to materialize it or
/// [`BlockMatrices::apply_a_tilde`] to apply it.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockMatrices {
    /// `A + BK`.
    pub a_k: DMatrix<f64>,
    /// `[I; A_K; …; A_K^T]`, `(T+1)nx x nx`.
    pub big_a: DMatrix<f64>,
    /// Block lower triangular, block `(i, j) = A_K^{i-j-1} B` for `i > j`.
    pub big_b: DMatrix<f64>,
    nx: usize,
    nu: usize,
    horizon: usize,
}

impl BlockMatrices {
    /// `A_K^k`, read from `big_a`.
    pub fn power(&self, k: usize) -> DMatrix<f64> {
        self.big_a.rows(k * self.nx, self.nx).into_owned()
    }

    /// Block `(i, j)` of `𝐁`.
    pub fn b_block(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.big_b
            .view((i * self.nx, j * self.nu), (self.nx, self.nu))
            .into_owned()
    }

    /// Block `(i, j)` of `𝐀̃`: `A_K^{i-j-1}` for `i > j`, zero otherwise.
    pub fn a_tilde_block(&self, i: usize, j: usize) -> DMatrix<f64> {
        if i > j {
            self.power(i - j - 1)
        } else {
            DMatrix::zeros(self.nx, self.nx)
        }
    }

    /// Dense `(T+1)nx x T nx` copy of `𝐀̃`.
    pub fn big_a_tilde(&self) -> DMatrix<f64> {
        let nx = self.nx;
        let mut out = DMatrix::zeros((self.horizon + 1) * nx, self.horizon * nx);
        for i in 1..=self.horizon {
            for j in 0..i {
                out.view_mut((i * nx, j * nx), (nx, nx))
                    .copy_from(&self.big_a.rows((i - j - 1) * nx, nx));
            }
        }
        out
    }

    /// `𝐀̃ w` by the recursion `c_0 = 0`, `c_{t+1} = A_K c_t + w_t`.
    pub fn apply_a_tilde(&self, w: &[DVector<f64>]) -> Vec<DVector<f64>> {
        let mut out = Vec::with_capacity(self.horizon + 1);
        let mut c = DVector::zeros(self.nx);
        out.push(c.clone());
        for wt in w.iter().take(self.horizon) {
            c = &self.a_k * &c + wt;
            out.push(c.clone());
        }
        out
    }
}

/// Builds `𝐀`, `𝐁` and `A_K` with iterated products `A_K^{k+1} = A_K·A_K^k`.
pub fn build_block_matrices(data: &LqProblemData) -> Result<BlockMatrices, ProblemError> {
    let Dims { nx, nu, horizon, .. } = data.dims()?;
    let a_k = &data.a + &data.b * &data.k;

    let mut big_a = DMatrix::zeros((horizon + 1) * nx, nx);
    let mut power = DMatrix::identity(nx, nx);
    for t in 0..=horizon {
        big_a.rows_mut(t * nx, nx).copy_from(&power);
        if t < horizon {
            power = &a_k * &power;
        }
    }

    // Column block j of 𝐁 is column block 0 shifted down by j block rows.
    let mut big_b = DMatrix::zeros((horizon + 1) * nx, horizon * nu);
    let mut ak_b = data.b.clone();
    for k in 0..horizon {
        // A_K^k B fills block (j + k + 1, j)
        for j in 0..horizon - k {
            big_b
                .view_mut(((j + k + 1) * nx, j * nu), (nx, nu))
                .copy_from(&ak_b);
        }
        if k + 1 < horizon {
            ak_b = &a_k * &ak_b;
        }
    }

    Ok(BlockMatrices {
        a_k,
        big_a,
        big_b,
        nx,
        nu,
        horizon,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RowKind {
    Mixed,
    State,
    Input,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Upper,
    Lower,
}

/// Origin of one row of `J`: `time` is the loop step `t`, so state rows
/// constrain `x_{t+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RowSpec {
    pub kind: RowKind,
    pub side: Side,
    pub time: usize,
    pub component: usize,
}

/// `min ½ vᵀHv + hᵀv + h0  s.t.  Jv ≤ d` without any MPC provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadProgram {
    pub hessian: DMatrix<f64>,
    pub linear: DVector<f64>,
    pub constant: f64,
    pub jacobian: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl QuadProgram {
    pub fn new(
        hessian: DMatrix<f64>,
        linear: DVector<f64>,
        constant: f64,
        jacobian: DMatrix<f64>,
        rhs: DVector<f64>,
    ) -> Self {
        let n = linear.len();
        assert_eq!(hessian.shape(), (n, n), "Hessian must be n x n");
        assert_eq!(jacobian.ncols(), n, "Jacobian must have n columns");
        assert_eq!(jacobian.nrows(), rhs.len(), "rhs length must match Jacobian rows");
        QuadProgram {
            hessian,
            linear,
            constant,
            jacobian,
            rhs,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn num_ineq(&self) -> usize {
        self.rhs.len()
    }

    /// `½ vᵀHv + hᵀv + h0`.
    pub fn objective(&self, v: &DVector<f64>) -> f64 {
        0.5 * v.dot(&(&self.hessian * v)) + self.linear.dot(v) + self.constant
    }
}

/// Dense QP plus everything needed to map `v` back to trajectories.
#[derive(Debug, Clone)]
pub struct DenseQp {
    pub program: QuadProgram,
    pub blocks: BlockMatrices,
    pub rows: Vec<RowSpec>,
    pub dims: Dims,
    source: Arc<LqProblemData>,
    q_hat: DMatrix<f64>,
    s_hat: DMatrix<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `x_0..x_T`.
    pub x: Vec<DVector<f64>>,
    pub u: Vec<DVector<f64>>,
    pub v: Vec<DVector<f64>>,
    pub objective: f64,
}

impl Trajectory {
    /// `max_t ‖x_{t+1} - A x_t - B u_t - w_t‖∞`.
    pub fn dynamics_residual(&self, data: &LqProblemData) -> f64 {
        (0..self.u.len())
            .map(|t| (&self.x[t + 1] - &data.a * &self.x[t] - &data.b * &self.u[t] - &data.w[t]).amax())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_state(&self) -> f64 {
        self.x.iter().map(|x| x.amax()).fold(0.0, f64::max)
    }

    /// Largest violation of the mixed, state (`t ≥ 1`) and input bounds.
    pub fn max_bound_violation(&self, data: &LqProblemData) -> f64 {
        let over = |val: f64, lo: f64, hi: f64| (lo - val).max(val - hi).max(0.0);
        let mut worst: f64 = 0.0;
        for t in 0..self.u.len() {
            let g = &data.e * &self.x[t] + &data.f * &self.u[t];
            for i in 0..g.len() {
                worst = worst.max(over(g[i], data.gl[i], data.gu[i]));
            }
            for i in 0..self.u[t].len() {
                worst = worst.max(over(self.u[t][i], data.ul[i], data.uu[i]));
            }
            for i in 0..self.x[t + 1].len() {
                worst = worst.max(over(self.x[t + 1][i], data.xl[i], data.xu[i]));
            }
        }
        worst
    }

    pub fn stacked_u(&self) -> DVector<f64> {
        stack(&self.u)
    }
}

fn stack(parts: &[DVector<f64>]) -> DVector<f64> {
    let mut out = Vec::with_capacity(parts.iter().map(|p| p.len()).sum());
    for p in parts {
        out.extend_from_slice(p.as_slice());
    }
    DVector::from_vec(out)
}

/// `Σ_t [x_t; u_t]ᵀ [Q S; Sᵀ R] [x_t; u_t] + x_Tᵀ Qf x_T`.
pub fn stage_objective(data: &LqProblemData, x: &[DVector<f64>], u: &[DVector<f64>]) -> f64 {
    let mut total = 0.0;
    for (xt, ut) in x.iter().zip(u) {
        total += xt.dot(&(&data.q * xt)) + 2.0 * xt.dot(&(&data.s * ut)) + ut.dot(&(&data.r * ut));
    }
    let xt = &x[u.len()];
    total + xt.dot(&(&data.qf * xt))
}

/// Builds `H, h, h0, J, d`.
///
/// The Hessian is accumulated one stage at a time from the nonzero leading
/// columns of each block row of `𝐁`, so the stacked cost matrix is never
/// formed.
pub fn build_dense_qp(data: &LqProblemData) -> Result<DenseQp, ProblemError> {
    let dims = data.dims()?;
    let Dims {
        nx,
        nu,
        nc,
        horizon,
    } = dims;
    let blocks = build_block_matrices(data)?;
    let n = horizon * nu;

    let q_hat = &data.q
        + &data.s * &data.k
        + data.k.transpose() * data.s.transpose()
        + data.k.transpose() * &data.r * &data.k;
    let s_hat = &data.s + data.k.transpose() * &data.r;
    let e_hat = &data.e + &data.f * &data.k;

    let g = |t: usize, cols: usize| blocks.big_b.view((t * nx, 0), (nx, cols));

    let mut hessian = DMatrix::zeros(n, n);
    for t in 0..horizon {
        let c = t * nu;
        if c > 0 {
            let gt = g(t, c);
            let qg = &q_hat * gt;
            let gt_t = gt.transpose();
            let mut top = hessian.view_mut((0, 0), (c, c));
            top.gemm(2.0, &gt_t, &qg, 1.0);
            let cross = &gt_t * &s_hat * 2.0;
            let mut col = hessian.view_mut((0, c), (c, nu));
            col += &cross;
            let mut row = hessian.view_mut((c, 0), (nu, c));
            row += cross.transpose();
        }
        let mut diag = hessian.view_mut((c, c), (nu, nu));
        diag += &data.r * 2.0;
    }
    if n > 0 {
        let gt = g(horizon, n);
        let qg = &data.qf * gt;
        hessian.gemm(2.0, &gt.transpose(), &qg, 1.0);
    }
    let hessian = (&hessian + hessian.transpose()) * 0.5;

    // Row structure and J. Each candidate row is an affine map of v.
    let mut rows = Vec::new();
    let mut jac_rows: Vec<DVector<f64>> = Vec::new();
    let mut push = |spec: RowSpec, coeffs: DVector<f64>, bound: f64| {
        if bound.is_finite() {
            rows.push(spec);
            jac_rows.push(match spec.side {
                Side::Upper => coeffs,
                Side::Lower => -coeffs,
            });
        }
    };
    for t in 0..horizon {
        let c = t * nu;
        // E_hat x_t + F v_t
        if nc > 0 {
            let mut block = DMatrix::zeros(nc, n);
            if c > 0 {
                block.view_mut((0, 0), (nc, c)).copy_from(&(&e_hat * g(t, c)));
            }
            block.view_mut((0, c), (nc, nu)).copy_from(&data.f);
            for side in [Side::Upper, Side::Lower] {
                for i in 0..nc {
                    let bound = match side {
                        Side::Upper => data.gu[i],
                        Side::Lower => data.gl[i],
                    };
                    let spec = RowSpec { kind: RowKind::Mixed, side, time: t, component: i };
                    push(spec, block.row(i).transpose(), bound);
                }
            }
        }
        // x_{t+1}
        {
            let mut block = DMatrix::zeros(nx, n);
            block.view_mut((0, 0), (nx, c + nu)).copy_from(&g(t + 1, c + nu));
            for side in [Side::Upper, Side::Lower] {
                for i in 0..nx {
                    let bound = match side {
                        Side::Upper => data.xu[i],
                        Side::Lower => data.xl[i],
                    };
                    let spec = RowSpec { kind: RowKind::State, side, time: t, component: i };
                    push(spec, block.row(i).transpose(), bound);
                }
            }
        }
        // K x_t + v_t
        {
            let mut block = DMatrix::zeros(nu, n);
            if c > 0 {
                block.view_mut((0, 0), (nu, c)).copy_from(&(&data.k * g(t, c)));
            }
            for i in 0..nu {
                block[(i, c + i)] += 1.0;
            }
            for side in [Side::Upper, Side::Lower] {
                for i in 0..nu {
                    let bound = match side {
                        Side::Upper => data.uu[i],
                        Side::Lower => data.ul[i],
                    };
                    let spec = RowSpec { kind: RowKind::Input, side, time: t, component: i };
                    push(spec, block.row(i).transpose(), bound);
                }
            }
        }
    }
    let m = rows.len();
    let mut jacobian = DMatrix::zeros(m, n);
    for (r, coeffs) in jac_rows.iter().enumerate() {
        for (col, &x) in coeffs.iter().enumerate() {
            if x != 0.0 {
                jacobian[(r, col)] = x;
            }
        }
    }

    let mut qp = DenseQp {
        program: QuadProgram {
            hessian,
            linear: DVector::zeros(n),
            constant: 0.0,
            jacobian,
            rhs: DVector::zeros(m),
        },
        blocks,
        rows,
        dims,
        source: Arc::new(data.clone()),
        q_hat,
        s_hat,
    };
    qp.refresh_affine_terms(&data.x_bar);
    Ok(qp)
}

impl DenseQp {
    pub fn source(&self) -> &LqProblemData {
        &self.source
    }

    /// Number of inequality rows when every bound is finite.
    pub fn full_row_count(&self) -> usize {
        2 * self.dims.horizon * (self.dims.nc + self.dims.nx + self.dims.nu)
    }

    /// Re-targets the QP at a new initial state, reusing `H`, `J` and the
    /// block matrices; only `h`, `h0` and `d` change.
    pub fn set_initial_state(&mut self, x_bar: &DVector<f64>) -> Result<(), ProblemError> {
        if x_bar.len() != self.dims.nx {
            return Err(ProblemError::DimensionMismatch {
                first: "x_bar",
                second: "A",
                detail: format!("expected length {}, found {}", self.dims.nx, x_bar.len()),
            });
        }
        Arc::make_mut(&mut self.source).x_bar = x_bar.clone();
        self.refresh_affine_terms(x_bar);
        Ok(())
    }

    /// Free response `e_t = A_K^t x̄ + (𝐀̃ w)_t` for `t = 0..T`.
    fn free_response(&self, x_bar: &DVector<f64>) -> Vec<DVector<f64>> {
        let nx = self.dims.nx;
        let drift = self.blocks.apply_a_tilde(&self.source.w);
        (0..=self.dims.horizon)
            .map(|t| self.blocks.big_a.rows(t * nx, nx) * x_bar + &drift[t])
            .collect()
    }

    fn refresh_affine_terms(&mut self, x_bar: &DVector<f64>) {
        let Dims { nx, nu, horizon, .. } = self.dims;
        let data = Arc::clone(&self.source);
        let e = self.free_response(x_bar);
        let n = horizon * nu;

        let mut h = DVector::zeros(n);
        let mut h0 = 0.0;
        for (t, et) in e.iter().take(horizon).enumerate() {
            let c = t * nu;
            let qe = &self.q_hat * et;
            if c > 0 {
                let gt = self.blocks.big_b.view((t * nx, 0), (nx, c));
                let mut head = h.rows_mut(0, c);
                head += gt.transpose() * &qe * 2.0;
            }
            let mut blk = h.rows_mut(c, nu);
            blk += self.s_hat.transpose() * et * 2.0;
            h0 += et.dot(&qe);
        }
        let qfe = &data.qf * &e[horizon];
        if n > 0 {
            let gt = self.blocks.big_b.view((horizon * nx, 0), (nx, n));
            h += gt.transpose() * &qfe * 2.0;
        }
        h0 += e[horizon].dot(&qfe);

        let e_hat = &data.e + &data.f * &data.k;
        let mut d = DVector::zeros(self.rows.len());
        for (r, spec) in self.rows.iter().enumerate() {
            let i = spec.component;
            let t = spec.time;
            let (offset, lo, hi) = match spec.kind {
                RowKind::Mixed => ((e_hat.row(i) * &e[t])[0], data.gl[i], data.gu[i]),
                RowKind::State => (e[t + 1][i], data.xl[i], data.xu[i]),
                RowKind::Input => ((data.k.row(i) * &e[t])[0], data.ul[i], data.uu[i]),
            };
            d[r] = match spec.side {
                Side::Upper => hi - offset,
                Side::Lower => offset - lo,
            };
        }
        self.program.linear = h;
        self.program.constant = h0;
        self.program.rhs = d;
    }
}

/// `½ vᵀHv + hᵀv + h0`.
pub fn dense_objective(qp: &DenseQp, v: &DVector<f64>) -> Result<f64, ProblemError> {
    check_len(qp, v)?;
    Ok(qp.program.objective(v))
}

fn check_len(qp: &DenseQp, v: &DVector<f64>) -> Result<(), ProblemError> {
    let n = qp.program.num_vars();
    if v.len() != n {
        return Err(ProblemError::DimensionMismatch {
            first: "v",
            second: "H",
            detail: format!("expected length {n}, found {}", v.len()),
        });
    }
    Ok(())
}

/// States from the stacked elimination identity, inputs from
/// `u_t = K x_t + v_t`, objective from the structured cost.
pub fn recover_trajectory(qp: &DenseQp, v: &DVector<f64>) -> Result<Trajectory, ProblemError> {
    check_len(qp, v)?;
    let Dims { nx, nu, horizon, .. } = qp.dims;
    let data = qp.source();
    let drift = qp.blocks.apply_a_tilde(&data.w);
    let stacked = &qp.blocks.big_a * &data.x_bar + &qp.blocks.big_b * v;
    let mut x: Vec<DVector<f64>> = (0..=horizon)
        .map(|t| stacked.rows(t * nx, nx) + &drift[t])
        .collect();
    x[0] = data.x_bar.clone();
    let vs: Vec<DVector<f64>> = (0..horizon).map(|t| v.rows(t * nu, nu).into_owned()).collect();
    let u: Vec<DVector<f64>> = (0..horizon).map(|t| &data.k * &x[t] + &vs[t]).collect();
    let objective = stage_objective(data, &x, &u);
    Ok(Trajectory {
        x,
        u,
        v: vs,
        objective,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar(a: f64, horizon: usize) -> LqProblemData {
        LqProblemData::new(
            DMatrix::from_element(1, 1, a),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            DVector::from_element(1, 1.0),
            horizon,
        )
    }

    #[test]
    fn zero_dynamics_blocks() {
        let b = build_block_matrices(&scalar(0.0, 2)).unwrap();
        assert_eq!(b.big_a, DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]));
        let expect = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        assert_eq!(b.big_b, expect);
        assert_eq!(b.big_a_tilde(), expect);
    }

    #[test]
    fn integrator_blocks() {
        let b = build_block_matrices(&scalar(1.0, 2)).unwrap();
        assert_eq!(b.big_a, DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 1.0]));
        assert_eq!(
            b.big_b,
            DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 1.0, 1.0])
        );
    }

    #[test]
    fn block_recursion_holds() {
        let a = DMatrix::from_row_slice(2, 2, &[0.9, 0.2, -0.1, 0.8]);
        let bm = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let k = DMatrix::from_row_slice(1, 2, &[-0.1, -0.3]);
        let p = LqProblemData::new(a, bm, DMatrix::identity(2, 2), DMatrix::identity(1, 1), DVector::zeros(2), 5)
            .with_feedback(k);
        let b = build_block_matrices(&p).unwrap();
        assert_eq!(b.big_b.rows(0, 2).amax(), 0.0);
        assert_eq!(b.power(0), DMatrix::identity(2, 2));
        for i in 1..5 {
            for j in 0..i {
                let next = &b.a_k * b.b_block(i, j);
                assert!((next - b.b_block(i + 1, j)).amax() < 1e-14);
            }
        }
    }

    #[test]
    fn scalar_dense_qp_by_hand() {
        let qp = build_dense_qp(&scalar(1.0, 1)).unwrap();
        assert_abs_diff_eq!(qp.program.hessian[(0, 0)], 4.0);
        assert_abs_diff_eq!(qp.program.linear[0], 2.0);
        assert_abs_diff_eq!(qp.program.constant, 2.0);
        assert_eq!(qp.program.num_ineq(), 0);

        let v = DVector::from_element(1, -0.5);
        assert_abs_diff_eq!(dense_objective(&qp, &DVector::zeros(1)).unwrap(), 2.0);
        assert_abs_diff_eq!(dense_objective(&qp, &v).unwrap(), 1.5);

        let traj = recover_trajectory(&qp, &v).unwrap();
        assert_abs_diff_eq!(traj.x[0][0], 1.0);
        assert_abs_diff_eq!(traj.x[1][0], 0.5);
        assert_abs_diff_eq!(traj.u[0][0], -0.5);
        assert_abs_diff_eq!(traj.objective, 1.5);
    }

    #[test]
    fn input_bounds_only() {
        let p = scalar(1.0, 1).with_input_bounds(
            DVector::from_element(1, -0.1),
            DVector::from_element(1, 0.1),
        );
        let qp = build_dense_qp(&p).unwrap();
        assert_eq!(qp.program.jacobian, DMatrix::from_column_slice(2, 1, &[1.0, -1.0]));
        assert_eq!(qp.program.rhs, DVector::from_vec(vec![0.1, 0.1]));
    }

    #[test]
    fn free_response() {
        let p = LqProblemData::new(
            DMatrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.5]),
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
            DMatrix::identity(2, 2),
            DMatrix::identity(1, 1),
            DVector::from_vec(vec![1.0, 2.0]),
            4,
        );
        let qp = build_dense_qp(&p).unwrap();
        let traj = recover_trajectory(&qp, &DVector::zeros(4)).unwrap();
        let mut x = p.x_bar.clone();
        for t in 0..=4 {
            assert!((&traj.x[t] - &x).amax() < 1e-14);
            x = &p.a * x;
        }
        assert!(traj.u.iter().all(|u| u.amax() == 0.0));
    }

    #[test]
    fn wrong_length_is_rejected() {
        let qp = build_dense_qp(&scalar(1.0, 2)).unwrap();
        assert!(recover_trajectory(&qp, &DVector::zeros(3)).is_err());
        assert!(dense_objective(&qp, &DVector::zeros(1)).is_err());
    }

    #[test]
    fn new_initial_state_matches_rebuild() {
        let p = LqProblemData::new(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]),
            DMatrix::from_row_slice(2, 1, &[0.005, 0.1]),
            DMatrix::identity(2, 2),
            DMatrix::identity(1, 1) * 0.1,
            DVector::from_vec(vec![1.0, 0.0]),
            6,
        )
        .with_state_bounds(DVector::from_vec(vec![-5.0, -1.0]), DVector::from_vec(vec![5.0, 1.0]))
        .with_input_bounds(DVector::from_element(1, -1.0), DVector::from_element(1, 1.0))
        .with_disturbances(vec![DVector::from_vec(vec![0.01, -0.02]); 6]);
        let mut qp = build_dense_qp(&p).unwrap();
        let x_new = DVector::from_vec(vec![-0.5, 0.3]);
        qp.set_initial_state(&x_new).unwrap();
        let mut p2 = p.clone();
        p2.x_bar = x_new;
        let fresh = build_dense_qp(&p2).unwrap();
        assert!((&qp.program.linear - &fresh.program.linear).amax() < 1e-14);
        assert!((&qp.program.rhs - &fresh.program.rhs).amax() < 1e-14);
        assert_abs_diff_eq!(qp.program.constant, fresh.program.constant, epsilon = 1e-14);
    }
}
