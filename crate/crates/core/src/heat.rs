//! Temperature control of a 3-D copper cube whose six faces are heaters.
//!
//! The heat equation `ρ c_p ∂x/∂t = k ∇²x` is discretized with the 7-point
//! finite-difference Laplacian on the `N³` interior grid and explicit Euler
//! in time. Face temperatures enter through the Dirichlet boundary and are
//! the six control inputs.
//!
//! Cells are indexed x-fastest, `i + N·j + N²·k`. Faces (input columns) are
//! ordered `x-, x+, y-, y+, z-, z+`.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::problem::LqProblemData;
use crate::reduction::Trajectory;

pub const NUM_FACES: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HeatError {
    #[error(
        "explicit Euler is unstable: alpha*dt/dw^2 = {factor:.4} must stay below 1/6; \
         reduce dt or enlarge dw"
    )]
    Unstable { factor: f64 },
    #[error("grid must have at least one interior point per dimension")]
    EmptyGrid,
    #[error("horizon must be positive")]
    EmptyHorizon,
    #[error("set-point profile has {found} entries, expected N^3 = {expected}")]
    ProfileLength { expected: usize, found: usize },
}

/// Target temperature, uniform or one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Setpoint {
    Uniform(f64),
    Profile(DVector<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatParams {
    /// Interior grid points per dimension.
    pub n: usize,
    pub horizon: usize,
    /// Time step [s].
    pub dt: f64,
    /// Grid spacing [m].
    pub dw: f64,
    /// Density [kg/m³].
    pub rho: f64,
    /// Specific heat [J/(kg·K)].
    pub cp: f64,
    /// Conductivity [W/(m·K)].
    pub k: f64,
    pub q_weight: f64,
    pub r_weight: f64,
    /// Temperature bounds [K].
    pub x_bounds: (f64, f64),
    pub u_bounds: (f64, f64),
    pub x_init: f64,
    pub setpoint: Setpoint,
}

impl HeatParams {
    /// Copper cube with a 0.1 s step and 2 cm spacing, tracking 350 K from a
    /// uniform 300 K start.
    pub fn new(n: usize, horizon: usize) -> Self {
        let dw = 0.02;
        HeatParams {
            n,
            horizon,
            dt: 0.1,
            dw,
            rho: 8960.0,
            cp: 386.0,
            k: 400.0,
            q_weight: 10.0 * dw * dw,
            r_weight: 0.1 * dw * dw,
            x_bounds: (200.0, 550.0),
            u_bounds: (300.0, 500.0),
            x_init: 300.0,
            setpoint: Setpoint::Uniform(350.0),
        }
    }

    pub fn with_setpoint(mut self, setpoint: Setpoint) -> Self {
        self.setpoint = setpoint;
        self
    }

    /// Cube edge length `(N+1)·dw`.
    pub fn edge_length(&self) -> f64 {
        (self.n + 1) as f64 * self.dw
    }

    pub fn diffusivity(&self) -> f64 {
        self.k / (self.rho * self.cp)
    }

    /// `α·dt/dw²`.
    pub fn stability_factor(&self) -> f64 {
        self.diffusivity() * self.dt / (self.dw * self.dw)
    }

    pub fn num_states(&self) -> usize {
        self.n * self.n * self.n
    }

    fn check(&self) -> Result<(), HeatError> {
        if self.n == 0 {
            return Err(HeatError::EmptyGrid);
        }
        let factor = self.stability_factor();
        if factor.is_nan() || factor >= 1.0 / 6.0 {
            return Err(HeatError::Unstable { factor });
        }
        Ok(())
    }
}

/// Linear index of cell `(i, j, k)`.
pub fn cell_index(n: usize, i: usize, j: usize, k: usize) -> usize {
    i + n * j + n * n * k
}

/// `A = I + c·Lap` and the face-input matrix `B` for the `N³` grid.
pub fn laplacian_system(
    n: usize,
    params: &HeatParams,
) -> Result<(DMatrix<f64>, DMatrix<f64>), HeatError> {
    let params = HeatParams { n, ..params.clone() };
    params.check()?;
    let c = params.stability_factor();
    let nx = params.num_states();
    let mut a = DMatrix::zeros(nx, nx);
    let mut b = DMatrix::zeros(nx, NUM_FACES);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let row = cell_index(n, i, j, k);
                a[(row, row)] = 1.0 - 6.0 * c;
                let coords = [i, j, k];
                for axis in 0..3 {
                    for (side, step) in [(0usize, -1isize), (1, 1)] {
                        let mut nb = coords;
                        let p = coords[axis] as isize + step;
                        if p < 0 || p >= n as isize {
                            b[(row, 2 * axis + side)] += c;
                        } else {
                            nb[axis] = p as usize;
                            a[(row, cell_index(n, nb[0], nb[1], nb[2]))] += c;
                        }
                    }
                }
            }
        }
    }
    Ok((a, b))
}

/// A heat MPC instance in deviation coordinates together with the shifts
/// needed to map results back to kelvin.
#[derive(Debug, Clone)]
pub struct HeatProblem {
    pub params: HeatParams,
    pub data: LqProblemData,
    /// Per-cell set point subtracted from the states.
    pub state_shift: DVector<f64>,
    /// Subtracted from every face input.
    pub input_shift: f64,
}

impl HeatProblem {
    /// Adds the set-point shifts back.
    pub fn to_physical(&self, traj: &Trajectory) -> Trajectory {
        Trajectory {
            x: traj.x.iter().map(|x| x + &self.state_shift).collect(),
            u: traj.u.iter().map(|u| u.add_scalar(self.input_shift)).collect(),
            v: traj.v.clone(),
            objective: traj.objective,
        }
    }
}

/// Builds the tracking problem in deviation variables `x - d`, `u - d_u`,
/// where `d_u` is the set point (its mean for a profile).
///
/// The shift leaves a constant disturbance `w = A d + d_u B 1 - d`, which is
/// zero for a uniform set point because every row of `[A | B]` sums to one.
pub fn build_heat_problem(params: &HeatParams) -> Result<HeatProblem, HeatError> {
    params.check()?;
    if params.horizon == 0 {
        return Err(HeatError::EmptyHorizon);
    }
    let nx = params.num_states();
    let (a, b) = laplacian_system(params.n, params)?;
    let (d, du) = match &params.setpoint {
        Setpoint::Uniform(v) => (DVector::from_element(nx, *v), *v),
        Setpoint::Profile(p) => {
            if p.len() != nx {
                return Err(HeatError::ProfileLength {
                    expected: nx,
                    found: p.len(),
                });
            }
            (p.clone(), p.mean())
        }
    };
    let w = match &params.setpoint {
        Setpoint::Uniform(_) => DVector::zeros(nx),
        Setpoint::Profile(_) => &a * &d + b.column_sum() * du - &d,
    };

    let x_bar = DVector::from_element(nx, params.x_init) - &d;
    let xl = DVector::from_element(nx, params.x_bounds.0) - &d;
    let xu = DVector::from_element(nx, params.x_bounds.1) - &d;
    let ul = DVector::from_element(NUM_FACES, params.u_bounds.0 - du);
    let uu = DVector::from_element(NUM_FACES, params.u_bounds.1 - du);
    let q = DMatrix::identity(nx, nx) * params.q_weight;
    let r = DMatrix::identity(NUM_FACES, NUM_FACES) * params.r_weight;

    let data = LqProblemData::new(a, b, q, r, x_bar, params.horizon)
        .with_state_bounds(xl, xu)
        .with_input_bounds(ul, uu)
        .with_disturbances(vec![w; params.horizon]);
    Ok(HeatProblem {
        params: params.clone(),
        data,
        state_shift: d,
        input_shift: du,
    })
}
