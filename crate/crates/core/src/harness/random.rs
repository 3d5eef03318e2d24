use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::problem::LqProblemData;

/// Shape limits for randomly generated problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Ensemble {
    pub max_nx: usize,
    pub max_nu: usize,
    pub max_nc: usize,
    pub max_horizon: usize,
    /// Cap on the dense inequality count `2T(n_c+n_x+n_u)`; shapes above it
    /// are resampled.
    pub max_rows: Option<usize>,
}

impl Ensemble {
    /// Instances small enough for the enumeration oracle.
    pub const TINY: Ensemble = Ensemble {
        max_nx: 3,
        max_nu: 2,
        max_nc: 1,
        max_horizon: 4,
        max_rows: Some(crate::oracle::MAX_ROWS),
    };

    pub const SMALL: Ensemble = Ensemble {
        max_nx: 4,
        max_nu: 3,
        max_nc: 2,
        max_horizon: 6,
        max_rows: None,
    };

    pub fn sample_shape(&self, rng: &mut impl Rng) -> (usize, usize, usize, usize) {
        loop {
            let nx = rng.random_range(1..=self.max_nx);
            let nu = rng.random_range(1..=self.max_nu);
            let nc = rng.random_range(0..=self.max_nc);
            let t = rng.random_range(1..=self.max_horizon);
            if self.max_rows.is_none_or(|cap| 2 * t * (nc + nx + nu) <= cap) {
                return (nx, nu, nc, t);
            }
        }
    }
}

fn uniform(rng: &mut impl Rng, rows: usize, cols: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(lo..hi))
}

pub fn spectral_radius(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Random problem with all bounds finite and a strictly feasible interior.
pub fn random_problem(rng: &mut impl Rng, ensemble: &Ensemble) -> LqProblemData {
    let (nx, nu, nc, t) = ensemble.sample_shape(rng);
    random_problem_with_shape(rng, nx, nu, nc, t)
}

/// `A` is rescaled to a spectral radius drawn from `[0.5, 1.05]`. The
/// stage weight `[Q S; Sᵀ R]` is `MᵀM + 0.1 I` for a random `M`, so `Q` and
/// `R` have the same form and the stage Hessian stays positive definite.
/// Bounds enclose a trajectory simulated under random inputs with margins
/// in `[0.05, 0.5]`.
pub fn random_problem_with_shape(
    rng: &mut impl Rng,
    nx: usize,
    nu: usize,
    nc: usize,
    horizon: usize,
) -> LqProblemData {
    let mut a = uniform(rng, nx, nx, -1.0, 1.0);
    let radius = spectral_radius(&a);
    if radius > 1e-12 {
        a *= rng.random_range(0.5..1.05) / radius;
    }
    let b = uniform(rng, nx, nu, -1.0, 1.0);

    let m = uniform(rng, nx + nu, nx + nu, -1.0, 1.0);
    let w_stage = m.transpose() * &m + DMatrix::identity(nx + nu, nx + nu) * 0.1;
    let q = w_stage.view((0, 0), (nx, nx)).into_owned();
    let s = w_stage.view((0, nx), (nx, nu)).into_owned();
    let r = w_stage.view((nx, nx), (nu, nu)).into_owned();
    let mf = uniform(rng, nx, nx, -1.0, 1.0);
    let qf = mf.transpose() * &mf + DMatrix::identity(nx, nx) * 0.1;

    let e = uniform(rng, nc, nx, -1.0, 1.0);
    let f = uniform(rng, nc, nu, -1.0, 1.0);
    let x_bar = DVector::from_fn(nx, |_, _| rng.random_range(-1.0..1.0));
    let w: Vec<DVector<f64>> = (0..horizon)
        .map(|_| DVector::from_fn(nx, |_, _| rng.random_range(-0.1..0.1)))
        .collect();

    let mut xs = vec![x_bar.clone()];
    let mut us = Vec::with_capacity(horizon);
    for wt in &w {
        let u = DVector::from_fn(nu, |_, _| rng.random_range(-1.0..1.0));
        let next = &a * xs.last().unwrap() + &b * &u + wt;
        xs.push(next);
        us.push(u);
    }
    let gs: Vec<DVector<f64>> = xs.iter().zip(&us).map(|(x, u)| &e * x + &f * u).collect();

    let mut envelope = |vals: &[DVector<f64>], n: usize| {
        let mut lo = DVector::zeros(n);
        let mut hi = DVector::zeros(n);
        for i in 0..n {
            let (mn, mx) = vals
                .iter()
                .map(|v| v[i])
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            lo[i] = mn - rng.random_range(0.05..0.5);
            hi[i] = mx + rng.random_range(0.05..0.5);
        }
        (lo, hi)
    };
    let (xl, xu) = envelope(&xs, nx);
    let (ul, uu) = envelope(&us, nu);
    let (gl, gu) = envelope(&gs, nc);

    LqProblemData::new(a, b, q, r, x_bar, horizon)
        .with_terminal_cost(qf)
        .with_cross_cost(s)
        .with_mixed_constraints(e, f, gl, gu)
        .with_state_bounds(xl, xu)
        .with_input_bounds(ul, uu)
        .with_disturbances(w)
}

/// Random gain with `ρ(A + BK) < 1`, or `None` after 200 draws.
pub fn random_stabilizing_gain(rng: &mut impl Rng, data: &LqProblemData) -> Option<DMatrix<f64>> {
    let (nx, nu) = (data.a.nrows(), data.b.ncols());
    for _ in 0..200 {
        let k = uniform(rng, nu, nx, -0.5, 0.5);
        if spectral_radius(&(&data.a + &data.b * &k)) < 1.0 {
            return Some(k);
        }
    }
    None
}
