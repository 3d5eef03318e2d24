#![allow(dead_code)]

use condensed_mpc::harness::{random_problem, random_problem_with_shape, Ensemble};
use condensed_mpc::heat::{build_heat_problem, HeatParams, NUM_FACES};
use condensed_mpc::ipm::{solve, IpmOptions, IpmResult};
use condensed_mpc::linalg::{available_backends, BackendKind};
use condensed_mpc::reduction::{
    build_dense_qp, dense_objective, recover_trajectory, stage_objective,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

pub fn random_vector(rng: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
}

/// `GᵀG + 0.1 I` with sizes spread over `1..=150` so several blocks of the
/// factorization are exercised.
pub fn pd_corpus(seed: u64, count: usize) -> Vec<DMatrix<f64>> {
    let mut r = rng(seed);
    (0..count)
        .map(|i| {
            let n = match i % 5 {
                0 => r.random_range(1..=8),
                1 => r.random_range(9..=63),
                2 => 64,
                3 => r.random_range(65..=130),
                _ => r.random_range(131..=150),
            };
            let g = random_matrix(&mut r, n, n);
            g.transpose() * &g + DMatrix::identity(n, n) * 0.1
        })
        .collect()
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Debug, Default)]
pub struct ConformanceStats {
    pub matrices: usize,
    pub worst_reconstruction_ratio: f64,
    pub worst_backend_disagreement: f64,
}

/// Runs the factorize / solve / gram suite on every selectable backend.
/// Reconstruction ratio is `‖LLᵀ - M‖∞ / (1e-12 · n · max|M|)` and must stay
/// at or below one.
pub fn backend_conformance(seed: u64, count: usize) -> Result<ConformanceStats, String> {
    let corpus = pd_corpus(seed, count);
    let mut stats = ConformanceStats {
        matrices: corpus.len(),
        ..Default::default()
    };
    let mut r = rng(seed ^ 0x5eed);
    let backends = available_backends();
    for (idx, m) in corpus.iter().enumerate() {
        let n = m.nrows();
        let rhs = random_vector(&mut r, n);
        let mut factors = Vec::new();
        for kind in &backends {
            let b = kind.backend();
            let f = b
                .factorize(m)
                .map_err(|e| format!("{}: matrix {idx} (n={n}) failed: {e}", b.name()))?;
            let l = f.lower();
            for i in 0..n {
                for j in i + 1..n {
                    if l[(i, j)] != 0.0 {
                        return Err(format!("{}: factor not lower triangular", b.name()));
                    }
                }
            }
            let err = inf_norm(&(l * l.transpose() - m));
            let ratio = err / (1e-12 * n as f64 * m.amax());
            stats.worst_reconstruction_ratio = stats.worst_reconstruction_ratio.max(ratio);
            if ratio > 1.0 {
                return Err(format!(
                    "{}: matrix {idx} (n={n}) reconstruction error {err:.3e}",
                    b.name()
                ));
            }
            let x = b.solve(&f, &rhs).map_err(|e| e.to_string())?;
            let x2 = b.solve(&f, &rhs).map_err(|e| e.to_string())?;
            if x.as_slice().iter().zip(x2.as_slice()).any(|(a, c)| a.to_bits() != c.to_bits()) {
                return Err(format!("{}: repeated solve not bitwise identical", b.name()));
            }
            let res = (m * &x - &rhs).amax();
            let cond = inf_norm(m) * x.amax() / rhs.amax().max(f64::MIN_POSITIVE);
            if res > 1e-10 * (1.0 + rhs.amax()) * cond.max(1.0) {
                return Err(format!("{}: matrix {idx} solve residual {res:.3e}", b.name()));
            }
            factors.push((f, x));
        }
        let (f0, x0) = &factors[0];
        for (f, x) in &factors[1..] {
            let dl = (f.lower() - f0.lower()).amax() / f0.lower().amax();
            let dx = (x - x0).amax() / x0.amax().max(1e-300);
            stats.worst_backend_disagreement = stats.worst_backend_disagreement.max(dl.max(dx));
            if dl > 1e-9 || dx > 1e-9 {
                return Err(format!("backends disagree on matrix {idx}: {dl:.3e} / {dx:.3e}"));
            }
        }

        // gram on a random J with the same number of columns
        let rows = r.random_range(0..=2 * n + 3);
        let j = random_matrix(&mut r, rows, n);
        let sigma = DVector::from_fn(rows, |_, _| r.random_range(0.01..10.0));
        let naive = j.transpose() * DMatrix::from_diagonal(&sigma) * &j;
        let scale = naive.amax().max(1.0);
        let mut grams = Vec::new();
        for kind in &backends {
            let g = kind.backend().gram_weighted(&j, &sigma);
            if g != g.transpose() {
                return Err(format!("{}: gram not exactly symmetric", kind.name()));
            }
            let err = (&g - &naive).amax() / scale;
            if err > 1e-12 * rows.max(1) as f64 {
                return Err(format!("{}: gram error {err:.3e} on matrix {idx}", kind.name()));
            }
            grams.push(g);
        }
        for g in &grams[1..] {
            let d = (g - &grams[0]).amax() / scale;
            stats.worst_backend_disagreement = stats.worst_backend_disagreement.max(d);
            if d > 1e-9 {
                return Err(format!("backends disagree on gram {idx}: {d:.3e}"));
            }
        }
    }
    Ok(stats)
}

#[derive(Debug, Default)]
pub struct ReductionStats {
    pub problems: usize,
    pub worst_dynamics: f64,
    pub worst_objective: f64,
}

/// Recovers a trajectory from a random `v` and compares it with the
/// dynamics and the stage-wise objective.
pub fn reduction_correctness(seed: u64, count: usize) -> Result<ReductionStats, String> {
    let mut r = rng(seed);
    let mut stats = ReductionStats {
        problems: count,
        ..Default::default()
    };
    for i in 0..count {
        let p = random_problem(&mut r, &Ensemble::SMALL);
        let qp = build_dense_qp(&p).map_err(|e| format!("problem {i}: {e}"))?;
        let v = random_vector(&mut r, qp.program.num_vars());
        let traj = recover_trajectory(&qp, &v).map_err(|e| e.to_string())?;
        if traj.x[0] != p.x_bar {
            return Err(format!("problem {i}: x[0] differs from x_bar"));
        }
        let dyn_ratio = traj.dynamics_residual(&p) / (1e-10 * (1.0 + traj.max_abs_state()));
        let dense = dense_objective(&qp, &v).map_err(|e| e.to_string())?;
        let direct = stage_objective(&p, &traj.x, &traj.u);
        let obj_ratio = (dense - direct).abs() / (1e-8 * (1.0 + direct.abs()));
        stats.worst_dynamics = stats.worst_dynamics.max(dyn_ratio);
        stats.worst_objective = stats.worst_objective.max(obj_ratio);
        if dyn_ratio > 1.0 || obj_ratio > 1.0 {
            return Err(format!(
                "problem {i}: dynamics ratio {dyn_ratio:.3e}, objective ratio {obj_ratio:.3e}"
            ));
        }
    }
    Ok(stats)
}

/// Variable and row counts for random shapes with every bound finite.
pub fn dimension_claims(seed: u64, count: usize) -> Result<(), String> {
    let mut r = rng(seed);
    for i in 0..count {
        let nx = r.random_range(1..=6);
        let nu = r.random_range(1..=4);
        let nc = r.random_range(0..=3);
        let t = r.random_range(1..=12);
        let p = random_problem_with_shape(&mut r, nx, nu, nc, t);
        let qp = build_dense_qp(&p).map_err(|e| e.to_string())?;
        let (vars, rows) = (qp.program.num_vars(), qp.program.num_ineq());
        if vars != t * nu || rows != 2 * t * (nc + nx + nu) {
            return Err(format!(
                "shape {i} (nx={nx}, nu={nu}, nc={nc}, T={t}): {vars} variables, {rows} rows"
            ));
        }
        if qp.program.hessian.shape() != (vars, vars) || qp.program.jacobian.shape() != (rows, vars) {
            return Err(format!("shape {i}: matrix shapes inconsistent"));
        }
    }
    Ok(())
}

#[derive(Debug, Default)]
pub struct PhysicsStats {
    pub row_sum_error: f64,
    pub symmetry_gap: f64,
    pub bound_violation: f64,
    pub iterations: usize,
}

/// Solves a heat instance and checks conservation, face symmetry and bounds
/// in physical units.
pub fn heat_physics(n: usize, horizon: usize) -> Result<(PhysicsStats, IpmResult), String> {
    let params = HeatParams::new(n, horizon);
    let heat = build_heat_problem(&params).map_err(|e| e.to_string())?;
    let data = &heat.data;
    let mut stats = PhysicsStats::default();
    for i in 0..data.a.nrows() {
        let s = data.a.row(i).sum() + data.b.row(i).sum();
        stats.row_sum_error = stats.row_sum_error.max((s - 1.0).abs());
    }
    let qp = build_dense_qp(data).map_err(|e| e.to_string())?;
    let result = solve(&qp, &IpmOptions::default()).map_err(|e| e.to_string())?;
    stats.iterations = result.iterations;
    if !result.converged() {
        return Err(format!("heat N={n} T={horizon} ended with {}", result.status));
    }
    let traj = heat.to_physical(result.solution.as_ref().unwrap());
    for u in &traj.u {
        for a in 0..NUM_FACES {
            for b in a + 1..NUM_FACES {
                stats.symmetry_gap = stats.symmetry_gap.max((u[a] - u[b]).abs());
            }
        }
    }
    let over = |v: f64, (lo, hi): (f64, f64)| (lo - v).max(v - hi).max(0.0);
    for x in &traj.x {
        for &v in x.iter() {
            stats.bound_violation = stats.bound_violation.max(over(v, params.x_bounds));
        }
    }
    for u in &traj.u {
        for &v in u.iter() {
            stats.bound_violation = stats.bound_violation.max(over(v, params.u_bounds));
        }
    }
    if stats.row_sum_error > 1e-12 || stats.symmetry_gap > 1e-6 || stats.bound_violation > 1e-6 {
        return Err(format!("{stats:?}"));
    }
    Ok((stats, result))
}

pub fn reference_options() -> IpmOptions {
    IpmOptions {
        backend: BackendKind::Reference,
        ..Default::default()
    }
}
