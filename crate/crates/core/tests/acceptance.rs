//! Acceptance suite. Runs every criterion in order on one thread so the
//! timings are clean, prints one PASS/FAIL line per criterion and exits
//! nonzero if any failed.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use condensed_mpc::harness::{
    horizon_slopes, run_bench, run_verify, state_slopes, summarize, BenchGrid, VerifyOptions,
    CONTROL_GAP_TOL, OBJECTIVE_GAP_TOL,
};
use condensed_mpc::heat::{build_heat_problem, HeatParams};
use condensed_mpc::ipm::{solve, IpmOptions};
use condensed_mpc::linalg::BackendKind;
use condensed_mpc::reduction::build_dense_qp;

type Outcome = Result<String, String>;

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let report = run_verify(&VerifyOptions::new(42, 100));
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "{} instances, max objective gap {:.2e} (tol {OBJECTIVE_GAP_TOL:e}), max control gap {:.2e} (tol {CONTROL_GAP_TOL:e}), {secs:.2} s",
        report.outcomes.len(),
        report.max_objective_gap(),
        report.max_control_gap()
    );
    if report.passed() && secs < 60.0 {
        Ok(detail)
    } else {
        Err(format!("{detail}\n{report}"))
    }
}

fn step_equivalence() -> Outcome {
    let heat = build_heat_problem(&HeatParams::new(2, 10)).map_err(|e| e.to_string())?;
    let qp = build_dense_qp(&heat.data).map_err(|e| e.to_string())?;
    let opts = IpmOptions {
        check_augmented: true,
        ..Default::default()
    };
    let res = solve(&qp, &opts).map_err(|e| e.to_string())?;
    let worst = res
        .history
        .iter()
        .map(|h| h.augmented_residual.unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    let detail = format!(
        "heat N=2 T=10, {} iterations, worst relative residual {worst:.2e} (tol 1e-8)",
        res.iterations
    );
    if res.converged() && !res.history.is_empty() && worst <= 1e-8 {
        Ok(detail)
    } else {
        Err(format!("{detail}, status {}", res.status))
    }
}

fn convergence_envelope() -> Outcome {
    let start = Instant::now();
    let heat = build_heat_problem(&HeatParams::new(4, 50)).map_err(|e| e.to_string())?;
    let qp = build_dense_qp(&heat.data).map_err(|e| e.to_string())?;
    let opts = IpmOptions {
        tol: 1e-8,
        backend: BackendKind::Reference,
        ..Default::default()
    };
    let res = solve(&qp, &opts).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let detail = format!(
        "heat N=4 T=50 (n_x=64, {} variables, {} rows): {} in {} iterations, {secs:.2} s (solver {:.2} s, linalg {:.2} s)",
        qp.program.num_vars(),
        qp.program.num_ineq(),
        res.status,
        res.iterations,
        res.timing.total.as_secs_f64(),
        res.timing.linalg.as_secs_f64()
    );
    if res.converged() && res.iterations <= 60 && secs < 30.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn dimension_claims() -> Outcome {
    common::dimension_claims(4, 20).map(|_| "20 random shapes: T*n_u variables, 2T(n_c+n_x+n_u) rows".into())
}

fn reduction_correctness() -> Outcome {
    let s = common::reduction_correctness(5, 200)?;
    Ok(format!(
        "{} problems, worst dynamics residual {:.2e} of budget, worst objective gap {:.2e} of budget",
        s.problems, s.worst_dynamics, s.worst_objective
    ))
}

fn scaling_trend() -> Outcome {
    let opts = IpmOptions::default();
    // warm caches and the allocator before timing
    run_bench(&BenchGrid::new(vec![2], vec![10, 40], 1), &opts);

    let horizon = run_bench(&BenchGrid::new(vec![2], vec![10, 20, 40, 80], 3), &opts);
    let states = run_bench(&BenchGrid::new(vec![2, 3, 4], vec![10], 5), &opts);
    if let Some(bad) = horizon.iter().chain(&states).find(|r| r.status != "converged") {
        return Err(format!("N={} T={} ended with {}", bad.n, bad.horizon, bad.status));
    }
    let t_slope = horizon_slopes(&summarize(&horizon))
        .first()
        .map(|s| s.1)
        .ok_or("no horizon slope")?;
    let x_slope = state_slopes(&summarize(&states))
        .first()
        .map(|s| s.1)
        .ok_or("no state slope")?;
    let detail = format!(
        "slope of total time vs T at N=2: {t_slope:.2} (want [2, 4]); slope of per-iteration time vs n_x at T=10: {x_slope:.2} (want < 2)"
    );
    if (2.0..=4.0).contains(&t_slope) && x_slope < 2.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn physics_sanity() -> Outcome {
    let mut parts = Vec::new();
    for (n, t) in [(2, 10), (3, 20)] {
        let (s, res) = common::heat_physics(n, t)?;
        parts.push(format!(
            "N={n} T={t}: row sum {:.1e}, face spread {:.1e}, bound violation {:.1e} ({} iterations)",
            s.row_sum_error, s.symmetry_gap, s.bound_violation, res.iterations
        ));
    }
    Ok(parts.join("; "))
}

fn backend_conformance() -> Outcome {
    let s = common::backend_conformance(8, 50)?;
    Ok(format!(
        "{} matrices, worst reconstruction {:.2e} of 1e-12*n*max|M|, worst backend disagreement {:.1e}",
        s.matrices, s.worst_reconstruction_ratio, s.worst_backend_disagreement
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence", oracle_equivalence),
        ("condensed/augmented step equivalence", step_equivalence),
        ("convergence envelope", convergence_envelope),
        ("dimension claims", dimension_claims),
        ("reduction correctness", reduction_correctness),
        ("scaling trend", scaling_trend),
        ("physics sanity", physics_sanity),
        ("backend conformance", backend_conformance),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
