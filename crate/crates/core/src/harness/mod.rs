//! Random problem ensembles, oracle verification and the heat benchmark
//! grid behind the command-line tool.

mod bench;
mod random;
mod verify;

pub use bench::{
    bench_cell, horizon_slopes, loglog_slope, median, render_csv, run_bench, state_slopes,
    summarize, BenchGrid, BenchRecord, CellSummary, CSV_HEADER,
};
pub use random::{
    random_problem, random_problem_with_shape, random_stabilizing_gain, spectral_radius, Ensemble,
};
pub use verify::{
    run_verify, verify_with, InstanceOutcome, VerifyOptions, VerifyReport, CONTROL_GAP_TOL,
    MAX_ATTEMPTS, OBJECTIVE_GAP_TOL,
};
