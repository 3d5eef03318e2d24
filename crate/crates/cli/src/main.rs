//! `cmpc`: solve MPC problem files, run the heat benchmark grid and check
//! the solver against the enumeration oracle.
//!
//! Exit codes: 0 converged (or verify passed), 1 verify found a mismatch,
//! 2 iteration cap reached, 3 factorization failure, 4 invalid input,
//! 5 line-search failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use condensed_mpc::harness::{
    render_csv, run_bench, run_verify, BenchGrid, BenchRecord, VerifyOptions, CSV_HEADER,
};
use condensed_mpc::heat::{build_heat_problem, HeatParams, Setpoint};
use condensed_mpc::io::{read_problem_file, write_problem_file, write_quad_program};
use condensed_mpc::ipm::{solve, IpmOptions, IpmResult, IpmStatus, LOG_HEADER};
use condensed_mpc::linalg::BackendKind;
use condensed_mpc::problem::LqProblemData;
use condensed_mpc::reduction::build_dense_qp;

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_INVALID: u8 = 4;

#[derive(Parser)]
#[command(name = "cmpc", version, about = "Condensed-space interior-point MPC solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem file.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
        /// Also print a CSV header and row.
        #[arg(long)]
        csv: bool,
        /// Write the reduced dense QP (H, h, h0, J, d) to this path.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Build and solve one heat-benchmark instance.
    Heat {
        #[arg(long = "N", default_value_t = 2)]
        n: usize,
        #[arg(long = "T", default_value_t = 10)]
        horizon: usize,
        /// Uniform set point in kelvin.
        #[arg(long, default_value_t = 350.0)]
        setpoint: f64,
        /// Write the instance as a problem file and exit without solving.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
        #[arg(long)]
        csv: bool,
    },
    /// Heat-benchmark grid as CSV on standard output.
    Bench {
        /// Grid sizes, comma separated.
        #[arg(long = "N", value_delimiter = ',', num_args = 0..)]
        ns: Vec<usize>,
        /// Horizons, comma separated.
        #[arg(long = "T", value_delimiter = ',', num_args = 0..)]
        horizons: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, default_value_t = 350.0)]
        setpoint: f64,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Compare the solver with the enumeration oracle on random tiny problems.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Run instances on all cores.
        #[arg(long)]
        parallel: bool,
        /// Where to write the first failing instance.
        #[arg(long)]
        dump: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
}

#[derive(Args, Clone)]
struct SolverFlags {
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long = "mu-init", default_value_t = 0.1)]
    mu_init: f64,
    #[arg(long = "max-iter", default_value_t = 200)]
    max_iter: usize,
    /// Factorization backend: reference or parallel.
    #[arg(long, default_value = "reference")]
    backend: String,
    /// Print the per-iteration log.
    #[arg(long = "log-iters")]
    log_iters: bool,
}

impl SolverFlags {
    fn options(&self) -> Result<IpmOptions, String> {
        let backend: BackendKind = self.backend.parse().map_err(|e| format!("{e}"))?;
        let opts = IpmOptions {
            tol: self.tol,
            mu_init: self.mu_init,
            max_iter: self.max_iter,
            backend,
            ..Default::default()
        };
        opts.validate().map_err(|e| e.to_string())?;
        Ok(opts)
    }
}

fn invalid(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INVALID)
}

fn status_code(status: IpmStatus) -> ExitCode {
    ExitCode::from(match status {
        IpmStatus::Converged => 0,
        IpmStatus::MaxIter => 2,
        IpmStatus::FactorizationFailure => 3,
        IpmStatus::LineSearchFailure => 5,
    })
}

fn print_log(result: &IpmResult) {
    println!("{LOG_HEADER}");
    for rec in &result.history {
        println!("{}", rec.log_line());
    }
}

fn print_report(result: &IpmResult, build_s: f64) {
    println!("status     {}", result.status);
    println!("iter       {}", result.iterations);
    println!("tot        {:.6} s", result.timing.total.as_secs_f64());
    println!("lin        {:.6} s", result.timing.linalg.as_secs_f64());
    println!("build      {build_s:.6} s");
    println!("objective  {:.10e}", result.objective);
    println!("kkt_error  {:.3e}", result.kkt_error);
    if let Some(msg) = &result.message {
        eprintln!("{msg}");
    }
}

fn record(name: &str, n: usize, data: &LqProblemData, result: &IpmResult) -> BenchRecord {
    BenchRecord {
        name: name.to_string(),
        n,
        horizon: data.horizon,
        nx: data.a.nrows(),
        nu: data.b.ncols(),
        iter: result.iterations,
        total_s: result.timing.total.as_secs_f64(),
        linalg_s: result.timing.linalg.as_secs_f64(),
        objective: result.objective,
        kkt_error: result.kkt_error,
        status: result.status.as_str().to_string(),
    }
}

/// Validates, reduces and solves; prints the report.
fn run_problem(
    name: &str,
    n: usize,
    data: &LqProblemData,
    flags: &SolverFlags,
    csv: bool,
    dump: Option<&Path>,
) -> ExitCode {
    let opts = match flags.options() {
        Ok(o) => o,
        Err(e) => return invalid(e),
    };
    if let Err(e) = data.ensure_valid() {
        return invalid(e);
    }
    let start = Instant::now();
    let qp = match build_dense_qp(data) {
        Ok(qp) => qp,
        Err(e) => return invalid(e),
    };
    let build_s = start.elapsed().as_secs_f64();
    if let Some(path) = dump {
        if let Err(e) = std::fs::write(path, write_quad_program(&qp.program)) {
            return invalid(format!("cannot write {}: {e}", path.display()));
        }
    }
    let result = match solve(&qp, &opts) {
        Ok(r) => r,
        Err(e) => return invalid(e),
    };
    if flags.log_iters {
        print_log(&result);
    }
    print_report(&result, build_s);
    if csv {
        println!("{CSV_HEADER}");
        println!("{}", record(name, n, data, &result).csv_row());
    }
    status_code(result.status)
}

fn cmd_solve(file: &Path, flags: &SolverFlags, csv: bool, dump: Option<&Path>) -> ExitCode {
    let data = match read_problem_file(file) {
        Ok(d) => d,
        Err(e) => return invalid(format!("{}: {e}", file.display())),
    };
    let name = file
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "problem".into());
    run_problem(&name, 0, &data, flags, csv, dump)
}

fn cmd_heat(
    n: usize,
    horizon: usize,
    setpoint: f64,
    dump: Option<&Path>,
    flags: &SolverFlags,
    csv: bool,
) -> ExitCode {
    let params = HeatParams::new(n, horizon).with_setpoint(Setpoint::Uniform(setpoint));
    let heat = match build_heat_problem(&params) {
        Ok(h) => h,
        Err(e) => return invalid(e),
    };
    if let Some(path) = dump {
        return match write_problem_file(path, &heat.data) {
            Ok(()) => {
                eprintln!("wrote {}", path.display());
                ExitCode::SUCCESS
            }
            Err(e) => invalid(format!("cannot write {}: {e}", path.display())),
        };
    }
    run_problem("heat3d", n, &heat.data, flags, csv, None)
}

fn cmd_bench(grid: BenchGrid, flags: &SolverFlags) -> ExitCode {
    let opts = match flags.options() {
        Ok(o) => o,
        Err(e) => return invalid(e),
    };
    for &n in &grid.ns {
        for &t in &grid.horizons {
            let params = HeatParams::new(n, t).with_setpoint(grid.setpoint.clone());
            if let Err(e) = build_heat_problem(&params) {
                return invalid(format!("grid point N={n} T={t}: {e}"));
            }
        }
    }
    let records = run_bench(&grid, &opts);
    print!("{}", render_csv(&records));
    ExitCode::SUCCESS
}

fn cmd_verify(opts: VerifyOptions, dump: Option<PathBuf>) -> ExitCode {
    if opts.count == 0 {
        return invalid("count must be at least 1");
    }
    let start = Instant::now();
    let report = run_verify(&opts);
    println!("{report}");
    eprintln!("elapsed {:.3} s", start.elapsed().as_secs_f64());
    if let Some(fail) = report.first_failure() {
        let path = dump.unwrap_or_else(|| {
            PathBuf::from(format!("verify-seed{}-instance{}.txt", opts.seed, fail.index))
        });
        match write_problem_file(&path, &fail.problem) {
            Ok(()) => eprintln!("first failing instance written to {}", path.display()),
            Err(e) => eprintln!("cannot write {}: {e}", path.display()),
        }
        return ExitCode::from(EXIT_VERIFY_FAILED);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_INVALID);
        }
    };
    match cli.command {
        Command::Solve {
            file,
            solver,
            csv,
            dump,
        } => cmd_solve(&file, &solver, csv, dump.as_deref()),
        Command::Heat {
            n,
            horizon,
            setpoint,
            dump,
            solver,
            csv,
        } => cmd_heat(n, horizon, setpoint, dump.as_deref(), &solver, csv),
        Command::Bench {
            ns,
            horizons,
            reps,
            setpoint,
            solver,
        } => {
            if solver.log_iters {
                eprintln!("--log-iters is ignored by bench");
            }
            let mut grid = BenchGrid::new(ns, horizons, reps);
            grid.setpoint = Setpoint::Uniform(setpoint);
            cmd_bench(grid, &solver)
        }
        Command::Verify {
            seed,
            count,
            parallel,
            dump,
            solver,
        } => {
            let ipm = match solver.options() {
                Ok(o) => o,
                Err(e) => return invalid(e),
            };
            let opts = VerifyOptions {
                seed,
                count,
                parallel,
                ipm,
            };
            cmd_verify(opts, dump)
        }
    }
}
