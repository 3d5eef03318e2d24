use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ipm::{solve, IpmOptions, IpmStatus};
use crate::oracle::{solve_enumeration, OracleStatus};
use crate::problem::LqProblemData;
use crate::reduction::{build_dense_qp, recover_trajectory};

use super::random::{random_problem, Ensemble};

/// Relative objective gap `|f - f*| / (1 + |f*|)` allowed.
pub const OBJECTIVE_GAP_TOL: f64 = 1e-6;
/// Max-norm control gap allowed.
pub const CONTROL_GAP_TOL: f64 = 1e-5;
/// Draws per instance before giving up on finding a feasible one.
pub const MAX_ATTEMPTS: usize = 20;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    pub count: usize,
    /// Run instances on the rayon pool. The report does not depend on it.
    pub parallel: bool,
    pub ipm: IpmOptions,
}

impl VerifyOptions {
    pub fn new(seed: u64, count: usize) -> Self {
        VerifyOptions {
            seed,
            count,
            parallel: false,
            ipm: IpmOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InstanceOutcome {
    pub index: usize,
    pub problem: LqProblemData,
    pub status: Option<IpmStatus>,
    pub objective: f64,
    pub oracle_objective: f64,
    pub objective_gap: f64,
    pub control_gap: f64,
    pub skipped: Vec<String>,
    pub error: Option<String>,
}

impl InstanceOutcome {
    pub fn passed(&self) -> bool {
        self.error.is_none()
            && self.status == Some(IpmStatus::Converged)
            && self.objective_gap <= OBJECTIVE_GAP_TOL
            && self.control_gap <= CONTROL_GAP_TOL
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub seed: u64,
    pub outcomes: Vec<InstanceOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(InstanceOutcome::passed)
    }

    pub fn skipped(&self) -> usize {
        self.outcomes.iter().map(|o| o.skipped.len()).sum()
    }

    pub fn max_objective_gap(&self) -> f64 {
        self.outcomes.iter().map(|o| o.objective_gap).fold(0.0, f64::max)
    }

    pub fn max_control_gap(&self) -> f64 {
        self.outcomes.iter().map(|o| o.control_gap).fold(0.0, f64::max)
    }

    pub fn first_failure(&self) -> Option<&InstanceOutcome> {
        self.outcomes.iter().find(|o| !o.passed())
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verify seed={} count={}", self.seed, self.outcomes.len())?;
        for o in &self.outcomes {
            for note in &o.skipped {
                writeln!(f, "skipped instance {}: {note}; regenerated", o.index)?;
            }
        }
        writeln!(f, "skipped {}", self.skipped())?;
        writeln!(
            f,
            "max objective gap {:.3e} (tol {OBJECTIVE_GAP_TOL:e})",
            self.max_objective_gap()
        )?;
        writeln!(
            f,
            "max control gap {:.3e} (tol {CONTROL_GAP_TOL:e})",
            self.max_control_gap()
        )?;
        let failures: Vec<&InstanceOutcome> = self.outcomes.iter().filter(|o| !o.passed()).collect();
        for o in &failures {
            let status = o.status.map_or("none", IpmStatus::as_str);
            writeln!(
                f,
                "FAIL instance {}: status {status}, objective gap {:.3e}, control gap {:.3e}{}",
                o.index,
                o.objective_gap,
                o.control_gap,
                o.error.as_deref().map(|e| format!(", {e}")).unwrap_or_default()
            )?;
        }
        write!(
            f,
            "{} ({} of {} passed)",
            if failures.is_empty() { "PASS" } else { "FAIL" },
            self.outcomes.len() - failures.len(),
            self.outcomes.len()
        )
    }
}

/// Solves `count` random tiny problems with the interior-point method and
/// the enumeration oracle and compares objectives and controls.
pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    verify_with(opts, |rng| random_problem(rng, &Ensemble::TINY))
}

/// As [`run_verify`] with a custom instance generator. Instance `i` draws
/// from stream `i` of a ChaCha8 generator seeded with `opts.seed`, so the
/// result does not depend on the execution order. Invalid or infeasible
/// draws are skipped and redrawn.
pub fn verify_with<G>(opts: &VerifyOptions, generate: G) -> VerifyReport
where
    G: Fn(&mut ChaCha8Rng) -> LqProblemData + Sync,
{
    let run = |i: usize| verify_instance(opts, i, &generate);
    let outcomes: Vec<InstanceOutcome> = if opts.parallel {
        run_parallel(opts.count, run)
    } else {
        (0..opts.count).map(run).collect()
    };
    VerifyReport {
        seed: opts.seed,
        outcomes,
    }
}

#[cfg(feature = "parallel")]
fn run_parallel<F>(count: usize, run: F) -> Vec<InstanceOutcome>
where
    F: Fn(usize) -> InstanceOutcome + Sync + Send,
{
    use rayon::prelude::*;
    (0..count).into_par_iter().map(run).collect()
}

#[cfg(not(feature = "parallel"))]
fn run_parallel<F>(count: usize, run: F) -> Vec<InstanceOutcome>
where
    F: Fn(usize) -> InstanceOutcome + Sync + Send,
{
    (0..count).map(run).collect()
}

fn verify_instance<G>(opts: &VerifyOptions, index: usize, generate: &G) -> InstanceOutcome
where
    G: Fn(&mut ChaCha8Rng) -> LqProblemData,
{
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(index as u64);
    let mut skipped = Vec::new();
    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let problem = generate(&mut rng);
        let report = problem.validate();
        if !report.is_empty() {
            skipped.push(format!("attempt {attempt} invalid ({report})"));
            last = Some(problem);
            continue;
        }
        let qp = match build_dense_qp(&problem) {
            Ok(qp) => qp,
            Err(e) => {
                skipped.push(format!("attempt {attempt} rejected ({e})"));
                last = Some(problem);
                continue;
            }
        };
        let oracle = match solve_enumeration(&qp.program) {
            Ok(o) => o,
            Err(e) => {
                skipped.push(format!("attempt {attempt} too large for the oracle ({e})"));
                last = Some(problem);
                continue;
            }
        };
        if oracle.status != OracleStatus::Optimal {
            skipped.push(format!("attempt {attempt} oracle status {:?}", oracle.status));
            last = Some(problem);
            continue;
        }

        let mut outcome = InstanceOutcome {
            index,
            problem,
            status: None,
            objective: f64::NAN,
            oracle_objective: oracle.objective,
            objective_gap: f64::INFINITY,
            control_gap: f64::INFINITY,
            skipped,
            error: None,
        };
        let result = match solve(&qp, &opts.ipm) {
            Ok(r) => r,
            Err(e) => {
                outcome.error = Some(e.to_string());
                return outcome;
            }
        };
        outcome.status = Some(result.status);
        outcome.objective = result.objective;
        outcome.objective_gap =
            (result.objective - oracle.objective).abs() / (1.0 + oracle.objective.abs());
        let u_oracle = recover_trajectory(&qp, &oracle.v).map(|t| t.stacked_u());
        let u_ipm = result.solution.as_ref().map(|t| t.stacked_u());
        match (u_ipm, u_oracle) {
            (Some(a), Ok(b)) => outcome.control_gap = (a - b).amax(),
            (_, Err(e)) => outcome.error = Some(e.to_string()),
            (None, _) => outcome.error = Some("no trajectory returned".into()),
        }
        if let Some(msg) = result.message {
            outcome.error.get_or_insert(msg);
        }
        return outcome;
    }
    InstanceOutcome {
        index,
        problem: last.expect("at least one attempt"),
        status: None,
        objective: f64::NAN,
        oracle_objective: f64::NAN,
        objective_gap: f64::INFINITY,
        control_gap: f64::INFINITY,
        skipped,
        error: Some(format!("no feasible instance after {MAX_ATTEMPTS} draws")),
    }
}
