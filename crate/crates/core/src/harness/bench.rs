use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use crate::heat::{build_heat_problem, HeatParams, Setpoint};
use crate::ipm::{solve, IpmOptions};
use crate::reduction::build_dense_qp;

pub const CSV_HEADER: &str = "name,N,T,n_x,n_u,iter,total_s,linalg_s,objective,kkt_error,status";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub name: String,
    pub n: usize,
    pub horizon: usize,
    pub nx: usize,
    pub nu: usize,
    pub iter: usize,
    /// Interior-point wall time, excluding problem construction.
    pub total_s: f64,
    /// Factorization and triangular solves.
    pub linalg_s: f64,
    pub objective: f64,
    pub kkt_error: f64,
    pub status: String,
}

impl BenchRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6e},{:.6e},{:.10e},{:.3e},{}",
            self.name,
            self.n,
            self.horizon,
            self.nx,
            self.nu,
            self.iter,
            self.total_s,
            self.linalg_s,
            self.objective,
            self.kkt_error,
            self.status
        )
    }

    pub fn per_iteration_s(&self) -> f64 {
        self.total_s / self.iter.max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchGrid {
    pub ns: Vec<usize>,
    pub horizons: Vec<usize>,
    pub reps: usize,
    pub setpoint: Setpoint,
}

impl BenchGrid {
    pub fn new(ns: Vec<usize>, horizons: Vec<usize>, reps: usize) -> Self {
        BenchGrid {
            ns,
            horizons,
            reps,
            setpoint: Setpoint::Uniform(350.0),
        }
    }
}

/// One heat-benchmark solve.
pub fn bench_cell(n: usize, horizon: usize, setpoint: &Setpoint, opts: &IpmOptions) -> BenchRecord {
    let mut rec = BenchRecord {
        name: "heat3d".into(),
        n,
        horizon,
        nx: n * n * n,
        nu: crate::heat::NUM_FACES,
        iter: 0,
        total_s: 0.0,
        linalg_s: 0.0,
        objective: f64::NAN,
        kkt_error: f64::NAN,
        status: String::new(),
    };
    let params = HeatParams::new(n, horizon).with_setpoint(setpoint.clone());
    let heat = match build_heat_problem(&params) {
        Ok(h) => h,
        Err(_) => {
            rec.status = "invalid_input".into();
            return rec;
        }
    };
    let qp = match build_dense_qp(&heat.data) {
        Ok(qp) => qp,
        Err(_) => {
            rec.status = "invalid_input".into();
            return rec;
        }
    };
    let start = Instant::now();
    match solve(&qp, opts) {
        Ok(r) => {
            rec.iter = r.iterations;
            rec.total_s = r.timing.total.as_secs_f64();
            rec.linalg_s = r.timing.linalg.as_secs_f64();
            rec.objective = r.objective;
            rec.kkt_error = r.kkt_error;
            rec.status = r.status.as_str().into();
        }
        Err(_) => {
            rec.total_s = start.elapsed().as_secs_f64();
            rec.status = "invalid_input".into();
        }
    }
    rec
}

/// Runs every `(N, T, repetition)` cell sequentially, `N` outermost.
pub fn run_bench(grid: &BenchGrid, opts: &IpmOptions) -> Vec<BenchRecord> {
    let mut out = Vec::new();
    for &n in &grid.ns {
        for &t in &grid.horizons {
            for _ in 0..grid.reps {
                out.push(bench_cell(n, t, &grid.setpoint, opts));
            }
        }
    }
    out
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.total_cmp(b));
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        0.5 * (values[mid - 1] + values[mid])
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Medians over repetitions of each `(N, T)` cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub n: usize,
    pub horizon: usize,
    pub nx: usize,
    pub total_s: f64,
    pub linalg_s: f64,
    pub per_iteration_s: f64,
    pub iter: f64,
}

pub fn summarize(records: &[BenchRecord]) -> Vec<CellSummary> {
    let mut cells: BTreeMap<(usize, usize), Vec<&BenchRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((r.n, r.horizon)).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((n, horizon), rs)| {
            let col = |f: &dyn Fn(&BenchRecord) -> f64| {
                let mut v: Vec<f64> = rs.iter().map(|r| f(r)).collect();
                median(&mut v)
            };
            CellSummary {
                n,
                horizon,
                nx: rs[0].nx,
                total_s: col(&|r| r.total_s),
                linalg_s: col(&|r| r.linalg_s),
                per_iteration_s: col(&|r| r.per_iteration_s()),
                iter: col(&|r| r.iter as f64),
            }
        })
        .collect()
}

/// Slope of median total time against `T` for each `N` with at least two
/// horizons.
pub fn horizon_slopes(cells: &[CellSummary]) -> Vec<(usize, f64)> {
    let mut by_n: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for c in cells {
        by_n.entry(c.n).or_default().push((c.horizon as f64, c.total_s));
    }
    by_n.into_iter()
        .filter_map(|(n, pts)| loglog_slope(&pts).map(|s| (n, s)))
        .collect()
}

/// Slope of median per-iteration time against `n_x` for each `T` with at
/// least two grid sizes.
pub fn state_slopes(cells: &[CellSummary]) -> Vec<(usize, f64)> {
    let mut by_t: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for c in cells {
        by_t.entry(c.horizon).or_default().push((c.nx as f64, c.per_iteration_s));
    }
    by_t.into_iter()
        .filter_map(|(t, pts)| loglog_slope(&pts).map(|s| (t, s)))
        .collect()
}

/// Header, one row per record, then the `#` summary block.
pub fn render_csv(records: &[BenchRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in records {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    if records.is_empty() {
        return out;
    }
    let cells = summarize(records);
    let _ = writeln!(out, "# medians over repetitions");
    let _ = writeln!(out, "# N,T,n_x,iter,total_s,linalg_s,per_iter_s");
    for c in &cells {
        let _ = writeln!(
            out,
            "# {},{},{},{},{:.6e},{:.6e},{:.6e}",
            c.n, c.horizon, c.nx, c.iter, c.total_s, c.linalg_s, c.per_iteration_s
        );
    }
    for (n, s) in horizon_slopes(&cells) {
        let _ = writeln!(out, "# slope log(total_s) vs log(T) at N={n}: {s:.3}");
    }
    for (t, s) in state_slopes(&cells) {
        let _ = writeln!(out, "# slope log(per_iter_s) vs log(n_x) at T={t}: {s:.3}");
    }
    out
}
