//! Structured linear-quadratic MPC problem data.
//!
//! ```text
//! min  x_Tᵀ Qf x_T + Σ_t [x_t; u_t]ᵀ [Q S; Sᵀ R] [x_t; u_t]
//! s.t. x_0 = x̄
//!      x_{t+1} = A x_t + B u_t + w_t         t = 0..T-1
//!      gl ≤ E x_t + F u_t ≤ gu               t = 0..T-1
//!      xl ≤ x_t ≤ xu                          t = 0..T
//!      ul ≤ u_t ≤ uu                          t = 0..T-1
//! ```
//!
//! Absent or one-sided bounds are encoded with `±inf`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::linalg::cholesky_factorize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("dimension mismatch between `{first}` and `{second}`: {detail}")]
    DimensionMismatch {
        first: &'static str,
        second: &'static str,
        detail: String,
    },
    #[error("invalid problem: {0}")]
    Invalid(ValidationReport),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub nx: usize,
    pub nu: usize,
    pub nc: usize,
    pub horizon: usize,
}

/// Problem data. Immutable after construction in practice; every consumer
/// takes `&LqProblemData`.
#[derive(Debug, Clone, PartialEq)]
pub struct LqProblemData {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub qf: DMatrix<f64>,
    pub r: DMatrix<f64>,
    /// Cross term between state and input (`nx x nu`).
    pub s: DMatrix<f64>,
    /// Mixed constraint maps, `nc x nx` and `nc x nu`.
    pub e: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub gl: DVector<f64>,
    pub gu: DVector<f64>,
    pub xl: DVector<f64>,
    pub xu: DVector<f64>,
    pub ul: DVector<f64>,
    pub uu: DVector<f64>,
    /// One disturbance per step.
    pub w: Vec<DVector<f64>>,
    pub x_bar: DVector<f64>,
    /// Feedback gain in `u_t = K x_t + v_t` (`nu x nx`).
    pub k: DMatrix<f64>,
    pub horizon: usize,
}

impl LqProblemData {
    /// Unconstrained problem with `Qf = Q`, `S = 0`, `K = 0`, zero
    /// disturbances and no mixed constraints.
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
        x_bar: DVector<f64>,
        horizon: usize,
    ) -> Self {
        let nx = a.nrows();
        let nu = b.ncols();
        LqProblemData {
            qf: q.clone(),
            s: DMatrix::zeros(nx, nu),
            e: DMatrix::zeros(0, nx),
            f: DMatrix::zeros(0, nu),
            gl: DVector::zeros(0),
            gu: DVector::zeros(0),
            xl: DVector::from_element(nx, f64::NEG_INFINITY),
            xu: DVector::from_element(nx, f64::INFINITY),
            ul: DVector::from_element(nu, f64::NEG_INFINITY),
            uu: DVector::from_element(nu, f64::INFINITY),
            w: vec![DVector::zeros(nx); horizon],
            k: DMatrix::zeros(nu, nx),
            a,
            b,
            q,
            r,
            x_bar,
            horizon,
        }
    }

    pub fn with_state_bounds(mut self, xl: DVector<f64>, xu: DVector<f64>) -> Self {
        self.xl = xl;
        self.xu = xu;
        self
    }

    pub fn with_input_bounds(mut self, ul: DVector<f64>, uu: DVector<f64>) -> Self {
        self.ul = ul;
        self.uu = uu;
        self
    }

    pub fn with_mixed_constraints(
        mut self,
        e: DMatrix<f64>,
        f: DMatrix<f64>,
        gl: DVector<f64>,
        gu: DVector<f64>,
    ) -> Self {
        self.e = e;
        self.f = f;
        self.gl = gl;
        self.gu = gu;
        self
    }

    pub fn with_feedback(mut self, k: DMatrix<f64>) -> Self {
        self.k = k;
        self
    }

    pub fn with_terminal_cost(mut self, qf: DMatrix<f64>) -> Self {
        self.qf = qf;
        self
    }

    pub fn with_cross_cost(mut self, s: DMatrix<f64>) -> Self {
        self.s = s;
        self
    }

    pub fn with_disturbances(mut self, w: Vec<DVector<f64>>) -> Self {
        self.w = w;
        self
    }

    /// `(nx, nu, nc, T)` read from the matrix shapes.
    pub fn dims(&self) -> Result<Dims, ProblemError> {
        let nx = self.a.nrows();
        let nu = self.b.ncols();
        let nc = self.e.nrows();
        let mismatch = |first, second, detail: String| -> Result<(), ProblemError> {
            Err(ProblemError::DimensionMismatch {
                first,
                second,
                detail,
            })
        };
        let square = |name: &'static str, m: &DMatrix<f64>, n: usize| {
            if m.shape() != (n, n) {
                mismatch(
                    name,
                    "A",
                    format!("expected {n}x{n}, found {}x{}", m.nrows(), m.ncols()),
                )
            } else {
                Ok(())
            }
        };
        let shape = |name: &'static str, other: &'static str, m: &DMatrix<f64>, r: usize, c: usize| {
            if m.shape() != (r, c) {
                mismatch(
                    name,
                    other,
                    format!("expected {r}x{c}, found {}x{}", m.nrows(), m.ncols()),
                )
            } else {
                Ok(())
            }
        };
        let len = |name: &'static str, other: &'static str, v: &DVector<f64>, n: usize| {
            if v.len() != n {
                mismatch(name, other, format!("expected length {n}, found {}", v.len()))
            } else {
                Ok(())
            }
        };

        square("A", &self.a, nx)?;
        if self.b.nrows() != nx {
            mismatch(
                "B",
                "A",
                format!("B has {} rows but A is {nx}x{nx}", self.b.nrows()),
            )?;
        }
        square("Q", &self.q, nx)?;
        square("Qf", &self.qf, nx)?;
        shape("R", "B", &self.r, nu, nu)?;
        shape("S", "B", &self.s, nx, nu)?;
        shape("E", "A", &self.e, nc, nx)?;
        shape("F", "E", &self.f, nc, nu)?;
        len("gl", "E", &self.gl, nc)?;
        len("gu", "E", &self.gu, nc)?;
        len("xl", "A", &self.xl, nx)?;
        len("xu", "A", &self.xu, nx)?;
        len("ul", "B", &self.ul, nu)?;
        len("uu", "B", &self.uu, nu)?;
        len("x_bar", "A", &self.x_bar, nx)?;
        shape("K", "B", &self.k, nu, nx)?;
        if self.w.len() != self.horizon {
            mismatch(
                "w",
                "T",
                format!("{} disturbances for horizon {}", self.w.len(), self.horizon),
            )?;
        }
        for w in &self.w {
            len("w", "A", w, nx)?;
        }
        Ok(Dims {
            nx,
            nu,
            nc,
            horizon: self.horizon,
        })
    }

    /// Returns every violated invariant; an empty report means valid.
    pub fn validate(&self) -> ValidationReport {
        validate_problem(self)
    }

    /// Errors unless the report is empty.
    pub fn ensure_valid(&self) -> Result<Dims, ProblemError> {
        let dims = self.dims()?;
        let report = self.validate();
        if report.is_empty() {
            Ok(dims)
        } else {
            Err(ProblemError::Invalid(report))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub field: &'static str,
    pub index: Option<usize>,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.issues.iter().any(|i| i.field == field)
    }

    fn push(&mut self, field: &'static str, index: Option<usize>, message: String) {
        self.issues.push(Issue {
            field,
            index,
            message,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

pub const SYMMETRY_RTOL: f64 = 1e-12;
pub const PSD_SHIFT: f64 = 1e-10;

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

pub(crate) fn is_symmetric(m: &DMatrix<f64>, rtol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let tol = rtol * max_abs(m).max(1.0);
    let n = m.nrows();
    (0..n).all(|j| (j + 1..n).all(|i| (m[(i, j)] - m[(j, i)]).abs() <= tol))
}

/// PSD test by factorizing `M + shift·max(1, max|M|)·I`.
pub(crate) fn is_psd_by_shift(m: &DMatrix<f64>, shift: f64) -> bool {
    let n = m.nrows();
    let shifted = m + DMatrix::identity(n, n) * (shift * max_abs(m).max(1.0));
    cholesky_factorize(&shifted).is_ok()
}

/// Checks every invariant of [`LqProblemData`]. Never fails; it reports.
pub fn validate_problem(data: &LqProblemData) -> ValidationReport {
    let mut report = ValidationReport::default();
    let dims = match data.dims() {
        Ok(d) => d,
        Err(ProblemError::DimensionMismatch {
            first,
            second,
            detail,
        }) => {
            report.push(
                first,
                None,
                format!("dimension mismatch between {first} and {second}: {detail}"),
            );
            return report;
        }
        Err(ProblemError::Invalid(r)) => return r,
    };
    if dims.horizon == 0 {
        report.push("T", None, "T must be positive".to_string());
    }

    let matrices: [(&'static str, &DMatrix<f64>); 10] = [
        ("A", &data.a),
        ("B", &data.b),
        ("Q", &data.q),
        ("Qf", &data.qf),
        ("R", &data.r),
        ("S", &data.s),
        ("E", &data.e),
        ("F", &data.f),
        ("K", &data.k),
        ("x_bar", &DMatrix::from_column_slice(dims.nx, 1, data.x_bar.as_slice())),
    ];
    for (name, m) in matrices {
        if let Some(pos) = m.iter().position(|x| !x.is_finite()) {
            report.push(name, Some(pos), format!("{name} has a non-finite entry at index {pos}"));
        }
    }
    for (t, w) in data.w.iter().enumerate() {
        if w.iter().any(|x| !x.is_finite()) {
            report.push("w", Some(t), format!("w has a non-finite entry at step {t}"));
        }
    }

    for (name, m) in [("Q", &data.q), ("Qf", &data.qf), ("R", &data.r)] {
        if !is_symmetric(m, SYMMETRY_RTOL) {
            report.push(name, None, format!("{name} not symmetric"));
        }
    }
    if report.issues.is_empty() {
        let n = dims.nx + dims.nu;
        let mut stage = DMatrix::zeros(n, n);
        stage.view_mut((0, 0), (dims.nx, dims.nx)).copy_from(&data.q);
        stage.view_mut((0, dims.nx), (dims.nx, dims.nu)).copy_from(&data.s);
        stage
            .view_mut((dims.nx, 0), (dims.nu, dims.nx))
            .copy_from(&data.s.transpose());
        stage.view_mut((dims.nx, dims.nx), (dims.nu, dims.nu)).copy_from(&data.r);
        if !is_psd_by_shift(&stage, PSD_SHIFT) {
            report.push("Q", None, "stage cost [Q S; Sᵀ R] not positive semidefinite".to_string());
        }
        if !is_psd_by_shift(&data.qf, PSD_SHIFT) {
            report.push("Qf", None, "Qf not positive semidefinite".to_string());
        }
    }

    let pairs: [(&'static str, &'static str, &DVector<f64>, &DVector<f64>); 3] = [
        ("xl", "xu", &data.xl, &data.xu),
        ("ul", "uu", &data.ul, &data.uu),
        ("gl", "gu", &data.gl, &data.gu),
    ];
    for (lo_name, hi_name, lo, hi) in pairs {
        for (i, (l, h)) in lo.iter().zip(hi.iter()).enumerate() {
            if l.is_nan() || h.is_nan() {
                report.push(lo_name, Some(i), format!("{lo_name}/{hi_name} is NaN at index {i}"));
            } else if *l == f64::INFINITY {
                report.push(lo_name, Some(i), format!("{lo_name} is +inf at index {i}"));
            } else if *h == f64::NEG_INFINITY {
                report.push(hi_name, Some(i), format!("{hi_name} is -inf at index {i}"));
            } else if l > h {
                report.push(lo_name, Some(i), format!("{lo_name} > {hi_name} at index {i}"));
            }
        }
    }

    // x_0 is fixed, so its bounds are checked here and never enter the QP.
    for i in 0..dims.nx {
        let x = data.x_bar[i];
        if x < data.xl[i] || x > data.xu[i] {
            report.push(
                "x_bar",
                Some(i),
                format!("x_bar violates state bounds at index {i}"),
            );
        }
    }
    report
}
