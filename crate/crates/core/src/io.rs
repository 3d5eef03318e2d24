//! Plain-text container for problem data.
//!
//! A document is a sequence of named dense matrices. Each entry starts with
//! a header line `name rows cols` followed by `rows` lines of `cols`
//! whitespace-separated values in row-major order. Infinite entries are
//! written `inf` / `-inf`. Blank lines and lines starting with `#` are
//! ignored.
//!
//! ```text
//! A 2 2
//! 1.0 0.1
//! 0.0 1.0
//! x_bar 1 2
//! 0.5 -0.5
//! T 1 1
//! 10.0
//! ```
//!
//! Vectors are stored as a single row, the disturbances `w` as a `T x n_x`
//! matrix and the horizon `T` as a `1 x 1` matrix. Values are printed with
//! the shortest representation that parses back to the same bits.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::problem::LqProblemData;
use crate::reduction::QuadProgram;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing field `{0}`")]
    MissingField(&'static str),
    #[error("field `{field}`: {message}")]
    BadField { field: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Ordered list of named matrices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub entries: Vec<(String, DMatrix<f64>)>,
}

impl Document {
    pub fn push(&mut self, name: &str, m: DMatrix<f64>) {
        self.entries.push((name.to_string(), m));
    }

    pub fn get(&self, name: &str) -> Option<&DMatrix<f64>> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    fn require(&self, name: &'static str) -> Result<&DMatrix<f64>, FormatError> {
        self.get(name).ok_or(FormatError::MissingField(name))
    }

    fn vector(&self, name: &'static str) -> Result<Option<DVector<f64>>, FormatError> {
        match self.get(name) {
            None => Ok(None),
            Some(m) if m.is_empty() => Ok(Some(DVector::zeros(0))),
            Some(m) if m.nrows() == 1 => Ok(Some(m.row(0).transpose())),
            Some(m) if m.ncols() == 1 => Ok(Some(m.column(0).into_owned())),
            Some(m) => Err(FormatError::BadField {
                field: name.to_string(),
                message: format!("expected a vector, found {}x{}", m.nrows(), m.ncols()),
            }),
        }
    }
}

fn row_vector(v: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_row_slice(1, v.len(), v.as_slice())
}

pub fn write_document(doc: &Document) -> String {
    let mut out = String::new();
    for (name, m) in &doc.entries {
        let _ = writeln!(out, "{name} {} {}", m.nrows(), m.ncols());
        // a row with no columns would be a blank line, which the parser skips
        for r in 0..m.nrows() * usize::from(m.ncols() > 0) {
            let line: Vec<String> = m.row(r).iter().map(|x| format!("{x:?}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
    }
    out
}

pub fn parse_document(text: &str) -> Result<Document, FormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut doc = Document::default();
    while let Some((line, header)) = lines.next() {
        let parts: Vec<&str> = header.split_whitespace().collect();
        let err = |message: String| FormatError::Parse { line, message };
        if parts.len() != 3 {
            return Err(err(format!("expected `name rows cols`, found `{header}`")));
        }
        let name = parts[0];
        let dim = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(format!("bad dimension `{s}` for `{name}`")))
        };
        let (rows, cols) = (dim(parts[1])?, dim(parts[2])?);
        if doc.get(name).is_some() {
            return Err(err(format!("duplicate field `{name}`")));
        }
        let mut m = DMatrix::zeros(rows, cols);
        for r in 0..rows * usize::from(cols > 0) {
            let Some((line, body)) = lines.next() else {
                return Err(FormatError::Parse {
                    line,
                    message: format!("`{name}` ends after {r} of {rows} rows"),
                });
            };
            let values: Vec<&str> = body.split_whitespace().collect();
            if values.len() != cols {
                return Err(FormatError::Parse {
                    line,
                    message: format!("`{name}` row {r} has {} values, expected {cols}", values.len()),
                });
            }
            for (c, tok) in values.iter().enumerate() {
                m[(r, c)] = tok.parse::<f64>().map_err(|_| FormatError::Parse {
                    line,
                    message: format!("bad number `{tok}` in `{name}`"),
                })?;
            }
        }
        doc.push(name, m);
    }
    Ok(doc)
}

pub fn problem_to_document(data: &LqProblemData) -> Document {
    let mut doc = Document::default();
    doc.push("A", data.a.clone());
    doc.push("B", data.b.clone());
    doc.push("Q", data.q.clone());
    doc.push("Qf", data.qf.clone());
    doc.push("R", data.r.clone());
    doc.push("S", data.s.clone());
    doc.push("E", data.e.clone());
    doc.push("F", data.f.clone());
    doc.push("gl", row_vector(&data.gl));
    doc.push("gu", row_vector(&data.gu));
    doc.push("xl", row_vector(&data.xl));
    doc.push("xu", row_vector(&data.xu));
    doc.push("ul", row_vector(&data.ul));
    doc.push("uu", row_vector(&data.uu));
    let nx = data.a.nrows();
    let mut w = DMatrix::zeros(data.w.len(), nx);
    for (t, wt) in data.w.iter().enumerate() {
        if wt.len() == nx {
            w.row_mut(t).copy_from(&wt.transpose());
        }
    }
    doc.push("w", w);
    doc.push("x_bar", row_vector(&data.x_bar));
    doc.push("K", data.k.clone());
    doc.push("T", DMatrix::from_element(1, 1, data.horizon as f64));
    doc
}

/// Reads problem data. `A`, `B`, `Q`, `R`, `x_bar` and `T` are required;
/// the rest default as in [`LqProblemData::new`]. Shapes are not checked
/// here, see [`LqProblemData::dims`].
pub fn problem_from_document(doc: &Document) -> Result<LqProblemData, FormatError> {
    let t = doc.require("T")?;
    let horizon = match (t.shape(), t.get(0)) {
        ((1, 1), Some(&v)) if v >= 0.0 && v.fract() == 0.0 => v as usize,
        _ => {
            return Err(FormatError::BadField {
                field: "T".into(),
                message: "expected a single nonnegative integer".into(),
            })
        }
    };
    let x_bar = doc.vector("x_bar")?.ok_or(FormatError::MissingField("x_bar"))?;
    let mut data = LqProblemData::new(
        doc.require("A")?.clone(),
        doc.require("B")?.clone(),
        doc.require("Q")?.clone(),
        doc.require("R")?.clone(),
        x_bar,
        horizon,
    );
    if let Some(m) = doc.get("Qf") {
        data.qf = m.clone();
    }
    if let Some(m) = doc.get("S") {
        data.s = m.clone();
    }
    if let Some(m) = doc.get("E") {
        data.e = m.clone();
    }
    if let Some(m) = doc.get("F") {
        data.f = m.clone();
    }
    if let Some(m) = doc.get("K") {
        data.k = m.clone();
    }
    for (name, slot) in [
        ("gl", &mut data.gl),
        ("gu", &mut data.gu),
        ("xl", &mut data.xl),
        ("xu", &mut data.xu),
        ("ul", &mut data.ul),
        ("uu", &mut data.uu),
    ] {
        if let Some(v) = doc.vector(name)? {
            *slot = v;
        }
    }
    if let Some(w) = doc.get("w") {
        data.w = (0..w.nrows()).map(|t| w.row(t).transpose()).collect();
    }
    Ok(data)
}

pub fn write_problem(data: &LqProblemData) -> String {
    write_document(&problem_to_document(data))
}

pub fn parse_problem(text: &str) -> Result<LqProblemData, FormatError> {
    problem_from_document(&parse_document(text)?)
}

pub fn read_problem_file(path: impl AsRef<Path>) -> Result<LqProblemData, FormatError> {
    parse_problem(&std::fs::read_to_string(path)?)
}

pub fn write_problem_file(path: impl AsRef<Path>, data: &LqProblemData) -> Result<(), FormatError> {
    std::fs::write(path, write_problem(data))?;
    Ok(())
}

/// Dense QP as fields `H`, `h`, `h0`, `J`, `d`.
pub fn write_quad_program(qp: &QuadProgram) -> String {
    let mut doc = Document::default();
    doc.push("H", qp.hessian.clone());
    doc.push("h", row_vector(&qp.linear));
    doc.push("h0", DMatrix::from_element(1, 1, qp.constant));
    doc.push("J", qp.jacobian.clone());
    doc.push("d", row_vector(&qp.rhs));
    write_document(&doc)
}

pub fn parse_quad_program(text: &str) -> Result<QuadProgram, FormatError> {
    let doc = parse_document(text)?;
    let hessian = doc.require("H")?.clone();
    let jacobian = doc.require("J")?.clone();
    let linear = doc.vector("h")?.ok_or(FormatError::MissingField("h"))?;
    let rhs = doc.vector("d")?.ok_or(FormatError::MissingField("d"))?;
    let constant = doc.require("h0")?.get(0).copied().unwrap_or(0.0);
    let n = hessian.nrows();
    if hessian.ncols() != n || linear.len() != n || jacobian.ncols() != n || rhs.len() != jacobian.nrows() {
        return Err(FormatError::BadField {
            field: "H".into(),
            message: "inconsistent QP dimensions".into(),
        });
    }
    Ok(QuadProgram::new(hessian, linear, constant, jacobian, rhs))
}
