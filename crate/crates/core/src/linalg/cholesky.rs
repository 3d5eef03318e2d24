use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};

use super::kernels::{axpy, gemm, ColMajor};
use super::LinalgError;

/// Panel width of the blocked factorization.
pub const CHOLESKY_BLOCK: usize = 64;

/// Lower-triangular Cholesky factor `L` with `L Lᵀ = M`.
///
/// Immutable once built; safe to share for concurrent solves.
#[derive(Debug, Clone)]
pub struct Factor {
    l: DMatrix<f64>,
    elapsed: Duration,
}

impl Factor {
    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// The lower-triangular factor; the strict upper triangle is zero.
    pub fn lower(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// Wall-clock time spent factorizing.
    pub fn elapsed(&self) -> Duration {
        self.elapsed
    }

    /// Forward then backward substitution. No refactorization.
    pub fn solve(&self, rhs: &DVector<f64>) -> Result<DVector<f64>, LinalgError> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: rhs.len(),
            });
        }
        let l = self.l.as_slice();
        let mut x = rhs.as_slice().to_vec();
        // L y = b, column oriented
        for j in 0..n {
            let col = &l[j * n..(j + 1) * n];
            x[j] /= col[j];
            let xj = x[j];
            if xj != 0.0 {
                let (_, tail) = x.split_at_mut(j + 1);
                axpy(-xj, &col[j + 1..], tail);
            }
        }
        // Lᵀ x = y, dot products down the columns
        for j in (0..n).rev() {
            let col = &l[j * n..(j + 1) * n];
            let mut acc = x[j];
            for i in j + 1..n {
                acc -= col[i] * x[i];
            }
            x[j] = acc / col[j];
        }
        Ok(DVector::from_vec(x))
    }
}

/// Factorizes a symmetric positive-definite matrix with the sequential
/// reference algorithm. Only the lower triangle of `m` is read.
pub fn cholesky_factorize(m: &DMatrix<f64>) -> Result<Factor, LinalgError> {
    factorize_blocked(m, CHOLESKY_BLOCK, false)
}

pub fn cholesky_solve(factor: &Factor, rhs: &DVector<f64>) -> Result<DVector<f64>, LinalgError> {
    factor.solve(rhs)
}

pub(crate) fn factorize_blocked(
    m: &DMatrix<f64>,
    block: usize,
    parallel: bool,
) -> Result<Factor, LinalgError> {
    let start = Instant::now();
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(LinalgError::NotSquare { rows, cols });
    }
    let n = rows;
    let mut buf = m.as_slice().to_vec();
    factor_in_place(&mut buf, n, block.max(1), parallel)
        .map_err(|pivot| LinalgError::NotPositiveDefinite { pivot })?;
    for j in 1..n {
        buf[j * n..j * n + j].fill(0.0);
    }
    Ok(Factor {
        l: DMatrix::from_vec(n, n, buf),
        elapsed: start.elapsed(),
    })
}

/// Right-looking blocked Cholesky on a column-major buffer. Each panel is
/// factored left-looking column by column, then the trailing lower triangle
/// is updated with one GEMM per column block. Returns the failing pivot.
fn factor_in_place(a: &mut [f64], n: usize, nb: usize, parallel: bool) -> Result<(), usize> {
    let mut k = 0;
    while k < n {
        let kend = (k + nb).min(n);
        for c in k..kend {
            for p in k..c {
                let lcp = a[p * n + c];
                if lcp != 0.0 {
                    let (left, right) = a.split_at_mut(c * n);
                    axpy(-lcp, &left[p * n + c..p * n + n], &mut right[c..n]);
                }
            }
            let d = a[c * n + c];
            if !(d > 0.0 && d.is_finite()) {
                return Err(c);
            }
            let diag = d.sqrt();
            a[c * n + c] = diag;
            let inv = 1.0 / diag;
            for x in &mut a[c * n + c + 1..(c + 1) * n] {
                *x *= inv;
            }
        }
        if kend < n {
            trailing_update(a, n, k, kend, nb, parallel);
        }
        k = kend;
    }
    Ok(())
}

/// `A[j0.., j0..j1] -= L[j0.., k..kend] · L[j0..j1, k..kend]ᵀ` for every
/// column block `[j0, j1)` of the trailing matrix.
fn trailing_update(a: &mut [f64], n: usize, k: usize, kend: usize, nb: usize, parallel: bool) {
    let (left, right) = a.split_at_mut(kend * n);
    let panel: &[f64] = left;
    let width = kend - k;
    let update = |(blk, cols): (usize, &mut [f64])| {
        let j0 = kend + blk * nb;
        let ncols = cols.len() / n;
        let lhs = ColMajor {
            data: panel,
            offset: k * n + j0,
            ld: n,
            rows: n - j0,
            cols: width,
        };
        let rhs_t: Vec<f64> = {
            // L[j0..j0+ncols, k..kend]ᵀ packed as width x ncols
            let mut t = vec![0.0; width * ncols];
            for jj in 0..ncols {
                for p in 0..width {
                    t[jj * width + p] = panel[(k + p) * n + j0 + jj];
                }
            }
            t
        };
        let rhs = ColMajor {
            data: &rhs_t,
            offset: 0,
            ld: width,
            rows: width,
            cols: ncols,
        };
        gemm(-1.0, lhs, false, rhs, 1.0, cols, j0, n);
    };
    run_chunks(right, n * nb, parallel, update);
}

/// Applies `f` to each `chunk`-sized piece of `data`, in parallel when
/// requested and available. The partition never depends on the thread count.
pub(crate) fn run_chunks<F>(data: &mut [f64], chunk: usize, parallel: bool, f: F)
where
    F: Fn((usize, &mut [f64])) + Send + Sync,
{
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        data.par_chunks_mut(chunk).enumerate().for_each(f);
        return;
    }
    let _ = parallel;
    data.chunks_mut(chunk).enumerate().for_each(f);
}
