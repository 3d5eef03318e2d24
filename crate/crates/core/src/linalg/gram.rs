use nalgebra::{DMatrix, DVector};

use super::cholesky::run_chunks;
use super::kernels::{gemm, ColMajor};

/// Rows of `J` handled per GEMM call.
pub const GRAM_ROW_CHUNK: usize = 128;
/// Columns of the output produced per task.
pub const GRAM_COLUMN_BLOCK: usize = 32;

/// `Jᵀ diag(σ) J` with the sequential schedule.
///
/// Accumulation order: for each output column block, row chunks of `J` are
/// visited in ascending order and each chunk contributes one GEMM. Inside a
/// chunk only the columns up to the chunk's last nonzero are touched, so the
/// block lower-triangular Jacobians produced by state elimination cost about
/// a third of a full product. The lower triangle is mirrored into the upper
/// one at the end.
pub fn gram_weighted(j: &DMatrix<f64>, sigma: &DVector<f64>) -> DMatrix<f64> {
    gram_blocked(j, sigma, false)
}

pub(crate) fn gram_blocked(j: &DMatrix<f64>, sigma: &DVector<f64>, parallel: bool) -> DMatrix<f64> {
    let (m, n) = j.shape();
    assert_eq!(sigma.len(), m, "sigma length must equal the row count of J");
    let mut out = vec![0.0; n * n];
    if m == 0 || n == 0 {
        return DMatrix::from_vec(n, n, out);
    }
    let data = j.as_slice();

    // extent[r] = 1 + last nonzero column of row r
    let mut extent = vec![0usize; m];
    for c in 0..n {
        let col = &data[c * m..(c + 1) * m];
        for (r, &x) in col.iter().enumerate() {
            if x != 0.0 {
                extent[r] = c + 1;
            }
        }
    }
    let chunks: Vec<(usize, usize, usize)> = (0..m)
        .step_by(GRAM_ROW_CHUNK)
        .map(|r0| {
            let r1 = (r0 + GRAM_ROW_CHUNK).min(m);
            let width = extent[r0..r1].iter().copied().max().unwrap_or(0);
            (r0, r1, width)
        })
        .filter(|&(_, _, w)| w > 0)
        .collect();

    // σ ∘ J, same layout as J
    let mut scaled = data.to_vec();
    for c in 0..n {
        for (x, s) in scaled[c * m..(c + 1) * m].iter_mut().zip(sigma.iter()) {
            *x *= s;
        }
    }

    let fill = |(blk, cols): (usize, &mut [f64])| {
        let c0 = blk * GRAM_COLUMN_BLOCK;
        let ncols = cols.len() / n;
        for &(r0, r1, width) in &chunks {
            if width <= c0 {
                continue;
            }
            let used = (width - c0).min(ncols);
            // rows c0..width of the output, columns c0..c0+used (lower part)
            let lhs = ColMajor {
                data,
                offset: r0 + c0 * m,
                ld: m,
                rows: r1 - r0,
                cols: width - c0,
            };
            let rhs = ColMajor {
                data: &scaled,
                offset: r0 + c0 * m,
                ld: m,
                rows: r1 - r0,
                cols: used,
            };
            gemm(1.0, lhs, true, rhs, 1.0, cols, c0, n);
        }
    };
    run_chunks(&mut out, n * GRAM_COLUMN_BLOCK, parallel, fill);

    for c in 0..n {
        for r in c + 1..n {
            out[r * n + c] = out[c * n + r];
        }
    }
    DMatrix::from_vec(n, n, out)
}
