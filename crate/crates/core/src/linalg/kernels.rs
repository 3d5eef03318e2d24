//! Thin safe wrappers around the packed GEMM micro-kernels.

/// Column-major matrix view over a slice: element `(i, j)` lives at
/// `data[offset + i + j * ld]`.
#[derive(Clone, Copy)]
pub(crate) struct ColMajor<'a> {
    pub data: &'a [f64],
    pub offset: usize,
    pub ld: usize,
    pub rows: usize,
    pub cols: usize,
}

impl ColMajor<'_> {
    fn check(&self) {
        if self.rows > 0 && self.cols > 0 {
            let last = self.offset + (self.rows - 1) + (self.cols - 1) * self.ld;
            assert!(last < self.data.len(), "view out of bounds");
            assert!(self.rows <= self.ld, "leading dimension too small");
        }
    }
}

/// `c[.., ..] = beta * c + alpha * op(a) * b`, where `op(a)` is `a` or `aᵀ`.
///
/// `c` is a column-major block of `m x n` starting at `c_offset` with leading
/// dimension `ldc`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    alpha: f64,
    a: ColMajor<'_>,
    transpose_a: bool,
    b: ColMajor<'_>,
    beta: f64,
    c: &mut [f64],
    c_offset: usize,
    ldc: usize,
) {
    a.check();
    b.check();
    let (m, k) = if transpose_a {
        (a.cols, a.rows)
    } else {
        (a.rows, a.cols)
    };
    assert_eq!(k, b.rows, "inner dimensions differ");
    let n = b.cols;
    if m == 0 || n == 0 {
        return;
    }
    let last = c_offset + (m - 1) + (n - 1) * ldc;
    assert!(last < c.len() && m <= ldc, "output view out of bounds");
    if k == 0 {
        for j in 0..n {
            for x in &mut c[c_offset + j * ldc..c_offset + j * ldc + m] {
                *x *= beta;
            }
        }
        return;
    }
    let (rsa, csa) = if transpose_a {
        (a.ld as isize, 1)
    } else {
        (1, a.ld as isize)
    };
    // SAFETY: every index touched by the kernel lies inside the views, which
    // were bounds-checked above; `c` is uniquely borrowed.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr().add(a.offset),
            rsa,
            csa,
            b.data.as_ptr().add(b.offset),
            1,
            b.ld as isize,
            beta,
            c.as_mut_ptr().add(c_offset),
            1,
            ldc as isize,
        );
    }
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
