//! Dense row-major f64 matrices with exactly the operations training needs.
//!
//! Multiplications can fan out over threads (see [`thread_count`]), but
//! each output element is always computed by one thread with the same
//! serial dot-product order, so results are bit-identical at any thread
//! count.

use std::sync::OnceLock;

/// Number of worker threads for large multiplications. Controlled by the
/// MGCVAE_THREADS environment variable: unset or 0 means one thread per
/// available core, any other value is taken literally. Read once.
pub fn thread_count() -> usize {
    static COUNT: OnceLock<usize> = OnceLock::new();
    *COUNT.get_or_init(|| {
        let auto = || {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        };
        match std::env::var("MGCVAE_THREADS") {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(0) | Err(_) => auto(),
                Ok(n) => n,
            },
            Err(_) => auto(),
        }
    })
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Matrix {
        assert_eq!(data.len(), rows * cols, "data length != rows*cols");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// `self · other`.
    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        parallel_rows(self.rows, self.cols, &mut out.data, |i, out_row| {
            // i-k-j order: both the other matrix row and the output row are
            // walked contiguously.
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        });
        out
    }

    /// `self · otherᵀ`.
    pub fn mul_t(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "mul_t shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.rows);
        parallel_rows(self.rows, self.cols, &mut out.data, |i, out_row| {
            let arow = &self.data[i * self.cols..(i + 1) * self.cols];
            for (j, o) in out_row.iter_mut().enumerate() {
                let brow = &other.data[j * other.cols..(j + 1) * other.cols];
                let mut acc = 0.0;
                for (a, b) in arow.iter().zip(brow) {
                    acc += a * b;
                }
                *o = acc;
            }
        });
        out
    }

    /// `selfᵀ · other`.
    pub fn t_mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows, "t_mul shape mismatch");
        let mut out = Matrix::zeros(self.cols, other.cols);
        // Accumulates over the shared row index; output rows are chunked so
        // each thread owns a disjoint slice of k.
        let cols = self.cols;
        parallel_rows(self.cols, self.rows, &mut out.data, |k, out_row| {
            for i in 0..self.rows {
                let a = self.data[i * cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        });
        out
    }

    /// Adds `bias` to every row.
    pub fn add_row_broadcast(&mut self, bias: &[f64]) {
        assert_eq!(bias.len(), self.cols, "bias length mismatch");
        for i in 0..self.rows {
            for (v, b) in self.row_mut(i).iter_mut().zip(bias) {
                *v += b;
            }
        }
    }

    /// Column sums as a vector.
    pub fn col_sum(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            for (o, v) in out.iter_mut().zip(self.row(i)) {
                *o += v;
            }
        }
        out
    }

}

/// Runs `body(i, row_i)` for every output row, splitting rows over threads
/// when the work is large enough to pay for spawning. `inner` is the dot
/// product length, so `data.len() * inner` approximates the multiply-add
/// count.
fn parallel_rows<F>(rows: usize, inner: usize, data: &mut [f64], body: F)
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    if rows == 0 {
        return;
    }
    let cols = data.len() / rows;
    let threads = thread_count().min(rows);
    // Spawning threads costs more than it saves below roughly a million
    // multiply-adds.
    if threads <= 1 || data.len().saturating_mul(inner) < (1 << 20) {
        for (i, row) in data.chunks_mut(cols).enumerate() {
            body(i, row);
        }
        return;
    }
    let chunk_rows = rows.div_ceil(threads);
    std::thread::scope(|scope| {
        for (t, chunk) in data.chunks_mut(chunk_rows * cols).enumerate() {
            let body = &body;
            scope.spawn(move || {
                for (off, row) in chunk.chunks_mut(cols).enumerate() {
                    body(t * chunk_rows + off, row);
                }
            });
        }
    });
}
