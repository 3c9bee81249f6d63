//! Dense row-major matrices, small vector kernels and the immutable
//! regression problem container.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Row-major dense matrix with a lazily populated cache of column squared norms.
#[derive(Debug, Clone)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    col_sq_norms: OnceLock<Vec<f64>>,
}

impl PartialEq for DenseMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.data == other.data
    }
}

impl DenseMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Error::check_len("matrix data", rows * cols, data.len())?;
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix data"));
        }
        Ok(Self {
            rows,
            cols,
            data,
            col_sq_norms: OnceLock::new(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            Error::check_len("matrix row", cols, row.len())?;
            data.extend_from_slice(row);
        }
        Self::from_row_major(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_row_major(rows, cols, data)
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let rows = columns.first().map_or(0, Vec::len);
        for c in columns {
            Error::check_len("matrix column", rows, c.len())?;
        }
        Self::from_fn(rows, columns.len(), |i, j| columns[j][i])
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 }).expect("identity is finite")
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// Squared Euclidean norm of every column, computed on first use.
    pub fn col_sq_norms(&self) -> &[f64] {
        self.col_sq_norms.get_or_init(|| {
            let mut norms = vec![0.0; self.cols];
            for row in self.data.chunks_exact(self.cols.max(1)) {
                for (acc, &v) in norms.iter_mut().zip(row) {
                    *acc += v * v;
                }
            }
            norms
        })
    }

    /// Copy of this matrix with column `skip` removed.
    pub fn without_column(&self, skip: usize) -> Result<Self> {
        if skip >= self.cols {
            return Err(Error::invalid(format!("column {skip} out of range for {} columns", self.cols)));
        }
        let cols = self.cols - 1;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend_from_slice(&row[..skip]);
            data.extend_from_slice(&row[skip + 1..]);
        }
        Ok(Self {
            rows: self.rows,
            cols,
            data,
            col_sq_norms: OnceLock::new(),
        })
    }

    /// `A v`.
    pub fn mat_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        Error::check_len("mat_vec operand", self.cols, v.len())?;
        let mut out = vec![0.0; self.rows];
        self.mat_vec_into(v, &mut out);
        Ok(out)
    }

    /// `A^T v`.
    pub fn mat_t_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        Error::check_len("mat_t_vec operand", self.rows, v.len())?;
        let mut out = vec![0.0; self.cols];
        self.mat_t_vec_into(v, &mut out);
        Ok(out)
    }

    pub(crate) fn mat_vec_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (o, row) in out.iter_mut().zip(self.data.chunks_exact(self.cols.max(1))) {
            *o = dot(row, v);
        }
    }

    pub(crate) fn mat_t_vec_into(&self, v: &[f64], out: &mut [f64]) {
        debug_assert_eq!(v.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.fill(0.0);
        for (&vi, row) in v.iter().zip(self.data.chunks_exact(self.cols.max(1))) {
            if vi != 0.0 {
                for (o, &a) in out.iter_mut().zip(row) {
                    *o += a * vi;
                }
            }
        }
    }

    /// `X_{*j}^T v` via a strided read of column `j`.
    #[inline]
    pub(crate) fn col_dot(&self, j: usize, v: &[f64]) -> f64 {
        self.data[j..]
            .iter()
            .step_by(self.cols)
            .zip(v)
            .map(|(a, b)| a * b)
            .sum()
    }

    /// `X v`, skipping zero entries of `v` when it is sparse.
    pub(crate) fn mat_vec_sparse(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        if nnz(v) * 4 > self.cols {
            self.mat_vec_into(v, &mut out);
        } else {
            for (j, &vj) in v.iter().enumerate().filter(|(_, vj)| **vj != 0.0) {
                self.col_axpy(j, vj, &mut out);
            }
        }
        out
    }

    /// `out += alpha * X_{*j}`.
    #[inline]
    pub(crate) fn col_axpy(&self, j: usize, alpha: f64, out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(self.data[j..].iter().step_by(self.cols)) {
            *o += alpha * a;
        }
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn norm1(a: &[f64]) -> f64 {
    a.iter().map(|v| v.abs()).sum()
}

#[inline]
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

pub fn nnz(a: &[f64]) -> usize {
    a.iter().filter(|v| **v != 0.0).count()
}

/// Immutable `(X, y)` pair for the model `y = X theta + noise`.
#[derive(Debug, Clone)]
pub struct Problem {
    x: DenseMatrix,
    y: Vec<f64>,
    sqrt_n: f64,
    smooth_floor: f64,
}

impl Problem {
    /// Validates dimensions and sets the default smoothness floor
    /// `1e-8 * (||y|| / sqrt(n) + 1)`.
    pub fn new(x: DenseMatrix, y: Vec<f64>) -> Result<Self> {
        if x.rows() == 0 || x.cols() == 0 {
            return Err(Error::invalid("design matrix must have n >= 1 and d >= 1"));
        }
        Error::check_len("response", x.rows(), y.len())?;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        let sqrt_n = (x.rows() as f64).sqrt();
        let smooth_floor = 1e-8 * (norm2(&y) / sqrt_n + 1.0);
        Ok(Self {
            x,
            y,
            sqrt_n,
            smooth_floor,
        })
    }

    pub fn with_smooth_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor >= 0.0 && floor.is_finite()) {
            return Err(Error::invalid("smooth floor must be finite and non-negative"));
        }
        self.smooth_floor = floor;
        Ok(self)
    }

    #[inline]
    pub fn x(&self) -> &DenseMatrix {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> &[f64] {
        &self.y
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.rows()
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.x.cols()
    }

    #[inline]
    pub fn sqrt_n(&self) -> f64 {
        self.sqrt_n
    }

    /// Lower bound on `||y - X theta|| / sqrt(n)` below which the square-root
    /// loss is treated as nonsmooth.
    #[inline]
    pub fn smooth_floor(&self) -> f64 {
        self.smooth_floor
    }

    /// `y - X theta`.
    pub fn residual(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.x.mat_vec(theta)?;
        for (ri, yi) in r.iter_mut().zip(&self.y) {
            *ri = yi - *ri;
        }
        Ok(r)
    }
}
