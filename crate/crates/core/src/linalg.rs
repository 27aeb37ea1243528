//! Dense row-major matrices and the few vector kernels the integrators need.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Result};
use crate::scalar::Scalar;

/// Row-major dense matrix. Used both for weights and for stacked states (row i = sample i).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn new(rows: usize, cols: usize, data: Vec<S>) -> Result<Self> {
        if data.len() != rows * cols {
            return dim_err(format!("{} values for a {rows}x{cols} matrix", data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<S>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return dim_err("ragged rows");
        }
        Ok(Self { rows: rows.len(), cols, data: rows.concat() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [S] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    /// Frobenius norm.
    pub fn norm(&self) -> S {
        norm(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `self * x` for a vector `x`.
    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        let mut y = vec![S::zero(); self.rows];
        gemv(&self.data, self.rows, self.cols, x, &mut y);
        y
    }

    pub fn max_abs_diff(&self, other: &Self) -> S {
        self.data
            .iter()
            .zip(&other.data)
            .fold(S::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn cast<T: Scalar>(&self) -> Mat<T> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| T::c(v.as_f64())).collect(),
        }
    }
}

pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |s, (x, y)| s + *x * *y)
}

pub fn norm<S: Scalar>(a: &[S]) -> S {
    dot(a, a).sqrt()
}

pub fn dist_sq<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |s, (x, y)| {
        let d = *x - *y;
        s + d * d
    })
}

/// `y = A x` with `A` row-major `rows x cols`.
pub fn gemv<S: Scalar>(a: &[S], rows: usize, cols: usize, x: &[S], y: &mut [S]) {
    for (r, yr) in y.iter_mut().enumerate().take(rows) {
        *yr = dot(&a[r * cols..(r + 1) * cols], x);
    }
}

/// `y += A^T x` with `A` row-major `rows x cols`.
pub fn gemv_t_acc<S: Scalar>(a: &[S], rows: usize, cols: usize, x: &[S], y: &mut [S]) {
    for r in 0..rows {
        let xr = x[r];
        if xr == S::zero() {
            continue;
        }
        for (yc, ac) in y.iter_mut().zip(&a[r * cols..(r + 1) * cols]) {
            *yc = *yc + *ac * xr;
        }
    }
}

/// `G += s * a b^T` with `G` row-major `a.len() x b.len()`.
pub fn outer_acc<S: Scalar>(g: &mut [S], a: &[S], b: &[S], s: S) {
    let cols = b.len();
    for (r, ar) in a.iter().enumerate() {
        let f = *ar * s;
        if f == S::zero() {
            continue;
        }
        for (gc, bc) in g[r * cols..(r + 1) * cols].iter_mut().zip(b) {
            *gc = *gc + f * *bc;
        }
    }
}

/// Composite trapezoid weights for `n + 1` equispaced samples with spacing `h`.
pub fn trapezoid_weights<S: Scalar>(n: usize, h: S) -> Vec<S> {
    let mut w = vec![h; n + 1];
    if n == 0 {
        w[0] = S::zero();
        return w;
    }
    let half = h / S::c(2.0);
    w[0] = half;
    w[n] = half;
    w
}
