//! Dense real matrices and the elementary orthogonal transforms.
//!
//! Reflectors `I - 2 z zᵀ / zᵀz` and plane rotators acting in the `(0, j)`
//! coordinate plane are always applied through inner products and rank-one
//! updates; the transform itself is never formed.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::eye(n, n)
    }

    /// `rows x cols` matrix with ones on the main diagonal, i.e. `[I; 0]`
    /// when `rows > cols`.
    pub fn eye(rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows.min(cols) {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from row slices. Panics if the rows are ragged.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), ncols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: nrows,
            cols: ncols,
            data,
        }
    }

    pub fn column_vector(v: &[f64]) -> Self {
        Matrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
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

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[f64]) {
        debug_assert_eq!(v.len(), self.rows);
        for (i, &x) in v.iter().enumerate() {
            self[(i, j)] = x;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)])
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Copy of the block starting at `(r0, c0)` with the given shape.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Copy with the first row and column removed.
    pub fn trailing(&self) -> Matrix {
        self.block(1, 1, self.rows - 1, self.cols - 1)
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = rhs.row(k);
                let dst = out.row_mut(i);
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec shape mismatch");
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `xᵀ M` as a vector.
    pub fn vecmat(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, x.len(), "vecmat shape mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, &xi) in x.iter().enumerate() {
            axpy(xi, self.row(i), &mut out);
        }
        out
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape());
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.shape(), rhs.shape());
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, &x| m.max(x.abs()))
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// `‖MᵀM − I‖∞` measured entrywise.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = self.transpose().matmul(self);
        g.sub(&Matrix::identity(self.cols)).max_abs()
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for x in self.row(i) {
                write!(f, "{x:>12.5e} ")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    // Scaled to survive the enormous column norms the u-variables reach.
    let scale = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * a.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// Householder vector scaling convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Unnormalized `u = x − σ‖x‖e₁`.
    U,
    /// Unit vector `v = u / ‖u‖`.
    V,
    /// `w = v / (e₁ᵀv)`, first entry exactly one.
    W,
}

/// Which side a transform acts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    /// Left multiplication by the transpose.
    LeftT,
    Right,
}

/// Textbook Householder vector for `x`: `σ = −1` when `x₀ ≥ 0`, else `+1`,
/// and `u = x − σ‖x‖e₁`, so the reflector sends `x` to `σ‖x‖e₁`.
pub fn householder_vector_from(x: &[f64]) -> Result<(Vec<f64>, f64)> {
    let nx = norm2(x);
    if x.is_empty() || nx == 0.0 {
        return Err(Error::ZeroColumn { column: 0 });
    }
    let sigma = if x[0] >= 0.0 { -1.0 } else { 1.0 };
    let mut u = x.to_vec();
    u[0] -= sigma * nx;
    Ok((u, sigma))
}

fn check_reflector(z: &[f64], variant: Variant, dim: usize) -> Result<()> {
    if z.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: z.len(),
        });
    }
    match variant {
        Variant::W if z[0] != 1.0 => Err(Error::InvalidConfig(format!(
            "w-vector must have leading entry 1, found {}",
            z[0]
        ))),
        Variant::V if (norm2(z) - 1.0).abs() > 1e-8 => Err(Error::InvalidConfig(format!(
            "v-vector must have unit norm, found {}",
            norm2(z)
        ))),
        _ => Ok(()),
    }
}

/// `P M` with `P = I − 2 z zᵀ / zᵀz`, in place.
pub fn reflect_rows(z: &[f64], m: &mut Matrix) {
    debug_assert_eq!(z.len(), m.rows());
    let zz = dot(z, z);
    if zz == 0.0 {
        return;
    }
    // zᵀM, then M -= (2/zᵀz) z (zᵀM)
    let zt_m = m.vecmat(z);
    let f = 2.0 / zz;
    for (i, &zi) in z.iter().enumerate() {
        if zi != 0.0 {
            axpy(-f * zi, &zt_m, m.row_mut(i));
        }
    }
}

/// `M P` with `P = I − 2 z zᵀ / zᵀz`, in place.
pub fn reflect_cols(z: &[f64], m: &mut Matrix) {
    debug_assert_eq!(z.len(), m.cols());
    let zz = dot(z, z);
    if zz == 0.0 {
        return;
    }
    let f = 2.0 / zz;
    for i in 0..m.rows() {
        let row = m.row_mut(i);
        let mz = dot(row, z);
        axpy(-f * mz, z, row);
    }
}

/// Applies the reflector built from `z` to `m` from the given side.
pub fn apply_reflector(z: &[f64], variant: Variant, m: &Matrix, side: Side) -> Result<Matrix> {
    let mut out = m.clone();
    match side {
        Side::Left | Side::LeftT => {
            check_reflector(z, variant, m.rows())?;
            reflect_rows(z, &mut out);
        }
        Side::Right => {
            check_reflector(z, variant, m.cols())?;
            reflect_cols(z, &mut out);
        }
    }
    Ok(out)
}

/// Rotates rows `0` and `j` of `m` by the plane rotator with entries
/// `[[c, −s], [s, c]]` (or its transpose when `transpose` is set).
pub fn rotate_rows(c: f64, s: f64, j: usize, m: &mut Matrix, transpose: bool) {
    let s = if transpose { -s } else { s };
    for col in 0..m.cols() {
        let a = m[(0, col)];
        let b = m[(j, col)];
        m[(0, col)] = c * a - s * b;
        m[(j, col)] = s * a + c * b;
    }
}

/// Rotates columns `0` and `j` of `m`, i.e. `M G` (or `M Gᵀ`).
pub fn rotate_cols(c: f64, s: f64, j: usize, m: &mut Matrix, transpose: bool) {
    let s = if transpose { -s } else { s };
    for r in 0..m.rows() {
        let a = m[(r, 0)];
        let b = m[(r, j)];
        m[(r, 0)] = c * a + s * b;
        m[(r, j)] = -s * a + c * b;
    }
}

/// `G x` (or `Gᵀ x`) for a vector, touching entries `0` and `j` only.
#[inline]
pub fn rotate_vec(c: f64, s: f64, j: usize, x: &mut [f64], transpose: bool) {
    let s = if transpose { -s } else { s };
    let a = x[0];
    let b = x[j];
    x[0] = c * a - s * b;
    x[j] = s * a + c * b;
}

/// Applies the plane rotation by `theta` in coordinates `(0, j)`.
pub fn apply_rotator(theta: f64, j: usize, m: &Matrix, side: Side) -> Result<Matrix> {
    let dim = match side {
        Side::Left | Side::LeftT => m.rows(),
        Side::Right => m.cols(),
    };
    if j == 0 || j >= dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: j + 1,
        });
    }
    let (s, c) = theta.sin_cos();
    let mut out = m.clone();
    match side {
        Side::Left => rotate_rows(c, s, j, &mut out, false),
        Side::LeftT => rotate_rows(c, s, j, &mut out, true),
        Side::Right => rotate_cols(c, s, j, &mut out, false),
    }
    Ok(out)
}

/// Orthonormalizes the columns of `m` in order with modified Gram–Schmidt.
pub fn mgs_orthonormalize(m: &Matrix) -> Result<Matrix> {
    let (n, p) = m.shape();
    if p > n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: p,
        });
    }
    let floor = 1e-14 * m.max_abs();
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(p);
    for k in 0..p {
        let mut v = m.column(k);
        for qj in &q {
            let r = dot(qj, &v);
            axpy(-r, qj, &mut v);
        }
        let nv = norm2(&v);
        if !(nv > floor) {
            return Err(Error::RankDeficient { column: k });
        }
        v.iter_mut().for_each(|x| *x /= nv);
        q.push(v);
    }
    let mut out = Matrix::zeros(n, p);
    for (k, v) in q.iter().enumerate() {
        out.set_column(k, v);
    }
    Ok(out)
}
