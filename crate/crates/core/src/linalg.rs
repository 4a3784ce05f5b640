//! Dense row-major containers and the handful of BLAS-1/2 style kernels the
//! models need.
//!
//! Every operation returns a fresh value; nothing mutates its inputs. Shape
//! errors carry both operand shapes so a failure in a long pipeline can be
//! traced back to the call that produced it.

use std::fmt;
use std::ops::{Deref, Index};

use crate::error::{Error, Result};

/// A non-empty column vector of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::InvalidShape("vector must have length >= 1".into()));
        }
        Ok(Vector { data })
    }

    /// # Panics
    /// If `len == 0`.
    pub fn zeros(len: usize) -> Self {
        assert!(len > 0, "vector must have length >= 1");
        Vector {
            data: vec![0.0; len],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Builds a vector from a non-empty iterator.
    pub fn try_from_iter(iter: impl IntoIterator<Item = f64>) -> Result<Self> {
        Vector::new(iter.into_iter().collect())
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Vector {
        Vector {
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl Deref for Vector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.data
    }
}

impl<const N: usize> From<[f64; N]> for Vector {
    fn from(data: [f64; N]) -> Self {
        const { assert!(N > 0, "vector must have length >= 1") };
        Vector {
            data: data.to_vec(),
        }
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(data: Vec<f64>) -> Result<Self> {
        Vector::new(data)
    }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidShape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::InvalidShape(format!(
                    "row {i} has {} entries, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Matrix::new(rows.len(), cols, data)
    }

    /// # Panics
    /// If either dimension is zero.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::new(rows, cols, vec![0.0; rows * cols]).expect("non-empty shape")
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
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

    pub fn column(&self, j: usize) -> Vector {
        Vector {
            data: (0..self.rows).map(|i| self[(i, j)]).collect(),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self[(i, j)]);
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Rows gathered in the order given by `order`.
    pub fn select_rows(&self, order: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(order.len() * self.cols);
        for &i in order {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: order.len(),
            cols: self.cols,
            data,
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.rows, self.cols)
    }
}

fn check_len(op: &'static str, x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::mismatch(
            op,
            format!("len {}", x.len()),
            format!("len {}", y.len()),
        ));
    }
    Ok(())
}

/// `A v`.
pub fn matvec(a: &Matrix, v: &Vector) -> Result<Vector> {
    if a.cols != v.len() {
        return Err(Error::mismatch("matvec", a, format!("vector of len {}", v.len())));
    }
    let data = (0..a.rows)
        .map(|i| a.row(i).iter().zip(v.iter()).map(|(x, y)| x * y).sum())
        .collect();
    Ok(Vector { data })
}

/// `Aᵀ v` without materializing the transpose.
pub fn transpose_matvec(a: &Matrix, v: &Vector) -> Result<Vector> {
    if a.rows != v.len() {
        return Err(Error::mismatch(
            "transpose_matvec",
            a,
            format!("vector of len {}", v.len()),
        ));
    }
    let mut out = vec![0.0; a.cols];
    for (i, &vi) in v.iter().enumerate() {
        for (o, &aij) in out.iter_mut().zip(a.row(i)) {
            *o += aij * vi;
        }
    }
    Ok(Vector { data: out })
}

/// `A B`.
pub fn matmul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols != b.rows {
        return Err(Error::mismatch("matmul", a, b));
    }
    let mut data = vec![0.0; a.rows * b.cols];
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = a[(i, k)];
            for j in 0..b.cols {
                data[i * b.cols + j] += aik * b[(k, j)];
            }
        }
    }
    Matrix::new(a.rows, b.cols, data)
}

pub fn dot(x: &Vector, y: &Vector) -> Result<f64> {
    check_len("dot", x, y)?;
    Ok(x.iter().zip(y.iter()).map(|(a, b)| a * b).sum())
}

/// `alpha x + y`.
pub fn axpy(alpha: f64, x: &Vector, y: &Vector) -> Result<Vector> {
    check_len("axpy", x, y)?;
    Ok(Vector {
        data: x.iter().zip(y.iter()).map(|(a, b)| alpha * a + b).collect(),
    })
}

pub fn scale(alpha: f64, x: &Vector) -> Vector {
    x.map(|v| alpha * v)
}

pub fn add(x: &Vector, y: &Vector) -> Result<Vector> {
    axpy(1.0, x, y)
}

/// `x - y`.
pub fn sub(x: &Vector, y: &Vector) -> Result<Vector> {
    check_len("sub", x, y)?;
    Ok(Vector {
        data: x.iter().zip(y.iter()).map(|(a, b)| a - b).collect(),
    })
}
