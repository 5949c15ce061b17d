//! Dense real symmetric linear algebra.
//!
//! [`SymMatrix`] stores only the lower triangle, so asymmetric values cannot
//! be represented. [`Matrix`] is a plain row-major dense matrix used for
//! factors, eigenvector bases and intermediate products.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix order must be at least 1")]
    DimensionZero,
    #[error("expected {expected} entries, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("rows are not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix is not positive semidefinite: pivot {pivot:e} at index {index}")]
    NotPsd { index: usize, pivot: f64 },
    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NonConvergence { sweeps: usize },
}

#[inline]
fn packed_index(i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    r * (r + 1) / 2 + c
}

/// Dense real symmetric matrix in packed lower-triangular storage.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SymMatrixRepr", into = "SymMatrixRepr")]
pub struct SymMatrix {
    order: usize,
    lower: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SymMatrixRepr {
    order: usize,
    lower: Vec<f64>,
}

impl TryFrom<SymMatrixRepr> for SymMatrix {
    type Error = LinalgError;

    fn try_from(r: SymMatrixRepr) -> Result<Self, Self::Error> {
        SymMatrix::from_lower(r.order, r.lower)
    }
}

impl From<SymMatrix> for SymMatrixRepr {
    fn from(m: SymMatrix) -> Self {
        SymMatrixRepr { order: m.order, lower: m.lower }
    }
}

impl SymMatrix {
    /// Zero matrix of the given order.
    ///
    /// Panics when `order == 0`; use [`SymMatrix::try_zeros`] for a checked
    /// variant.
    pub fn zeros(order: usize) -> Self {
        Self::try_zeros(order).expect("SymMatrix order must be at least 1")
    }

    pub fn try_zeros(order: usize) -> Result<Self, LinalgError> {
        if order == 0 {
            return Err(LinalgError::DimensionZero);
        }
        Ok(SymMatrix { order, lower: vec![0.0; order * (order + 1) / 2] })
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self, LinalgError> {
        let mut m = Self::try_zeros(diag.len())?;
        for (i, &v) in diag.iter().enumerate() {
            if !v.is_finite() {
                return Err(LinalgError::NonFinite { row: i, col: i });
            }
            m.set(i, i, v);
        }
        Ok(m)
    }

    /// Builds a matrix from the packed lower triangle, row by row:
    /// `(0,0), (1,0), (1,1), (2,0), ...`.
    pub fn from_lower(order: usize, lower: Vec<f64>) -> Result<Self, LinalgError> {
        if order == 0 {
            return Err(LinalgError::DimensionZero);
        }
        let expected = order * (order + 1) / 2;
        if lower.len() != expected {
            return Err(LinalgError::WrongLength { expected, got: lower.len() });
        }
        let m = SymMatrix { order, lower };
        m.check_finite()?;
        Ok(m)
    }

    /// Builds a matrix from full rows, rejecting asymmetric input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let n = rows.len();
        let mut m = Self::try_zeros(n)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(LinalgError::WrongLength { expected: n, got: row.len() });
            }
            for j in 0..=i {
                if rows[j][i] != row[j] {
                    return Err(LinalgError::NotSymmetric { row: i, col: j });
                }
                m.set(i, j, row[j]);
            }
        }
        m.check_finite()?;
        Ok(m)
    }

    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            for j in 0..=i {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Symmetric part `(a + aᵀ)/2` of a square dense matrix.
    pub fn from_dense_sym(a: &Matrix) -> Self {
        assert_eq!(a.rows(), a.cols());
        Self::from_fn(a.rows(), |i, j| 0.5 * (a[(i, j)] + a[(j, i)]))
    }

    fn check_finite(&self) -> Result<(), LinalgError> {
        for i in 0..self.order {
            for j in 0..=i {
                if !self.get(i, j).is_finite() {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[packed_index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.lower[packed_index(i, j)] = v;
    }

    #[inline]
    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        self.lower[packed_index(i, j)] += v;
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn max_abs(&self) -> f64 {
        self.lower.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.frobenius_dot(self).sqrt()
    }

    /// `tr(self · other)`.
    pub fn frobenius_dot(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.order, other.order);
        let mut s = 0.0;
        for i in 0..self.order {
            for j in 0..i {
                s += 2.0 * self.get(i, j) * other.get(i, j);
            }
            s += self.get(i, i) * other.get(i, i);
        }
        s
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymMatrix { order: self.order, lower: self.lower.iter().map(|v| v * s).collect() }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.order, other.order);
        SymMatrix {
            order: self.order,
            lower: self.lower.iter().zip(&other.lower).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        self.add(&other.scaled(-1.0))
    }

    /// Rank-one update `self + c·v·vᵀ`.
    pub fn rank_one_update(&self, c: f64, v: &[f64]) -> Self {
        assert_eq!(v.len(), self.order);
        let mut m = self.clone();
        for i in 0..self.order {
            for j in 0..=i {
                m.add_to(i, j, c * v[i] * v[j]);
            }
        }
        m
    }

    pub fn to_dense(&self) -> Matrix {
        Matrix::from_fn(self.order, self.order, |i, j| self.get(i, j))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.order);
        (0..self.order)
            .map(|i| (0..self.order).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMatrix({})\n{}", self.order, self)
    }
}

/// Plain-text rows, 17 significant digits.
impl fmt::Display for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.order {
            let row: Vec<String> = (0..self.order).map(|j| format!("{:.16e}", self.get(i, j))).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
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

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, data: rows.concat() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * other.cols..(k + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn add_scaled(&mut self, c: f64, other: &Matrix) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|v| *v *= c);
    }

    /// `Σ self_ij · other_ij`, which is `tr(selfᵀ · other)`.
    pub fn dot(&self, other: &Matrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Replaces the matrix by its symmetric part.
    pub fn symmetrize(&mut self) {
        assert_eq!(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..i {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = v;
                self[(j, i)] = v;
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix({}x{})", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Cholesky factorization tolerant of semidefinite input.
///
/// Pivots within `tol · max|a|` of zero are treated as exact zeros and the
/// corresponding column of `L` is left empty; this is accepted only when the
/// remaining column is itself within `sqrt(2·tol)·max|a|` of zero, which is
/// what positive semidefiniteness at that tolerance allows. Any pivot below
/// `−tol · max|a|` yields [`LinalgError::NotPsd`].
pub fn cholesky(a: &SymMatrix, tol: f64) -> Result<Matrix, LinalgError> {
    let n = a.order();
    let scale = a.max_abs();
    let mut l = Matrix::zeros(n, n);
    if scale == 0.0 {
        return Ok(l);
    }
    let thr = tol * scale;
    let col_thr = (2.0 * tol).sqrt() * scale;
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d < -thr {
            return Err(LinalgError::NotPsd { index: j, pivot: d });
        }
        if d <= thr {
            for i in j + 1..n {
                let mut c = a.get(i, j);
                for k in 0..j {
                    c -= l[(i, k)] * l[(j, k)];
                }
                if c.abs() > col_thr {
                    return Err(LinalgError::NotPsd { index: j, pivot: d });
                }
            }
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut c = a.get(i, j);
            for k in 0..j {
                c -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = c / ljj;
        }
    }
    Ok(l)
}

/// Strict Cholesky of a dense symmetric matrix; `None` unless every pivot is
/// positive. Only the lower triangle of `a` is read.
pub fn cholesky_strict(a: &Matrix) -> Option<Matrix> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut c = a[(i, j)];
            for k in 0..j {
                c -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = c / ljj;
        }
    }
    Some(l)
}

/// Solves `L·Lᵀ·x = b` given the lower factor `L`.
pub fn cholesky_solve(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[(i, k)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[(k, i)] * y[k];
        }
        y[i] = s / l[(i, i)];
    }
    y
}

/// Inverse of `L·Lᵀ` from its lower factor.
pub fn cholesky_inverse(l: &Matrix) -> Matrix {
    let n = l.rows();
    let mut inv = Matrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = cholesky_solve(l, &e);
        for i in 0..n {
            inv[(i, j)] = col[i];
        }
    }
    inv.symmetrize();
    inv
}

#[derive(Debug, Clone)]
pub struct Eigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: Matrix,
}

impl Eigen {
    pub fn min_value(&self) -> f64 {
        *self.values.last().expect("order >= 1")
    }
}

pub const DEFAULT_JACOBI_SWEEPS: usize = 100;

/// Cyclic Jacobi eigendecomposition with a sweep budget.
///
/// Stops once the off-diagonal mass is below `tol · ‖a‖_F` (or exactly zero).
pub fn jacobi_eigen(a: &SymMatrix, tol: f64) -> Result<Eigen, LinalgError> {
    jacobi_eigen_with_budget(a, tol, DEFAULT_JACOBI_SWEEPS)
}

pub fn jacobi_eigen_with_budget(a: &SymMatrix, tol: f64, max_sweeps: usize) -> Result<Eigen, LinalgError> {
    let n = a.order();
    let mut m = a.to_dense();
    let mut v = Matrix::identity(n);
    let norm = a.frobenius_norm();
    let target = (tol.max(f64::EPSILON) * norm).powi(2);

    let off = |m: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..i {
                s += 2.0 * m[(i, j)] * m[(i, j)];
            }
        }
        s
    };

    let mut converged = norm == 0.0 || off(&m) <= target;
    let mut sweep = 0;
    while !converged && sweep < max_sweeps {
        sweep += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = m[(p, p)];
                let aqq = m[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                m[(p, q)] = 0.0;
                m[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
        converged = off(&m) <= target;
    }
    if !converged {
        return Err(LinalgError::NonConvergence { sweeps: max_sweeps });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Eigen { values, vectors })
}

/// Smallest eigenvalue; convenient for PSD margins.
pub fn min_eigenvalue(a: &SymMatrix) -> Result<f64, LinalgError> {
    Ok(jacobi_eigen(a, 1e-14)?.min_value())
}

/// Positive semidefiniteness at relative tolerance `tol`.
pub fn is_psd(a: &SymMatrix, tol: f64) -> bool {
    cholesky(a, tol).is_ok()
}
