//! Dense real linear algebra: the small substrate every solver, certificate
//! and oracle in this crate is built on.
//!
//! Storage is row-major `Vec<f64>`. Public constructors reject non-finite
//! entries; arithmetic operators panic on shape mismatch (the same contract
//! as `ndarray`), while the checked operations below return [`LinalgError`].

use std::fmt;
use std::ops::{Add, Deref, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite entry at flat index {0}")]
    NonFinite(usize),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: max |S - S^T| = {asymmetry:e} exceeds {allowed:e}")]
    Asymmetric { asymmetry: f64, allowed: f64 },
    #[error("matrix is not positive definite: pivot {index} = {value:e}")]
    NotPositiveDefinite { index: usize, value: f64 },
    #[error("matrix is singular: pivot {index} = {value:e}")]
    Singular { index: usize, value: f64 },
}

fn check_finite(data: &[f64]) -> Result<(), LinalgError> {
    match data.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(LinalgError::NonFinite(i)),
        None => Ok(()),
    }
}

/// A dense real vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(data: Vec<f64>) -> Result<Self, LinalgError> {
        check_finite(&data)?;
        Ok(Vector(data))
    }

    pub(crate) fn from_raw(data: Vec<f64>) -> Self {
        Vector(data)
    }

    pub fn zeros(dim: usize) -> Self {
        Vector(vec![0.0; dim])
    }

    pub fn filled(dim: usize, value: f64) -> Self {
        assert!(value.is_finite());
        Vector(vec![value; dim])
    }

    /// Concatenate slices into one vector.
    pub fn concat(parts: &[&[f64]]) -> Self {
        Vector(parts.iter().flat_map(|p| p.iter().copied()).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scale(&self, a: f64) -> Vector {
        Vector(self.0.iter().map(|x| a * x).collect())
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Vector) {
        assert_eq!(self.dim(), x.dim(), "axpy dimension mismatch");
        for (s, xi) in self.0.iter_mut().zip(&x.0) {
            *s += a * xi;
        }
    }

    /// `a * x + b * y`
    pub fn lincomb(a: f64, x: &Vector, b: f64, y: &Vector) -> Vector {
        assert_eq!(x.dim(), y.dim(), "lincomb dimension mismatch");
        Vector(x.0.iter().zip(&y.0).map(|(xi, yi)| a * xi + b * yi).collect())
    }

    pub fn max_abs_diff(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = LinalgError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Vector::new(v)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl<'a> Add<&'a Vector> for &'a Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        Vector::lincomb(1.0, self, 1.0, rhs)
    }
}

impl<'a> Sub<&'a Vector> for &'a Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        Vector::lincomb(1.0, self, -1.0, rhs)
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        self.scale(-1.0)
    }
}

impl Mul<&Vector> for f64 {
    type Output = Vector;
    fn mul(self, rhs: &Vector) -> Vector {
        rhs.scale(self)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot dimension mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A dense real matrix in row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::DimensionMismatch(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        check_finite(&data)?;
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
            return Err(LinalgError::DimensionMismatch(format!(
                "row {bad} has {} entries, expected {cols}",
                rows[bad].len()
            )));
        }
        Matrix::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scalar(n, 1.0)
    }

    /// `a * I_n`
    pub fn scalar(n: usize, a: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = a;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = *d;
        }
        m
    }

    /// Block-diagonal assembly.
    pub fn block_diag(blocks: &[&Matrix]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            m.set_block(r0, c0, b);
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub(crate) fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Overwrite the block starting at `(r0, c0)` with `block`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Matrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols, "block out of range");
        for i in 0..block.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + block.cols].copy_from_slice(block.row(i));
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        let mut b = Matrix::zeros(rows, cols);
        for i in 0..rows {
            let src = (r0 + i) * self.cols + c0;
            b.data[i * cols..(i + 1) * cols].copy_from_slice(&self.data[src..src + cols]);
        }
        b
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, o) in dst.iter_mut().zip(orow) {
                    *d += a * o;
                }
            }
        }
        out
    }

    /// `A x`
    pub fn matvec(&self, x: &[f64]) -> Vector {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        Vector((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `Aᵀ y`
    pub fn tr_matvec(&self, y: &[f64]) -> Vector {
        assert_eq!(self.rows, y.len(), "tr_matvec dimension mismatch");
        let mut out = vec![0.0; self.cols];
        for (i, yi) in y.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * yi;
            }
        }
        Vector(out)
    }

    /// `Aᵀ A`, computed so that the result is exactly symmetric.
    pub fn gram(&self) -> Matrix {
        let n = self.cols;
        let mut g = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let s: f64 = (0..self.rows).map(|k| self.get(k, i) * self.get(k, j)).sum();
                g.data[i * n + j] = s;
                g.data[j * n + i] = s;
            }
        }
        g
    }

    pub fn scale(&self, a: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| a * x).collect() }
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert!(self.rows == other.rows && self.cols == other.cols, "elementwise dimension mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        self.zip_with(other, |a, b| a - b).max_abs()
    }

    /// `‖S − Sᵀ‖_max`; panics on non-square input.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let n = self.rows;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }

    /// `(S + Sᵀ) / 2`
    pub fn symmetrize(&self) -> Matrix {
        self.zip_with(&self.transpose(), |a, b| 0.5 * (a + b))
    }

    /// Returns `Some(κ)` when the matrix equals `κ I` to within `tol·(1+κ)`.
    pub fn as_scalar_identity(&self, tol: f64) -> Option<f64> {
        if !self.is_square() || self.rows == 0 {
            return None;
        }
        let n = self.rows;
        let kappa = (0..n).map(|i| self.get(i, i)).sum::<f64>() / n as f64;
        let allowed = tol * (1.0 + kappa.abs());
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { kappa } else { 0.0 };
                if (self.get(i, j) - target).abs() > allowed {
                    return None;
                }
            }
        }
        Some(kappa)
    }
}

impl<'a> Add<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn add(self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl<'a> Sub<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn sub(self, rhs: &Matrix) -> Matrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<'a> Mul<&'a Matrix> for &'a Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| format!("{x:>12.6e}")).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl Serialize for Matrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        Matrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Outcome of a Cholesky-based positive-definiteness test.
#[derive(Clone, Debug, PartialEq)]
pub enum PdCheck {
    PositiveDefinite {
        /// Lower-triangular `L` with `S = L Lᵀ`.
        factor: Matrix,
        min_pivot: f64,
    },
    NotPositiveDefinite {
        index: usize,
        pivot: f64,
    },
}

impl PdCheck {
    pub fn is_pd(&self) -> bool {
        matches!(self, PdCheck::PositiveDefinite { .. })
    }

    /// Smallest pivot seen, or the offending pivot on failure.
    pub fn min_pivot(&self) -> f64 {
        match self {
            PdCheck::PositiveDefinite { min_pivot, .. } => *min_pivot,
            PdCheck::NotPositiveDefinite { pivot, .. } => *pivot,
        }
    }

    pub fn factor(&self) -> Option<&Matrix> {
        match self {
            PdCheck::PositiveDefinite { factor, .. } => Some(factor),
            PdCheck::NotPositiveDefinite { .. } => None,
        }
    }
}

/// Decide positive definiteness of a symmetric matrix from its Cholesky
/// pivots.
///
/// Pivots are the values `S_jj − Σ_k L_jk²` before the square root; all of
/// them must exceed `tol·(1 + max_j S_jj)`. An asymmetry above
/// `tol·(1 + ‖S‖_max)` is reported as [`LinalgError::Asymmetric`], which
/// signals a wrongly assembled matrix rather than a failed condition.
pub fn cholesky_pd_check(s: &Matrix, tol: f64) -> Result<PdCheck, LinalgError> {
    if !s.is_square() {
        return Err(LinalgError::NotSquare { rows: s.rows, cols: s.cols });
    }
    let allowed = tol * (1.0 + s.max_abs());
    let asymmetry = s.asymmetry();
    if asymmetry > allowed {
        return Err(LinalgError::Asymmetric { asymmetry, allowed });
    }
    let n = s.rows;
    let max_diag = (0..n).map(|i| s.get(i, i)).fold(f64::NEG_INFINITY, f64::max);
    let threshold = tol * (1.0 + max_diag.max(0.0));
    let mut l = Matrix::zeros(n, n);
    let mut min_pivot = f64::INFINITY;
    for j in 0..n {
        let pivot = s.get(j, j) - (0..j).map(|k| l.get(j, k).powi(2)).sum::<f64>();
        if pivot <= threshold {
            return Ok(PdCheck::NotPositiveDefinite { index: j, pivot });
        }
        min_pivot = min_pivot.min(pivot);
        let d = pivot.sqrt();
        l.set(j, j, d);
        for i in j + 1..n {
            // lower triangle of S, symmetric by the check above
            let v = s.get(i, j) - (0..j).map(|k| l.get(i, k) * l.get(j, k)).sum::<f64>();
            l.set(i, j, v / d);
        }
    }
    Ok(PdCheck::PositiveDefinite { factor: l, min_pivot })
}

/// Tolerance used by [`solve_spd`] for its positive-definiteness gate.
pub const SPD_TOL: f64 = 1e-12;

fn cholesky_solve(l: &Matrix, rhs: &[f64]) -> Vec<f64> {
    let n = l.rows;
    let mut y = vec![0.0; n];
    for i in 0..n {
        let s = rhs[i] - (0..i).map(|k| l.get(i, k) * y[k]).sum::<f64>();
        y[i] = s / l.get(i, i);
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s = y[i] - (i + 1..n).map(|k| l.get(k, i) * x[k]).sum::<f64>();
        x[i] = s / l.get(i, i);
    }
    x
}

/// Solve `S x = rhs` for symmetric positive definite `S`.
pub fn solve_spd(s: &Matrix, rhs: &Vector) -> Result<Vector, LinalgError> {
    if s.rows != rhs.dim() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{}x{} system with rhs of length {}",
            s.rows,
            s.cols,
            rhs.dim()
        )));
    }
    let check = cholesky_pd_check(s, SPD_TOL)?;
    let l = match check {
        PdCheck::PositiveDefinite { factor, .. } => factor,
        PdCheck::NotPositiveDefinite { index, pivot } => {
            return Err(LinalgError::NotPositiveDefinite { index, value: pivot })
        }
    };
    let mut x = cholesky_solve(&l, rhs);
    // one step of iterative refinement
    let r = rhs - &s.matvec(&x);
    let dx = cholesky_solve(&l, &r);
    for (xi, d) in x.iter_mut().zip(dx) {
        *xi += d;
    }
    Ok(Vector(x))
}

/// LU factorization with partial pivoting, for general square systems.
#[derive(Clone, Debug)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Lu, LinalgError> {
        if !a.is_square() {
            return Err(LinalgError::NotSquare { rows: a.rows, cols: a.cols });
        }
        let n = a.rows;
        let scale = a.max_abs();
        let threshold = 1e-13 * scale.max(f64::MIN_POSITIVE);
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pval) =
                (k..n).map(|i| (i, lu.get(i, k).abs())).fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pval <= threshold {
                return Err(LinalgError::Singular { index: k, value: pval });
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu.get(k, k);
            for i in k + 1..n {
                let f = lu.get(i, k) / pivot;
                lu.set(i, k, f);
                if f != 0.0 {
                    for j in k + 1..n {
                        let v = lu.get(i, j) - f * lu.get(k, j);
                        lu.set(i, j, v);
                    }
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vector {
        let n = self.lu.rows;
        assert_eq!(rhs.len(), n, "LU solve dimension mismatch");
        let mut y: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| self.lu.get(i, k) * y[k]).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.lu.get(i, k) * y[k]).sum();
            y[i] = (y[i] - s) / self.lu.get(i, i);
        }
        Vector(y)
    }

    /// Solve `A X = B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        let n = self.lu.rows;
        assert_eq!(b.rows, n);
        let bt = b.transpose();
        let mut xt = Matrix::zeros(b.cols, n);
        for j in 0..b.cols {
            let col = self.solve(bt.row(j));
            xt.data[j * n..(j + 1) * n].copy_from_slice(&col);
        }
        xt.transpose()
    }
}

/// Solve a general square system by LU with partial pivoting, refining once.
pub fn solve(a: &Matrix, rhs: &Vector) -> Result<Vector, LinalgError> {
    if a.rows != rhs.dim() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{}x{} system with rhs of length {}",
            a.rows,
            a.cols,
            rhs.dim()
        )));
    }
    let lu = Lu::factor(a)?;
    let mut x = lu.solve(rhs);
    let r = rhs - &a.matvec(&x);
    let dx = lu.solve(&r);
    x.axpy(1.0, &dx);
    Ok(x)
}

/// Result of [`spectral_radius_gram`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Estimate `ρ(AᵀA)` by power iteration on `AᵀA`.
///
/// The primary start vector is the normalized all-ones vector. Because that
/// vector can be orthogonal to the dominant eigenvector (the 2×2 matching
/// pennies matrix is one such case), two further deterministic starts are
/// tried, an alternating-sign vector and the unit vector of the heaviest
/// column, and the largest Rayleigh quotient wins.
pub fn spectral_radius_gram(a: &Matrix, tol: f64, max_iter: usize) -> SpectralEstimate {
    let n = a.cols;
    if n == 0 || a.max_abs() == 0.0 {
        return SpectralEstimate { value: 0.0, iterations: 0, converged: true };
    }
    let heaviest = (0..n)
        .map(|j| (j, (0..a.rows).map(|i| a.get(i, j).powi(2)).sum::<f64>()))
        .fold((0, -1.0), |best, c| if c.1 > best.1 { c } else { best })
        .0;
    let mut unit = vec![0.0; n];
    unit[heaviest] = 1.0;
    let starts = [vec![1.0; n], (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect(), unit];
    starts.into_iter().map(|s| power_iteration_gram(a, Vector(s), tol, max_iter)).fold(
        SpectralEstimate { value: 0.0, iterations: 0, converged: false },
        |best, e| {
            if e.value > best.value {
                SpectralEstimate { iterations: best.iterations + e.iterations, ..e }
            } else {
                SpectralEstimate { iterations: best.iterations + e.iterations, ..best }
            }
        },
    )
}

fn power_iteration_gram(a: &Matrix, start: Vector, tol: f64, max_iter: usize) -> SpectralEstimate {
    let mut v = start.scale(1.0 / start.norm());
    let mut lambda = 0.0;
    for it in 1..=max_iter {
        let av = a.matvec(&v);
        let u = a.tr_matvec(&av);
        let next = av.norm_sq();
        let norm = u.norm();
        if norm == 0.0 {
            // start lies in the null space of A
            return SpectralEstimate { value: 0.0, iterations: it, converged: true };
        }
        v = u.scale(1.0 / norm);
        if (next - lambda).abs() <= tol * next {
            // one more Rayleigh quotient at the updated vector
            let value = a.matvec(&v).norm_sq().max(next);
            return SpectralEstimate { value, iterations: it, converged: true };
        }
        lambda = next;
    }
    SpectralEstimate { value: a.matvec(&v).norm_sq().max(lambda), iterations: max_iter, converged: false }
}

/// `vᵀ H v`
pub fn weighted_norm_sq(h: &Matrix, v: &Vector) -> Result<f64, LinalgError> {
    if !h.is_square() || h.rows != v.dim() {
        return Err(LinalgError::DimensionMismatch(format!(
            "{}x{} weight with vector of length {}",
            h.rows,
            h.cols,
            v.dim()
        )));
    }
    Ok(v.dot(&h.matvec(v)))
}
