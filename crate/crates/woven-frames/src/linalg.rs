//! Minimal dense real linear algebra: vectors, row-major matrices, a cyclic
//! Jacobi symmetric eigensolver, and spectral matrix functions.
//!
//! Everything here works over `f64`. Inputs are validated to be finite once at
//! construction; the eigensolver re-checks because operator arithmetic can
//! overflow on pathological inputs.

use crate::error::{Error, Result};

/// Relative band of symmetry defect that [`sym_eigen`] silently repairs by
/// averaging with the transpose. Larger defects are rejected.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// Jacobi convergence threshold: the off-diagonal Frobenius norm must drop
/// below `JACOBI_TOL * (1 + ||A||_F)`.
pub const JACOBI_TOL: f64 = 1e-12;

/// Hard cap on Jacobi sweeps before giving up.
pub const MAX_JACOBI_SWEEPS: usize = 100;

/// Relative rank threshold factor, see [`rank_tol`].
pub const RANK_TOL_FACTOR: f64 = 1e-12;

/// Rank threshold relative to the largest eigenvalue, so that scaling a
/// family never flips an invertibility or frame verdict.
pub fn rank_tol(lambda_max: f64) -> f64 {
    RANK_TOL_FACTOR * lambda_max.max(1.0)
}

// ---------------------------------------------------------------------------
// Vector
// ---------------------------------------------------------------------------

/// A finite, non-empty vector of 64-bit reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    entries: Vec<f64>,
}

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Dimension("vector must have at least one entry".into()));
        }
        check_finite(&entries)?;
        Ok(Self { entries })
    }

    pub fn zeros(len: usize) -> Self {
        assert!(len >= 1, "vector length must be at least 1");
        Self {
            entries: vec![0.0; len],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot product length mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, factor: f64) -> Vector {
        Vector {
            entries: self.entries.iter().map(|x| x * factor).collect(),
        }
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

fn check_finite(entries: &[f64]) -> Result<()> {
    for (index, &value) in entries.iter().enumerate() {
        if !value.is_finite() {
            return Err(Error::NonFinite { index, value });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Matrix
// ---------------------------------------------------------------------------

/// A dense row-major matrix of 64-bit reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix must have at least one row and column, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "matrix {rows}x{cols} needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        check_finite(&entries)?;
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Dimension("matrix must have at least one row".into()));
        }
        let cols = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!(
                    "row {i} has length {}, expected {cols}",
                    row.len()
                )));
            }
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix must be at least 1x1");
        Self {
            rows,
            cols,
            entries: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
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

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: f64) {
        self.entries[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.set(c, r, self.get(r, c));
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} times {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Matrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out.entries[r * out.cols + c] += a * other.get(k, c);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape mismatch");
        (0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|x| x * factor).collect(),
        }
    }

    /// Largest absolute entry.
    pub fn max_norm(&self) -> f64 {
        self.entries.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest absolute difference between the matrix and its transpose.
    pub fn symmetry_defect(&self) -> f64 {
        assert!(self.is_square(), "symmetry defect needs a square matrix");
        let mut defect: f64 = 0.0;
        for r in 0..self.rows {
            for c in (r + 1)..self.cols {
                defect = defect.max((self.get(r, c) - self.get(c, r)).abs());
            }
        }
        defect
    }
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition
// ---------------------------------------------------------------------------

/// Eigendecomposition of a symmetric matrix: `A = Q diag(lambda) Q^T` with
/// eigenvalues ascending and orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().expect("at least one eigenvalue")
    }

    /// Reconstruct `Q diag(f(lambda)) Q^T`. The result is exactly symmetric:
    /// only the upper triangle is computed and then mirrored.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.eigenvalues.len();
        let q = &self.eigenvectors;
        let mapped: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut sum = 0.0;
                for (k, &fk) in mapped.iter().enumerate() {
                    sum += fk * q.get(i, k) * q.get(j, k);
                }
                out.set(i, j, sum);
                out.set(j, i, sum);
            }
        }
        out
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Inputs within the relative symmetry band [`SYMMETRY_TOL`] are averaged
/// with their transpose before iterating; anything worse is rejected, since
/// the operators built in this crate are symmetric by construction and a
/// large defect signals a caller bug.
pub fn sym_eigen(a: &Matrix) -> Result<SpectralDecomposition> {
    if !a.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    check_finite(a.entries())?;
    let defect = a.symmetry_defect();
    let tolerance = SYMMETRY_TOL * (1.0 + a.max_norm());
    if defect > tolerance {
        return Err(Error::Asymmetric { defect, tolerance });
    }

    let n = a.rows();
    let mut work = Matrix::zeros(n, n);
    for r in 0..n {
        for c in 0..n {
            work.set(r, c, 0.5 * (a.get(r, c) + a.get(c, r)));
        }
    }

    let threshold = JACOBI_TOL * (1.0 + work.frobenius_norm());
    let mut q = Matrix::identity(n);

    let mut converged = false;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if off_diagonal_frobenius(&work) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for r in (p + 1)..n {
                rotate(&mut work, &mut q, p, r);
            }
        }
    }
    if !converged && off_diagonal_frobenius(&work) > threshold {
        return Err(Error::NoConvergence(MAX_JACOBI_SWEEPS));
    }

    // Sort ascending, carrying eigenvector columns along.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| work.get(i, i).total_cmp(&work.get(j, j)));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| work.get(i, i)).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors.set(row, new_col, q.get(row, old_col));
        }
    }

    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn off_diagonal_frobenius(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut sum = 0.0;
    for p in 0..n {
        for r in (p + 1)..n {
            let x = a.get(p, r);
            sum += 2.0 * x * x;
        }
    }
    sum.sqrt()
}

/// One Jacobi rotation annihilating the (p, r) entry of `a`, accumulating
/// the rotation into the columns of `q`.
fn rotate(a: &mut Matrix, q: &mut Matrix, p: usize, r: usize) {
    let apr = a.get(p, r);
    if apr == 0.0 {
        return;
    }
    let theta = (a.get(r, r) - a.get(p, p)) / (2.0 * apr);
    let t = if theta == 0.0 {
        1.0
    } else {
        let sign = if theta < 0.0 { -1.0 } else { 1.0 };
        sign / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    let n = a.rows();
    let app = a.get(p, p);
    let arr = a.get(r, r);
    a.set(p, p, app - t * apr);
    a.set(r, r, arr + t * apr);
    a.set(p, r, 0.0);
    a.set(r, p, 0.0);

    for k in 0..n {
        if k == p || k == r {
            continue;
        }
        let akp = a.get(k, p);
        let akr = a.get(k, r);
        let new_kp = akp - s * (akr + tau * akp);
        let new_kr = akr + s * (akp - tau * akr);
        a.set(k, p, new_kp);
        a.set(p, k, new_kp);
        a.set(k, r, new_kr);
        a.set(r, k, new_kr);
    }
    for k in 0..n {
        let qkp = q.get(k, p);
        let qkr = q.get(k, r);
        q.set(k, p, qkp - s * (qkr + tau * qkp));
        q.set(k, r, qkr + s * (qkp - tau * qkr));
    }
}

// ---------------------------------------------------------------------------
// Spectral functions and operator norms
// ---------------------------------------------------------------------------

/// Scalar functions applied through the eigendecomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralFn {
    Inverse,
    InvSqrt,
}

/// Apply `Q diag(f(lambda)) Q^T` for a positive definite symmetric matrix.
///
/// Requires `lambda_min > rank_tol(lambda_max)`; below that the matrix is
/// treated as singular and the smallest eigenvalue is reported back.
pub fn spectral_apply(a: &Matrix, f: SpectralFn) -> Result<Matrix> {
    let decomposition = sym_eigen(a)?;
    spectral_apply_decomposed(&decomposition, f)
}

/// Same as [`spectral_apply`] when the decomposition is already at hand.
pub fn spectral_apply_decomposed(
    decomposition: &SpectralDecomposition,
    f: SpectralFn,
) -> Result<Matrix> {
    let lambda_min = decomposition.lambda_min();
    if lambda_min <= rank_tol(decomposition.lambda_max()) {
        return Err(Error::Singular { lambda_min });
    }
    Ok(match f {
        SpectralFn::Inverse => decomposition.map_eigenvalues(|l| 1.0 / l),
        SpectralFn::InvSqrt => decomposition.map_eigenvalues(|l| 1.0 / l.sqrt()),
    })
}

/// Extreme singular values of a square matrix, as `(sigma_min, sigma_max)`.
pub(crate) fn singular_extremes(e: &Matrix) -> Result<(f64, f64)> {
    if !e.is_square() {
        return Err(Error::Dimension(format!(
            "operator norms need a square matrix, got {}x{}",
            e.rows(),
            e.cols()
        )));
    }
    let gram = e.transpose().matmul(e);
    let decomposition = sym_eigen(&gram)?;
    let sigma_min = decomposition.lambda_min().max(0.0).sqrt();
    let sigma_max = decomposition.lambda_max().max(0.0).sqrt();
    Ok((sigma_min, sigma_max))
}

/// Operator norm and, when the matrix is invertible, the norm of its inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorNorms {
    /// Largest singular value.
    pub norm: f64,
    /// `1 / sigma_min`, absent when the matrix is numerically singular.
    pub inv_norm: Option<f64>,
}

pub fn operator_norms(e: &Matrix) -> Result<OperatorNorms> {
    let (sigma_min, sigma_max) = singular_extremes(e)?;
    // The rank test lives on the eigenvalue scale of E^T E.
    let inv_norm = if sigma_min * sigma_min > rank_tol(sigma_max * sigma_max) {
        Some(1.0 / sigma_min)
    } else {
        None
    };
    Ok(OperatorNorms {
        norm: sigma_max,
        inv_norm,
    })
}
