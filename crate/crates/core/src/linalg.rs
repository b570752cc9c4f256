//! Small dense linear algebra kernels.
//!
//! The systems in this crate are tiny (ladder networks with ~50 nodes, ridge
//! normal matrices up to ~100x100, Jacobians up to ~41x41), so hand-rolled
//! dense routines keep the dependency surface small and the arithmetic
//! bit-reproducible.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out[(c, r)] = self[(r, c)];
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let out_row = out.row_mut(r);
                for c in 0..other.cols {
                    out_row[c] += a * orow[c];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len(), "matvec dimension mismatch");
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<T> std::ops::Index<(usize, usize)> for Mat<T> {
    type Output = T;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Mat<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix.
///
/// Returns the lower factor L with `A = L * L^T`, or an error if a pivot is
/// non-positive (matrix not SPD within floating point).
pub fn cholesky<T: Real>(a: &Mat<T>) -> Result<Mat<T>> {
    assert_eq!(a.rows(), a.cols(), "cholesky needs a square matrix");
    let n = a.rows();
    let mut l = Mat::zeros(n, n);
    // Pivots that fall below rounding noise of the original diagonal mark a
    // rank-deficient matrix rather than a usable factor.
    let rel_tol = T::epsilon() * T::of_usize(n.max(2));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= rel_tol * a[(i, i)].abs() || !sum.is_finite() {
                    return Err(Error::SingularSystem {
                        context: "cholesky pivot not positive",
                    });
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Solves `A x = b` for SPD `A` via Cholesky.
pub fn cholesky_solve<T: Real>(a: &Mat<T>, b: &[T]) -> Result<Vec<T>> {
    let l = cholesky(a)?;
    Ok(cholesky_substitute(&l, b))
}

/// Solves `A X = B` column-by-column for SPD `A` (B given as a matrix).
pub fn cholesky_solve_multi<T: Real>(a: &Mat<T>, b: &Mat<T>) -> Result<Mat<T>> {
    assert_eq!(a.rows(), b.rows(), "rhs row count mismatch");
    let l = cholesky(a)?;
    let n = a.rows();
    let mut out = Mat::zeros(n, b.cols());
    let mut col = vec![T::zero(); n];
    for c in 0..b.cols() {
        for r in 0..n {
            col[r] = b[(r, c)];
        }
        let x = cholesky_substitute(&l, &col);
        for r in 0..n {
            out[(r, c)] = x[r];
        }
    }
    Ok(out)
}

fn cholesky_substitute<T: Real>(l: &Mat<T>, b: &[T]) -> Vec<T> {
    let n = l.rows();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[(i, k)] * y[k];
        }
        y[i] = sum / l[(i, i)];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[(k, i)] * x[k];
        }
        x[i] = sum / l[(i, i)];
    }
    x
}

/// QR decomposition of a square matrix by Householder reflections.
///
/// Returns `(Q, R)` with `A = Q * R`, Q orthogonal and R upper triangular.
pub fn qr<T: Real>(a: &Mat<T>) -> (Mat<T>, Mat<T>) {
    assert_eq!(a.rows(), a.cols(), "qr implemented for square matrices");
    let n = a.rows();
    let mut r = a.clone();
    let mut q = Mat::identity(n);
    for k in 0..n.saturating_sub(1) {
        // Householder vector for column k below the diagonal.
        let mut norm = T::zero();
        for i in k..n {
            norm += r[(i, k)] * r[(i, k)];
        }
        let norm = norm.sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if r[(k, k)] >= T::zero() { -norm } else { norm };
        let mut v = vec![T::zero(); n];
        v[k] = r[(k, k)] - alpha;
        for i in k + 1..n {
            v[i] = r[(i, k)];
        }
        let vtv = v[k..].iter().fold(T::zero(), |acc, &x| acc + x * x);
        if vtv == T::zero() {
            continue;
        }
        let two = T::of(2.0);
        // R <- (I - 2 v v^T / v^T v) R
        for c in k..n {
            let mut dot = T::zero();
            for i in k..n {
                dot += v[i] * r[(i, c)];
            }
            let f = two * dot / vtv;
            for i in k..n {
                let vi = v[i];
                r[(i, c)] -= f * vi;
            }
        }
        // Q <- Q (I - 2 v v^T / v^T v)
        for row in 0..n {
            let mut dot = T::zero();
            for i in k..n {
                dot += q[(row, i)] * v[i];
            }
            let f = two * dot / vtv;
            for i in k..n {
                let vi = v[i];
                q[(row, i)] -= f * vi;
            }
        }
        r[(k, k)] = alpha;
        for i in k + 1..n {
            r[(i, k)] = T::zero();
        }
    }
    (q, r)
}

/// Thomas algorithm for a tridiagonal system.
///
/// `lower[i]` couples row `i+1` to `i`, `upper[i]` couples row `i` to `i+1`.
pub fn solve_tridiagonal<T: Real>(
    lower: &[T],
    diag: &[T],
    upper: &[T],
    rhs: &[T],
) -> Result<Vec<T>> {
    let n = diag.len();
    assert_eq!(rhs.len(), n);
    if n > 1 {
        assert_eq!(lower.len(), n - 1);
        assert_eq!(upper.len(), n - 1);
    }
    let mut c_prime = vec![T::zero(); n.saturating_sub(1)];
    let mut d_prime = vec![T::zero(); n];

    let mut denom = diag[0];
    if !denom.is_finite() || denom == T::zero() {
        return Err(Error::SingularSystem {
            context: "tridiagonal pivot zero",
        });
    }
    if n > 1 {
        c_prime[0] = upper[0] / denom;
    }
    d_prime[0] = rhs[0] / denom;

    for i in 1..n {
        denom = diag[i] - lower[i - 1] * c_prime[i - 1];
        if !denom.is_finite() || denom == T::zero() {
            return Err(Error::SingularSystem {
                context: "tridiagonal pivot zero",
            });
        }
        if i < n - 1 {
            c_prime[i] = upper[i] / denom;
        }
        d_prime[i] = (rhs[i] - lower[i - 1] * d_prime[i - 1]) / denom;
    }

    let mut x = vec![T::zero(); n];
    x[n - 1] = d_prime[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    }
    Ok(x)
}
