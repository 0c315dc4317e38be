//! Dense symmetric linear algebra.
//!
//! Matrices are stored row-major with no sparsity. The largest matrices that
//! flow through this crate are `m × m` shape matrices with `m` around a
//! thousand, so dense storage keeps things simple without costing much.

use std::fmt;

use crate::error::{Error, Result};

/// Default relative tolerance for [`spectral_norm`].
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default iteration cap for [`spectral_norm`].
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Largest dimension accepted by [`eig_oracle`].
pub const ORACLE_MAX_DIM: usize = 64;

#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries, rejecting bad shapes and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidMatrix(format!("empty shape {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidMatrix(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != ncols) {
            return Err(Error::InvalidMatrix("ragged rows".into()));
        }
        let data = rows.iter().flat_map(|r| r.as_ref().iter().copied()).collect();
        Self::new(nrows, ncols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![1.0; n])
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        let mut out = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            out.data[i * n + i] = v;
        }
        out
    }

    /// Matrix with every entry equal to `value`.
    pub fn filled(rows: usize, cols: usize, value: f64) -> Self {
        let mut out = Self::zeros(rows, cols);
        out.data.fill(value);
        out
    }

    /// Wraps a buffer produced by internal arithmetic. Finiteness is the
    /// caller's responsibility.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub(crate) fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · selfᵀ`, computed on the upper triangle and mirrored so the
    /// result is exactly symmetric.
    pub fn gram(&self) -> Self {
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            let ri = self.row(i);
            for j in i..n {
                let v = dot(ri, self.row(j));
                out.data[i * n + j] = v;
                out.data[j * n + i] = v;
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|v| v * c).collect())
    }

    /// `(A + Aᵀ) / 2`.
    pub fn symmetrized(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(self.not_square());
        }
        let n = self.rows;
        let mut out = self.clone();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = 0.5 * (self.data[i * n + j] + self.data[j * n + i]);
                out.data[i * n + j] = v;
                out.data[j * n + i] = v;
            }
        }
        Ok(out)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    fn check_same_shape(&self, other: &DenseMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    fn not_square(&self) -> Error {
        Error::DimensionMismatch(format!("expected a square matrix, got {}x{}", self.rows, self.cols))
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators let the compiler vectorise the reduction.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = c * 4;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in chunks * 4..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Symmetric positive-definite matrix with its lower Cholesky factor.
#[derive(Debug, Clone)]
pub struct SpdMatrix {
    matrix: DenseMatrix,
    chol: DenseMatrix,
    is_identity: bool,
}

impl SpdMatrix {
    /// Accepts a square matrix that is symmetric up to round-off, stores the
    /// exactly symmetrized copy and verifies definiteness by factorizing it.
    pub fn new(matrix: DenseMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(matrix.not_square());
        }
        let scale = matrix.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let asym = matrix.max_abs_diff(&matrix.transpose())?;
        if asym > 1e-12 * scale {
            return Err(Error::InvalidMatrix(format!("matrix is not symmetric (max asymmetry {asym:e})")));
        }
        let matrix = matrix.symmetrized()?;
        let chol = cholesky(&matrix)?;
        let n = matrix.rows();
        let is_identity = matrix == DenseMatrix::identity(n);
        Ok(Self { matrix, chol, is_identity })
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: DenseMatrix::identity(n), chol: DenseMatrix::identity(n), is_identity: true }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// Lower-triangular `L` with `L Lᵀ = Σ`.
    pub fn cholesky(&self) -> &DenseMatrix {
        &self.chol
    }

    pub fn is_identity(&self) -> bool {
        self.is_identity
    }

    pub fn spectral_norm(&self) -> Result<f64> {
        if self.is_identity {
            return Ok(1.0);
        }
        spectral_norm(&self.matrix, DEFAULT_TOL, DEFAULT_MAX_ITER)
    }
}

/// Lower Cholesky factor of a symmetric positive-definite matrix. Only the
/// lower triangle of `a` is read.
pub fn cholesky(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(a.not_square());
    }
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let lj = &l.row(j)[..j];
        let pivot = a.get(j, j) - dot(lj, lj);
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j, value: pivot });
        }
        let d = pivot.sqrt();
        l.set(j, j, d);
        for i in (j + 1)..n {
            let s = dot(&l.row(i)[..j], &l.row(j)[..j]);
            l.set(i, j, (a.get(i, j) - s) / d);
        }
    }
    Ok(l)
}

pub fn frobenius_norm(a: &DenseMatrix) -> f64 {
    a.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn trace(a: &DenseMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(a.not_square());
    }
    Ok((0..a.rows()).map(|i| a.get(i, i)).sum())
}

/// Largest absolute eigenvalue of a symmetric matrix.
///
/// Runs a Krylov iteration from the normalized all-ones vector: Lanczos with
/// full reorthogonalization, whose extreme Ritz values are computed by Sturm
/// bisection on the tridiagonal projection. If the Krylov space becomes
/// invariant before covering the whole space, the iteration restarts once
/// from a fixed pseudo-random vector orthogonalized against the basis. That
/// vector has a component in every eigenspace, so a start vector orthogonal
/// to the dominant eigenvector cannot hide it, and a second breakdown means
/// the spectrum has been seen.
///
/// Stops once the estimate changes by at most `tol · estimate` on three
/// consecutive steps, or when the Krylov basis spans the full space (the
/// estimate is then exact up to round-off).
pub fn spectral_norm(a: &DenseMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    if !a.is_square() {
        return Err(a.not_square());
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInputs(format!("tolerance must be positive, got {tol}")));
    }
    let n = a.rows();
    let scale = frobenius_norm(a);
    if scale == 0.0 {
        return Ok(0.0);
    }
    if n == 1 {
        return Ok(a.get(0, 0).abs());
    }
    let breakdown = 1e-12 * scale;

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut restarted = false;
    let mut estimate = 0.0f64;
    let mut stable = 0usize;
    let mut gap = f64::INFINITY;

    for iter in 0..max_iter {
        let mut w = a.matvec(&v);
        let alpha = dot(&v, &w);
        basis.push(std::mem::take(&mut v));
        alphas.push(alpha);
        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                axpy(-c, q, &mut w);
            }
        }

        let (lo, hi) = tridiagonal_extremes(&alphas, &betas);
        let previous = estimate;
        estimate = lo.abs().max(hi.abs());
        if basis.len() == n {
            return Ok(estimate);
        }

        let beta = norm2(&w);
        if beta <= breakdown {
            betas.push(0.0);
            stable = 0;
            if restarted {
                return Ok(estimate);
            }
            restarted = true;
            match restart_vector(&basis) {
                Some(fresh) => v = fresh,
                None => return Ok(estimate),
            }
            continue;
        }
        betas.push(beta);
        v = w.into_iter().map(|x| x / beta).collect();

        if iter > 0 {
            gap = (estimate - previous).abs() / estimate.max(f64::MIN_POSITIVE);
            if gap <= tol {
                stable += 1;
                if stable >= 3 {
                    return Ok(estimate);
                }
            } else {
                stable = 0;
            }
        }
    }
    Err(Error::ConvergenceFailure { iterations: max_iter, gap })
}

/// Splitmix64-derived entries in `[-1, 1)`, orthogonalized against `basis`.
fn restart_vector(basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let n = basis[0].len();
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut e: Vec<f64> = (0..n)
        .map(|_| {
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect();
    let initial = norm2(&e);
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &e);
            axpy(-c, q, &mut e);
        }
    }
    let norm = norm2(&e);
    if norm <= 1e-8 * initial {
        return None;
    }
    e.iter_mut().for_each(|x| *x /= norm);
    Some(e)
}

#[inline]
fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

fn norm2(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Number of eigenvalues strictly below `x` of the symmetric tridiagonal
/// matrix with diagonal `alphas` and off-diagonal `betas`.
fn sturm_count(alphas: &[f64], betas: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for (i, &alpha) in alphas.iter().enumerate() {
        let b = if i == 0 { 0.0 } else { betas[i - 1] };
        q = if b == 0.0 { alpha - x } else { alpha - x - b * b / q };
        if q == 0.0 {
            q = -f64::EPSILON * (alpha.abs() + b.abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Eigenvalue of rank `index` (ascending, zero-based) of a symmetric
/// tridiagonal matrix, by bisection.
fn tridiagonal_eigenvalue(alphas: &[f64], betas: &[f64], index: usize) -> f64 {
    let k = alphas.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..k {
        let left = if i == 0 { 0.0 } else { betas[i - 1].abs() };
        let right = if i + 1 < k { betas[i].abs() } else { 0.0 };
        lo = lo.min(alphas[i] - left - right);
        hi = hi.max(alphas[i] + left + right);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
        if sturm_count(alphas, betas, mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest and largest eigenvalues of the symmetric tridiagonal matrix
/// with diagonal `alphas` and off-diagonal `betas`, by Sturm bisection.
pub fn tridiagonal_extremes(alphas: &[f64], betas: &[f64]) -> (f64, f64) {
    assert!(!alphas.is_empty() && betas.len() + 1 == alphas.len(), "tridiagonal shape mismatch");
    let k = alphas.len();
    (tridiagonal_eigenvalue(alphas, betas, 0), tridiagonal_eigenvalue(alphas, betas, k - 1))
}

/// All eigenvalues of a small symmetric matrix by cyclic Jacobi rotations,
/// sorted descending. Test oracle only.
pub fn eig_oracle(a: &DenseMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(a.not_square());
    }
    let n = a.rows();
    if n > ORACLE_MAX_DIM {
        return Err(Error::OracleSizeExceeded { dim: n, max: ORACLE_MAX_DIM });
    }
    let mut m = a.to_rows();
    let threshold = 1e-12 * frobenius_norm(a).max(1.0);
    let off = |m: &Vec<Vec<f64>>| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[i][j] * m[i][j];
                }
            }
        }
        s.sqrt()
    };

    let mut converged = false;
    for _sweep in 0..100 {
        if off(&m) <= threshold {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in m.iter_mut() {
                    let (rp, rq) = (row[p], row[q]);
                    row[p] = c * rp - s * rq;
                    row[q] = s * rp + c * rq;
                }
                for k in 0..n {
                    let (pk, qk) = (m[p][k], m[q][k]);
                    m[p][k] = c * pk - s * qk;
                    m[q][k] = s * pk + c * qk;
                }
            }
        }
    }
    if !converged && off(&m) > threshold {
        return Err(Error::ConvergenceFailure { iterations: 100, gap: off(&m) });
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    eig.sort_by(|x, y| y.total_cmp(x));
    Ok(eig)
}
