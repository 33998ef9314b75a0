//! Small dense linear algebra for test matrices of dimension up to a few tens.
//!
//! Everything here is a pure function of its inputs. The M-matrix classifier
//! follows the leading-principal-minor characterisation: a matrix with
//! nonpositive off-diagonal entries is a nonsingular M-matrix exactly when
//! every leading principal minor is positive.

use std::fmt;
use std::ops::Index;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default threshold for every strict `> 0` test on computed floats.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Relative pivot threshold below which a linear solve is declared singular.
const PIVOT_TOL: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix must be square with n > 0 (got {rows} rows, row {bad_row} has {cols} columns)")]
    NotSquare { rows: usize, bad_row: usize, cols: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("matrix is singular to tolerance at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("positive off-diagonal entry at ({row}, {col})")]
    PositiveOffDiagonal { row: usize, col: usize },
    #[error("negative entry at ({row}, {col}) in a matrix required to be nonnegative")]
    NegativeEntry { row: usize, col: usize },
    #[error("weights must be positive and finite (index {index})")]
    InvalidWeights { index: usize },
    #[error("tolerance must be positive")]
    InvalidTolerance,
    #[error("power iteration did not settle after {iterations} iterations (last estimate {estimate})")]
    NoConvergence { estimate: f64, iterations: usize },
}

/// Square real matrix stored row-major.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from rows, rejecting ragged input and non-finite values.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, LinalgError> {
        let n = rows.len();
        if n == 0 {
            return Err(LinalgError::NotSquare { rows: 0, bad_row: 0, cols: 0 });
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(LinalgError::NotSquare { rows: n, bad_row: i, cols: row.len() });
            }
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(LinalgError::NonFinite { row: i, col: j });
                }
                data.push(v);
            }
        }
        Ok(Matrix { n, data })
    }

    /// Builds an `n x n` matrix entry by entry. Panics if `f` yields a non-finite value.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let v = f(i, j);
                assert!(v.is_finite(), "non-finite matrix entry at ({i}, {j})");
                data.push(v);
            }
        }
        Matrix { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.n, |i, j| self.get(j, i))
    }

    /// Top-left `k x k` block.
    pub fn leading(&self, k: usize) -> Matrix {
        Matrix::from_fn(k, |i, j| self.get(i, j))
    }

    /// Relabels indices: entry `(i, j)` of the result is `self[perm[i], perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Matrix {
        assert_eq!(perm.len(), self.n);
        Matrix::from_fn(self.n, |i, j| self.get(perm[i], perm[j]))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn off_diagonal_nonpositive(&self) -> bool {
        self.first_positive_off_diagonal().is_none()
    }

    fn first_positive_off_diagonal(&self) -> Option<(usize, usize)> {
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j && self.get(i, j) > 0.0 {
                    return Some((i, j));
                }
            }
        }
        None
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = LinalgError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        Matrix::from_rows(&rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.rows()
    }
}

/// LU factorisation with partial pivoting, `P A = L U` packed in one array.
struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
    /// First elimination step whose pivot column was entirely zero.
    zero_pivot: Option<usize>,
}

impl Lu {
    fn factor(m: &Matrix) -> Lu {
        let n = m.n;
        let mut lu = m.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut zero_pivot = None;
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for r in k + 1..n {
                let v = lu[r * n + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best == 0.0 {
                zero_pivot.get_or_insert(k);
                continue;
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[k * n + k];
            for r in k + 1..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                if factor != 0.0 {
                    for c in k + 1..n {
                        lu[r * n + c] -= factor * lu[k * n + c];
                    }
                }
            }
        }
        Lu { n, lu, perm, sign, zero_pivot }
    }

    fn determinant(&self) -> f64 {
        if self.zero_pivot.is_some() {
            return 0.0;
        }
        (0..self.n).fold(self.sign, |acc, k| acc * self.lu[k * self.n + k])
    }

    fn check_pivots(&self, scale: f64) -> Result<(), LinalgError> {
        if let Some(k) = self.zero_pivot {
            return Err(LinalgError::Singular { pivot: k });
        }
        let threshold = PIVOT_TOL * scale.max(f64::MIN_POSITIVE);
        for k in 0..self.n {
            if self.lu[k * self.n + k].abs() <= threshold {
                return Err(LinalgError::Singular { pivot: k });
            }
        }
        Ok(())
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| self.lu[i * n + j] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }
}

pub fn determinant(m: &Matrix) -> f64 {
    Lu::factor(m).determinant()
}

/// Determinants of the top-left `k x k` blocks for `k = 1..=n`, one
/// pivoted factorisation per block.
pub fn leading_principal_minors(m: &Matrix) -> Vec<f64> {
    (1..=m.n).map(|k| determinant(&m.leading(k))).collect()
}

/// Result of [`solve_linear`]: the solution and an infinity-norm condition estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolve {
    pub x: Vec<f64>,
    pub condition_inf: f64,
}

pub fn solve_linear(m: &Matrix, rhs: &[f64]) -> Result<LinearSolve, LinalgError> {
    if rhs.len() != m.n {
        return Err(LinalgError::DimensionMismatch { expected: m.n, got: rhs.len() });
    }
    if let Some(k) = rhs.iter().position(|v| !v.is_finite()) {
        return Err(LinalgError::NonFinite { row: k, col: 0 });
    }
    let lu = Lu::factor(m);
    lu.check_pivots(m.max_abs())?;
    let x = lu.solve(rhs);
    let inv_norm = (0..m.n)
        .map(|j| {
            let mut e = vec![0.0; m.n];
            e[j] = 1.0;
            lu.solve(&e)
        })
        .fold(vec![0.0; m.n], |mut rowsums, col| {
            for (acc, v) in rowsums.iter_mut().zip(&col) {
                *acc += v.abs();
            }
            rowsums
        })
        .into_iter()
        .fold(0.0, f64::max);
    Ok(LinearSolve { x, condition_inf: m.norm_inf() * inv_norm })
}

pub fn inverse(m: &Matrix) -> Result<Matrix, LinalgError> {
    let lu = Lu::factor(m);
    lu.check_pivots(m.max_abs())?;
    let n = m.n;
    let mut data = vec![0.0; n * n];
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        for (i, v) in lu.solve(&e).into_iter().enumerate() {
            data[i * n + j] = v;
        }
    }
    Ok(Matrix { n, data })
}

/// Which sufficient diagonal-dominance condition certified a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Screen {
    RowDominance,
    ColumnDominance,
    WeightedRow,
    WeightedColumn,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MMatrixReport {
    pub is_m_matrix: bool,
    pub off_diagonal_ok: bool,
    pub minors: Vec<f64>,
    /// `m^-1 * 1`, present only for M-matrices.
    pub witness_xi: Option<Vec<f64>>,
    pub screen_passed: Option<Screen>,
    /// Smallest leading principal minor.
    pub margin: f64,
}

/// Classifies `m` as a nonsingular M-matrix: nonpositive off-diagonal
/// entries and every leading principal minor above `tol`.
pub fn is_m_matrix(m: &Matrix, tol: f64) -> MMatrixReport {
    let off_diagonal_ok = m.off_diagonal_nonpositive();
    let minors = leading_principal_minors(m);
    let margin = minors.iter().copied().fold(f64::INFINITY, f64::min);
    let is_m = off_diagonal_ok && minors.iter().all(|&d| d > tol);
    let witness_xi = if is_m {
        solve_linear(m, &vec![1.0; m.n]).ok().map(|s| s.x)
    } else {
        None
    };
    let screen_passed = if off_diagonal_ok {
        lemma0_screen(m, None).ok()
    } else {
        None
    };
    MMatrixReport { is_m_matrix: is_m, off_diagonal_ok, minors, witness_xi, screen_passed, margin }
}

fn weighted_row_slack(m: &Matrix, xi: &[f64]) -> f64 {
    (0..m.n)
        .map(|i| {
            let off: f64 = (0..m.n).filter(|&j| j != i).map(|j| xi[j] * m.get(i, j).abs()).sum();
            xi[i] * m.get(i, i) - off
        })
        .fold(f64::INFINITY, f64::min)
}

fn weighted_column_slack(m: &Matrix, xi: &[f64]) -> f64 {
    (0..m.n)
        .map(|j| {
            let off: f64 = (0..m.n).filter(|&i| i != j).map(|i| xi[i] * m.get(i, j).abs()).sum();
            xi[j] * m.get(j, j) - off
        })
        .fold(f64::INFINITY, f64::min)
}

/// Smallest slack of the ξ-weighted row-dominance inequalities
/// `ξ_i m_ii - Σ_{j≠i} ξ_j |m_ij|`.
pub fn weighted_row_margin(m: &Matrix, xi: &[f64]) -> f64 {
    assert_eq!(xi.len(), m.n);
    weighted_row_slack(m, xi)
}

/// Smallest slack of the ξ-weighted column-dominance inequalities
/// `ξ_j m_jj - Σ_{i≠j} ξ_i |m_ij|`.
pub fn weighted_column_margin(m: &Matrix, xi: &[f64]) -> f64 {
    assert_eq!(xi.len(), m.n);
    weighted_column_slack(m, xi)
}

/// Returns the first diagonal-dominance condition that certifies `m` as an
/// M-matrix: plain rows, plain columns, then ξ-weighted rows and columns.
///
/// Without explicit weights the weighted checks use `ξ = m^-1 * 1` when `m`
/// is nonsingular with an entrywise nonnegative inverse, and are skipped
/// otherwise.
pub fn lemma0_screen(m: &Matrix, weights: Option<&[f64]>) -> Result<Screen, LinalgError> {
    if let Some((row, col)) = m.first_positive_off_diagonal() {
        return Err(LinalgError::PositiveOffDiagonal { row, col });
    }
    let ones = vec![1.0; m.n];
    if weighted_row_slack(m, &ones) > 0.0 {
        return Ok(Screen::RowDominance);
    }
    if weighted_column_slack(m, &ones) > 0.0 {
        return Ok(Screen::ColumnDominance);
    }
    let xi = match weights {
        Some(w) => {
            if w.len() != m.n {
                return Err(LinalgError::DimensionMismatch { expected: m.n, got: w.len() });
            }
            if let Some(index) = w.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(LinalgError::InvalidWeights { index });
            }
            Some(w.to_vec())
        }
        None => inverse(m).ok().and_then(|inv| {
            let nonneg = inv.data.iter().all(|&v| v >= 0.0);
            let xi = inv.mul_vec(&ones);
            (nonneg && xi.iter().all(|&v| v > 0.0)).then_some(xi)
        }),
    };
    if let Some(xi) = xi {
        if weighted_row_slack(m, &xi) > 0.0 {
            return Ok(Screen::WeightedRow);
        }
        if weighted_column_slack(m, &xi) > 0.0 {
            return Ok(Screen::WeightedColumn);
        }
    }
    Ok(Screen::None)
}

/// Perron root of a nonnegative matrix by power iteration from the all-ones
/// vector on the shifted matrix `m + s I`.
///
/// The shift `s = tol + ||m||_inf / 2` makes the Perron root strictly
/// dominant in modulus, which plain power iteration needs on periodic
/// matrices such as the block anti-diagonal Lipschitz matrices of BAM
/// networks. Converges when the Collatz-Wielandt bracket closes to `tol`, or
/// when the norm-ratio estimate moves by less than `tol / 10` on three
/// consecutive iterations.
pub fn spectral_radius(m: &Matrix, tol: f64, max_iter: usize) -> Result<f64, LinalgError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(LinalgError::InvalidTolerance);
    }
    for i in 0..m.n {
        for j in 0..m.n {
            if m.get(i, j) < 0.0 {
                return Err(LinalgError::NegativeEntry { row: i, col: j });
            }
        }
    }
    let n = m.n;
    let shift = tol + 0.5 * m.norm_inf();
    let mut x = vec![1.0; n];
    let mut estimate = f64::NAN;
    let mut quiet = 0;
    for _ in 0..max_iter {
        let mut y = m.mul_vec(&x);
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += shift * xi;
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for (yi, xi) in y.iter().zip(&x) {
            let r = yi / xi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        let norm = y.iter().fold(0.0_f64, |a, v| a.max(*v));
        let next = norm / x.iter().fold(0.0_f64, |a, v| a.max(*v));
        if hi - lo <= tol {
            let rho = (0.5 * (lo + hi) - shift).max(0.0);
            debug_assert_perron_bounds(m, rho, tol);
            return Ok(rho);
        }
        if (next - estimate).abs() <= 0.1 * tol {
            quiet += 1;
            if quiet >= 3 {
                let rho = (next - shift).max(0.0);
                debug_assert_perron_bounds(m, rho, tol);
                return Ok(rho);
            }
        } else {
            quiet = 0;
        }
        estimate = next;
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
    }
    Err(LinalgError::NoConvergence { estimate: estimate - shift, iterations: max_iter })
}

fn debug_assert_perron_bounds(m: &Matrix, rho: f64, tol: f64) {
    if cfg!(debug_assertions) {
        let max_diag = (0..m.n).map(|i| m.get(i, i)).fold(0.0, f64::max);
        let slack = 10.0 * tol * (1.0 + m.norm_inf());
        assert!(rho >= max_diag - slack, "Perron lower bound violated: {rho} < {max_diag}");
        assert!(rho <= m.norm_inf() + slack, "Perron upper bound violated: {rho}");
    }
}
