//! Normal-equation least squares with an SVD fallback, and condition numbers.

use super::matrix::DenseMatrix;
use crate::error::{invalid, Error, Result};
use nalgebra::{DMatrix, DVector};

/// Pivot threshold, relative to the largest diagonal entry, below which the
/// Cholesky factorization of the Gram matrix is treated as a breakdown.
const CHOLESKY_PIVOT_TOL: f64 = 1e-12;
/// Relative singular-value cutoff of the pseudoinverse.
const SVD_CUTOFF: f64 = 1e-12;
/// Relative threshold under which the smallest singular value counts as zero.
const COND_ZERO_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LstsqMethod {
    /// Cholesky on `AᵀA + λI` (tall systems).
    CholeskyNormal,
    /// Cholesky on `AAᵀ + λI` followed by `γ = Aᵀy` (wide systems).
    CholeskyGram,
    /// Truncated SVD pseudoinverse.
    Svd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    pub gamma: Vec<f64>,
    pub method: LstsqMethod,
}

/// Solve `AᵀA γ = −Aᵀb` (plus `λ‖γ‖²` Tikhonov term when `regularization > 0`).
///
/// Wide systems (fewer rows than columns) go through the row-space Gram
/// matrix, which yields the minimum-norm solution. A breakdown of either
/// Cholesky factorization falls back to the SVD pseudoinverse.
pub fn solve_least_squares(a: &DenseMatrix, b: &[f64], regularization: f64) -> Result<LstsqSolution> {
    if b.len() != a.rows() {
        return Err(invalid(format!("rhs has length {}, matrix has {} rows", b.len(), a.rows())));
    }
    if !(regularization >= 0.0) || !regularization.is_finite() {
        return Err(invalid(format!("regularization must be a finite nonnegative number, got {regularization}")));
    }
    if !a.is_finite() || b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite entries in least-squares system".into()));
    }
    if a.cols() == 0 {
        return Ok(LstsqSolution { gamma: vec![], method: LstsqMethod::CholeskyNormal });
    }
    // Row-major A is column-major Aᵀ.
    let at = DMatrix::from_column_slice(a.cols(), a.rows(), a.as_slice());
    let tall = a.rows() >= a.cols();
    let attempt = if tall {
        let mut g = &at * at.transpose();
        add_diagonal(&mut g, regularization);
        let rhs = -(&at * DVector::from_column_slice(b));
        cholesky_solve(g, rhs).map(|x| (x.as_slice().to_vec(), LstsqMethod::CholeskyNormal))
    } else {
        let mut g = at.transpose() * &at;
        add_diagonal(&mut g, regularization);
        let rhs = -DVector::from_column_slice(b);
        cholesky_solve(g, rhs).map(|y| ((&at * y).as_slice().to_vec(), LstsqMethod::CholeskyGram))
    };
    let (gamma, method) = match attempt {
        Some(sol) => sol,
        None => (svd_solve(&at, b, regularization)?, LstsqMethod::Svd),
    };
    if gamma.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("least-squares solution is not finite".into()));
    }
    Ok(LstsqSolution { gamma, method })
}

fn add_diagonal(g: &mut DMatrix<f64>, lambda: f64) {
    if lambda > 0.0 {
        for i in 0..g.nrows() {
            g[(i, i)] += lambda;
        }
    }
}

/// In-place Cholesky `G = LLᵀ` and two triangular solves. Returns `None` on breakdown.
fn cholesky_solve(mut g: DMatrix<f64>, mut rhs: DVector<f64>) -> Option<DVector<f64>> {
    let n = g.nrows();
    let max_diag = (0..n).map(|i| g[(i, i)]).fold(0.0f64, f64::max);
    if !(max_diag > 0.0) {
        return None;
    }
    let tol = CHOLESKY_PIVOT_TOL * max_diag;
    // column-major storage: work on the lower triangle column by column
    for j in 0..n {
        let mut d = g[(j, j)];
        for k in 0..j {
            d -= g[(j, k)] * g[(j, k)];
        }
        if !(d > tol) {
            return None;
        }
        let ljj = d.sqrt();
        g[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= g[(i, k)] * g[(j, k)];
            }
            g[(i, j)] = s / ljj;
        }
    }
    for i in 0..n {
        let mut s = rhs[i];
        for k in 0..i {
            s -= g[(i, k)] * rhs[k];
        }
        rhs[i] = s / g[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = rhs[i];
        for k in i + 1..n {
            s -= g[(k, i)] * rhs[k];
        }
        rhs[i] = s / g[(i, i)];
    }
    Some(rhs)
}

/// `γ = −V diag(σ/(σ²+λ)) Uᵀ b` with the relative cutoff applied to σ.
/// `at` is `Aᵀ`, so its SVD `Aᵀ = U' Σ V'ᵀ` gives `A = V' Σ U'ᵀ`.
fn svd_solve(at: &DMatrix<f64>, b: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let svd = at.clone().svd(true, true);
    let (u, vt) = match (svd.u.as_ref(), svd.v_t.as_ref()) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::Numeric("SVD did not converge".into())),
    };
    let sigma = &svd.singular_values;
    let smax = sigma.iter().cloned().fold(0.0f64, f64::max);
    let bvec = DVector::from_column_slice(b);
    // Uᵀ_A b = V'ᵀ b
    let proj = vt * bvec;
    let mut scaled = proj.clone();
    for (i, s) in sigma.iter().enumerate() {
        scaled[i] = if *s > SVD_CUTOFF * smax && *s > 0.0 { -proj[i] * s / (s * s + lambda) } else { 0.0 };
    }
    Ok((u * scaled).as_slice().to_vec())
}

/// Singular values of `a` in descending order.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let at = DMatrix::from_column_slice(a.cols(), a.rows(), a.as_slice());
    // reduce very tall (or wide) matrices through QR first
    let m = if at.nrows() > 2 * at.ncols() {
        at.qr().r()
    } else if at.ncols() > 2 * at.nrows() {
        at.transpose().qr().r()
    } else {
        at
    };
    let mut s: Vec<f64> = m.singular_values().iter().cloned().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// `σ_max / σ_min`, or `+∞` when `σ_min ≤ 1e-14·σ_max`.
pub fn condition_number(a: &DenseMatrix) -> Result<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Err(invalid("condition number of an empty matrix"));
    }
    if !a.is_finite() {
        return Err(Error::Numeric("non-finite matrix entries".into()));
    }
    if a.as_slice().iter().all(|v| *v == 0.0) {
        return Err(invalid("condition number of the zero matrix"));
    }
    let s = singular_values(a);
    let smax = s[0];
    let smin = *s.last().unwrap();
    if smin <= COND_ZERO_TOL * smax {
        Ok(f64::INFINITY)
    } else {
        Ok(smax / smin)
    }
}
