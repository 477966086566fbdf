use std::fmt;

use faer::prelude::*;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use super::{LinalgError, SparseMatrix};
use crate::assembly::AssembledSystem;

/// Grid size above which the default solver switches from sparse LU to
/// Jacobi-preconditioned BiCGStab.
pub const DIRECT_SOLVE_MAX_CELLS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    DirectLu,
    BiCgStab,
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveMethod::DirectLu => f.write_str("direct-lu"),
            SolveMethod::BiCgStab => f.write_str("bicgstab"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub method: SolveMethod,
    /// Relative tolerance on `||AX - B||_inf / max(1, ||B||_inf)`.
    pub tol: f64,
    /// Iteration cap for BiCGStab; `None` means `20 * dim`.
    pub max_iter: Option<usize>,
    /// Left Jacobi scaling of the system before factoring or iterating.
    pub precondition: bool,
}

impl SolverOptions {
    pub fn direct() -> Self {
        Self {
            method: SolveMethod::DirectLu,
            tol: 1e-10,
            max_iter: None,
            precondition: true,
        }
    }

    pub fn bicgstab(tol: f64) -> Self {
        Self {
            method: SolveMethod::BiCgStab,
            tol,
            max_iter: None,
            precondition: true,
        }
    }

    /// Direct LU up to `N = 400`, Jacobi-preconditioned BiCGStab above.
    pub fn for_cells(cells: usize) -> Self {
        if cells <= DIRECT_SOLVE_MAX_CELLS {
            Self::direct()
        } else {
            Self::bicgstab(1e-10)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub solution: Vec<f64>,
    pub method: SolveMethod,
    /// Zero for the direct method (refinement steps are not counted).
    pub iterations: usize,
    /// `||AX - B||_inf / max(1, ||B||_inf)` of the returned solution.
    pub final_residual: f64,
    pub preconditioned: bool,
}

pub(crate) fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

/// `||A x - b||_inf / max(1, ||b||_inf)`.
pub fn relative_residual(matrix: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = matrix.mul_vec(x);
    let r = ax.iter().zip(b).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
    r / inf_norm(b).max(1.0)
}

/// Sparse LU factorization with partial pivoting, reusable for several
/// right-hand sides and for transposed solves.
pub struct LuFactor {
    dim: usize,
    lu: Lu<usize, f64>,
}

impl fmt::Debug for LuFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LuFactor").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl LuFactor {
    pub fn new(matrix: &SparseMatrix) -> Result<Self, LinalgError> {
        let dim = matrix.dim();
        let triplets: Vec<Triplet<usize, usize, f64>> = matrix
            .triplets()
            .map(|(r, c, v)| Triplet::new(r, c, v))
            .collect();
        let csc = SparseColMat::<usize, f64>::try_new_from_triplets(dim, dim, &triplets)
            .map_err(|e| LinalgError::Factorization(format!("{e:?}")))?;
        drop(triplets);
        let lu = csc
            .as_ref()
            .sp_lu()
            .map_err(|e| LinalgError::Factorization(format!("{e:?}")))?;
        Ok(Self { dim, lu })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn finish(&self, m: Mat<f64>) -> Result<Vec<f64>, LinalgError> {
        let x: Vec<f64> = (0..self.dim).map(|i| m[(i, 0)]).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(LinalgError::SingularPivot);
        }
        Ok(x)
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let mut m = Mat::from_fn(self.dim, 1, |i, _| b[i]);
        self.lu.solve_in_place(&mut m);
        self.finish(m)
    }

    /// Solves `A^T x = b`.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let mut m = Mat::from_fn(self.dim, 1, |i, _| b[i]);
        self.lu.solve_transpose_in_place(&mut m);
        self.finish(m)
    }
}

/// Left Jacobi scaling `(D^-1 A, D^-1 B)` with `D = diag(A)`.
pub fn jacobi_precondition(system: &AssembledSystem) -> Result<AssembledSystem, LinalgError> {
    let diag = system.matrix.diagonal();
    if let Some(row) = diag.iter().position(|&d| d == 0.0) {
        return Err(LinalgError::ZeroDiagonal { row });
    }
    let inv: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let mut matrix = system.matrix.clone();
    matrix.scale_rows(&inv);
    // exact unit diagonal
    for r in 0..matrix.dim() {
        let (start, end) = (matrix.row_offsets()[r], matrix.row_offsets()[r + 1]);
        let k = matrix.col_indices()[start..end]
            .binary_search(&r)
            .expect("nonzero diagonal is stored");
        matrix.values_mut()[start + k] = 1.0;
    }
    let rhs = system.rhs.iter().zip(&inv).map(|(b, s)| b * s).collect();
    Ok(AssembledSystem {
        matrix,
        rhs,
        scheme: system.scheme,
    })
}

/// Solves `A X = B` with the requested method.
pub fn solve(system: &AssembledSystem, opts: &SolverOptions) -> Result<SolveReport, LinalgError> {
    let dim = system.matrix.dim();
    if system.rhs.len() != dim {
        return Err(LinalgError::DimensionMismatch {
            expected: dim,
            found: system.rhs.len(),
        });
    }
    match opts.method {
        SolveMethod::DirectLu => {
            if opts.precondition {
                let scaled = jacobi_precondition(system)?;
                let mut report = solve_direct(&scaled, opts.tol)?;
                report.final_residual = relative_residual(&system.matrix, &report.solution, &system.rhs);
                report.preconditioned = true;
                Ok(report)
            } else {
                solve_direct(system, opts.tol)
            }
        }
        SolveMethod::BiCgStab => {
            if !(opts.tol.is_finite() && opts.tol > 0.0) {
                return Err(LinalgError::BadTolerance(opts.tol));
            }
            let max_iter = opts.max_iter.unwrap_or(20 * dim);
            if opts.precondition {
                let scaled = jacobi_precondition(system)?;
                let diag = system.matrix.diagonal();
                let out = bicgstab(&scaled.matrix, &scaled.rhs, Some(&diag), &system.rhs, opts.tol, max_iter)?;
                Ok(SolveReport {
                    final_residual: relative_residual(&system.matrix, &out.0, &system.rhs),
                    solution: out.0,
                    method: SolveMethod::BiCgStab,
                    iterations: out.1,
                    preconditioned: true,
                })
            } else {
                let out = bicgstab(&system.matrix, &system.rhs, None, &system.rhs, opts.tol, max_iter)?;
                Ok(SolveReport {
                    final_residual: relative_residual(&system.matrix, &out.0, &system.rhs),
                    solution: out.0,
                    method: SolveMethod::BiCgStab,
                    iterations: out.1,
                    preconditioned: false,
                })
            }
        }
    }
}

fn solve_direct(system: &AssembledSystem, tol: f64) -> Result<SolveReport, LinalgError> {
    let b = &system.rhs;
    if inf_norm(b) == 0.0 {
        return Ok(SolveReport {
            solution: vec![0.0; b.len()],
            method: SolveMethod::DirectLu,
            iterations: 0,
            final_residual: 0.0,
            preconditioned: false,
        });
    }
    let lu = LuFactor::new(&system.matrix)?;
    let mut x = lu.solve(b)?;
    let mut residual = relative_residual(&system.matrix, &x, b);
    // a few steps of iterative refinement for badly scaled systems
    for _ in 0..3 {
        if residual <= tol {
            break;
        }
        let ax = system.matrix.mul_vec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = lu.solve(&r)?;
        let candidate: Vec<f64> = x.iter().zip(&dx).map(|(x, d)| x + d).collect();
        let refined = relative_residual(&system.matrix, &candidate, b);
        if refined >= residual {
            break;
        }
        x = candidate;
        residual = refined;
    }
    Ok(SolveReport {
        solution: x,
        method: SolveMethod::DirectLu,
        iterations: 0,
        final_residual: residual,
        preconditioned: false,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BiCGStab on `A x = b`. When the system was left-scaled, `row_scale` holds
/// the original diagonal so the stopping test is applied to the residual of
/// the unscaled system `orig_rhs`.
fn bicgstab(
    a: &SparseMatrix,
    b: &[f64],
    row_scale: Option<&[f64]>,
    orig_rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, usize), LinalgError> {
    let n = a.dim();
    let target = tol * inf_norm(orig_rhs).max(1.0);
    let unscaled_norm = |r: &[f64]| -> f64 {
        match row_scale {
            Some(d) => r.iter().zip(d).fold(0.0, |m: f64, (r, d)| m.max((r * d).abs())),
            None => inf_norm(r),
        }
    };

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut iterations = 0;
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut t = vec![0.0; n];
    let mut restarts = 0;

    'outer: loop {
        if unscaled_norm(&r) <= target {
            break;
        }
        let r_hat = r.clone();
        let mut rho = 1.0;
        let mut alpha = 1.0;
        let mut omega = 1.0;
        v.fill(0.0);
        p.fill(0.0);
        loop {
            if iterations >= max_iter {
                return Err(LinalgError::NotConverged {
                    iterations,
                    residual: unscaled_norm(&r) / inf_norm(orig_rhs).max(1.0),
                });
            }
            iterations += 1;
            let rho_new = dot(&r_hat, &r);
            if rho_new == 0.0 || !rho_new.is_finite() {
                break;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            for k in 0..n {
                p[k] = r[k] + beta * (p[k] - omega * v[k]);
            }
            a.matvec(&p, &mut v);
            let rv = dot(&r_hat, &v);
            if rv == 0.0 || !rv.is_finite() {
                break;
            }
            alpha = rho_new / rv;
            for k in 0..n {
                s[k] = r[k] - alpha * v[k];
            }
            if unscaled_norm(&s) <= target {
                for k in 0..n {
                    x[k] += alpha * p[k];
                }
                r.copy_from_slice(&s);
                break;
            }
            a.matvec(&s, &mut t);
            let tt = dot(&t, &t);
            if tt == 0.0 {
                break;
            }
            omega = dot(&t, &s) / tt;
            for k in 0..n {
                x[k] += alpha * p[k] + omega * s[k];
                r[k] = s[k] - omega * t[k];
            }
            rho = rho_new;
            if unscaled_norm(&r) <= target {
                break;
            }
            if omega == 0.0 {
                break;
            }
        }
        // recompute the true residual; recurrences drift over long runs
        let ax = a.mul_vec(&x);
        for k in 0..n {
            r[k] = b[k] - ax[k];
        }
        if unscaled_norm(&r) <= target {
            break 'outer;
        }
        restarts += 1;
        if restarts > 50 {
            return Err(LinalgError::Breakdown {
                iterations,
                residual: unscaled_norm(&r) / inf_norm(orig_rhs).max(1.0),
            });
        }
    }
    Ok((x, iterations))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SparseMatrix {
        let mut rows = Vec::new();
        for i in 0..n {
            let mut row = vec![(i, 4.0)];
            if i > 0 {
                row.push((i - 1, -1.0));
            }
            if i + 1 < n {
                row.push((i + 1, -2.0));
            }
            rows.push(row);
        }
        SparseMatrix::from_rows(n, rows).unwrap()
    }

    #[test]
    fn zero_rhs_gives_zero_solution() {
        let sys = AssembledSystem::new(tridiag(10), vec![0.0; 10]);
        for opts in [SolverOptions::direct(), SolverOptions::bicgstab(1e-12)] {
            let rep = solve(&sys, &opts).unwrap();
            assert!(rep.solution.iter().all(|&v| v == 0.0));
            assert_eq!(rep.final_residual, 0.0);
        }
    }

    #[test]
    fn identity_returns_rhs() {
        let b: Vec<f64> = (0..7).map(|k| k as f64 - 3.5).collect();
        let sys = AssembledSystem::new(SparseMatrix::identity(7), b.clone());
        assert_eq!(solve(&sys, &SolverOptions::direct()).unwrap().solution, b);
        assert_eq!(solve(&sys, &SolverOptions::bicgstab(1e-12)).unwrap().solution, b);
    }

    #[test]
    fn direct_and_iterative_agree() {
        let n = 50;
        let b: Vec<f64> = (0..n).map(|k| (k as f64).sin()).collect();
        let sys = AssembledSystem::new(tridiag(n), b);
        let d = solve(&sys, &SolverOptions::direct()).unwrap();
        let mut unpre = SolverOptions::bicgstab(1e-12);
        unpre.precondition = false;
        for opts in [SolverOptions::bicgstab(1e-12), unpre] {
            let it = solve(&sys, &opts).unwrap();
            assert!(it.iterations > 0);
            assert!(it.final_residual <= 1e-12);
            let diff = d.solution.iter().zip(&it.solution).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
            assert!(diff < 1e-10, "diff {diff}");
        }
    }

    #[test]
    fn jacobi_scaling_unit_diagonal() {
        let sys = AssembledSystem::new(tridiag(5), vec![1.0; 5]);
        let scaled = jacobi_precondition(&sys).unwrap();
        assert!(scaled.matrix.diagonal().iter().all(|&d| d == 1.0));
        assert_eq!(scaled.matrix.get(1, 2), -0.5);
        assert_eq!(scaled.rhs[0], 0.25);
    }

    #[test]
    fn zero_diagonal_is_rejected() {
        let m = SparseMatrix::from_dense(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let sys = AssembledSystem::new(m, vec![1.0, 1.0]);
        assert_eq!(jacobi_precondition(&sys).unwrap_err(), LinalgError::ZeroDiagonal { row: 0 });
    }

    #[test]
    fn singular_matrix_is_reported() {
        let m = SparseMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let sys = AssembledSystem::new(m, vec![1.0, 1.0]);
        assert!(solve(&sys, &SolverOptions::direct()).is_err());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let b: Vec<f64> = (0..50).map(|k| (k as f64).cos()).collect();
        let sys = AssembledSystem::new(tridiag(50), b);
        let mut opts = SolverOptions::bicgstab(1e-14);
        opts.max_iter = Some(2);
        assert!(matches!(
            solve(&sys, &opts),
            Err(LinalgError::NotConverged { iterations: 2, .. })
        ));
    }
}
