//! Sparse matrix kernel, linear solvers, Jacobi scaling and condition-number
//! estimation.

mod cond;
mod csr;
mod market;
mod solve;

pub use cond::{cond2_estimate, cond2_estimate_jacobi, cond_inf_bound, Cond2Estimate, CondInfBound, COND2_MAX_DIM};
pub use csr::SparseMatrix;
pub use market::{read_matrix_market, write_matrix_market};
pub use solve::{
    jacobi_precondition, relative_residual, solve, LuFactor, SolveMethod, SolveReport, SolverOptions,
    DIRECT_SOLVE_MAX_CELLS,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("entry ({row}, {col}) outside a {dim}x{dim} matrix")]
    IndexOutOfRange { row: usize, col: usize, dim: usize },
    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },
    #[error("LU factorization failed: {0}")]
    Factorization(String),
    #[error("singular pivot encountered in LU solve")]
    SingularPivot,
    #[error("iterative tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("BiCGStab did not converge after {iterations} iterations (relative residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("BiCGStab broke down after {iterations} iterations (relative residual {residual:e})")]
    Breakdown { iterations: usize, residual: f64 },
    #[error("refusing to factor a {dim}-unknown system for a condition estimate (limit {max})")]
    Refused { dim: usize, max: usize },
    #[error("MatrixMarket parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}
