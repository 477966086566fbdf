//! Condition-number bounds and estimates.

use super::solve::{jacobi_precondition, LuFactor};
use super::{LinalgError, SparseMatrix};
use crate::assembly::{AssembledSystem, Scheme};

/// Largest system for which `cond2_estimate` will factor the matrix
/// (`N = 150`).
pub const COND2_MAX_DIM: usize = 151 * 151;

/// `||A||_inf`, an upper bound on `kappa_inf(A)` whenever `||A^-1||_inf <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondInfBound {
    pub value: f64,
    /// `false` when the stability bound `||A^-1||_inf <= 1` is not known for
    /// the scheme that produced the matrix.
    pub proven: bool,
}

pub fn cond_inf_bound(system: &AssembledSystem) -> CondInfBound {
    let proven = !matches!(system.scheme, Some(Scheme::Upwind2));
    if !proven {
        log::warn!("||A^-1||_inf <= 1 is not established for the second-order scheme; the bound is indicative only");
    }
    CondInfBound {
        value: system.matrix.inf_norm(),
        proven,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cond2Estimate {
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub kappa: f64,
    /// Both power iterations met the relative stopping test.
    pub converged: bool,
    pub iterations: usize,
}

/// Deterministic start vector with no special alignment to grid modes.
fn start_vector(n: usize) -> Vec<f64> {
    (0..n)
        .map(|k| 1.0 + 0.5 * ((k as f64) * 0.754_877_666).sin())
        .collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Power iteration for the dominant eigenvalue of a symmetric positive
/// operator. Returns `(lambda, converged, iterations)`.
fn power_iteration(
    n: usize,
    iters: usize,
    rel_tol: f64,
    mut apply: impl FnMut(&[f64]) -> Result<Vec<f64>, LinalgError>,
) -> Result<(f64, bool, usize), LinalgError> {
    let mut v = start_vector(n);
    normalize(&mut v);
    let mut lambda = 0.0;
    for it in 1..=iters {
        let mut w = apply(&v)?;
        let rayleigh: f64 = v.iter().zip(&w).map(|(a, b)| a * b).sum();
        normalize(&mut w);
        v = w;
        if it > 1 && (rayleigh - lambda).abs() <= rel_tol * rayleigh.abs() {
            return Ok((rayleigh, true, it));
        }
        lambda = rayleigh;
    }
    Ok((lambda, false, iters))
}

/// Estimate of `kappa_2(A) = sigma_max / sigma_min` by power iteration on
/// `A^T A` and inverse power iteration through an LU factorization.
pub fn cond2_estimate(system: &AssembledSystem, iters: usize) -> Result<Cond2Estimate, LinalgError> {
    cond2_of_matrix(&system.matrix, iters)
}

/// `cond2_estimate` of the Jacobi-scaled matrix `D^-1 A`.
pub fn cond2_estimate_jacobi(system: &AssembledSystem, iters: usize) -> Result<Cond2Estimate, LinalgError> {
    let scaled = jacobi_precondition(system)?;
    cond2_of_matrix(&scaled.matrix, iters)
}

fn cond2_of_matrix(a: &SparseMatrix, iters: usize) -> Result<Cond2Estimate, LinalgError> {
    let n = a.dim();
    if n > COND2_MAX_DIM {
        return Err(LinalgError::Refused { dim: n, max: COND2_MAX_DIM });
    }
    let rel_tol = 1e-9;
    let mut av = vec![0.0; n];
    let (lmax, conv_max, it_max) = power_iteration(n, iters, rel_tol, |v| {
        a.matvec(v, &mut av);
        let mut out = vec![0.0; n];
        a.matvec_transpose(&av, &mut out);
        Ok(out)
    })?;
    let lu = LuFactor::new(a)?;
    // (A^T A)^-1 = A^-1 A^-T
    let (linv, conv_min, it_min) = power_iteration(n, iters, rel_tol, |v| {
        let z = lu.solve_transpose(v)?;
        lu.solve(&z)
    })?;
    let sigma_max = lmax.sqrt();
    let sigma_min = 1.0 / linv.sqrt();
    Ok(Cond2Estimate {
        sigma_max,
        sigma_min,
        kappa: sigma_max / sigma_min,
        converged: conv_max && conv_min,
        iterations: it_max.max(it_min),
    })
}
