//! Advection–reaction solves `∇W·n + βW = g` in the penalized region by
//! integrating along the integral curves of the extended normal.
//!
//! Along `dX/dt = n(X)` starting on the interface the equation reduces to the
//! scalar ODE `dW/dt + β W = g`, whose solution is
//! `W(t) = V e^{-B(t)} + ∫_0^t g(s) e^{B(s) - B(t)} ds`, `B(t) = ∫_0^t β`.
//! Queries are traced backwards to the interface, so no inverse of the
//! characteristic map is ever needed.

use thiserror::Error;

use crate::geometry::{ExtensionFields, GeometryError, Shape};

/// Tolerance on the level function when locating interface and box hits.
pub const HIT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CharError {
    #[error("time step must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("characteristic did not reach {target} within {steps} steps from ({x}, {y})")]
    StepBudget {
        target: &'static str,
        steps: usize,
        x: f64,
        y: f64,
    },
    #[error("query ({x}, {y}) lies inside the fluid domain")]
    InFluid { x: f64, y: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A forward characteristic from the interface to the box boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct CharTrace {
    pub start: [f64; 2],
    /// `(t, X(t))`, starting at `(0, start)` and ending at the exit point.
    pub samples: Vec<(f64, [f64; 2])>,
    pub exit_time: f64,
}

fn axpy(p: [f64; 2], a: f64, v: [f64; 2]) -> [f64; 2] {
    [p[0] + a * v[0], p[1] + a * v[1]]
}

/// One classical RK4 step of `dX/dt = sign * n(X)`. For the square the
/// normal of the current point is used for every stage, so a step never
/// straddles two sides' directions.
fn rk4_step(fields: &ExtensionFields, p: [f64; 2], dt: f64, sign: f64) -> Result<[f64; 2], GeometryError> {
    let f = |q: [f64; 2]| -> Result<[f64; 2], GeometryError> {
        let n = fields.normal_at(q[0], q[1])?;
        Ok([sign * n[0], sign * n[1]])
    };
    let k1 = f(p)?;
    if fields.domain().shape == Shape::SquareInSquare {
        return Ok(axpy(p, dt, k1));
    }
    let k2 = f(axpy(p, 0.5 * dt, k1))?;
    let k3 = f(axpy(p, 0.5 * dt, k2))?;
    let k4 = f(axpy(p, dt, k3))?;
    Ok([
        p[0] + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        p[1] + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ])
}

fn check_step(dt: f64) -> Result<(), CharError> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(CharError::BadStep(dt))
    }
}

fn step_budget(dt: f64) -> usize {
    (16.0 / dt).ceil() as usize + 64
}

/// Signed distance-like level for the unit box: negative inside.
fn box_level(p: [f64; 2]) -> f64 {
    -(p[0].min(1.0 - p[0]).min(p[1]).min(1.0 - p[1]))
}

/// `(time, point)` samples along a characteristic.
type Samples = Vec<(f64, [f64; 2])>;

/// Integrates from `p` until `level` changes sign, then bisects the last step
/// length. Returns the samples (including the hit point) and the hit time.
fn integrate_until(
    fields: &ExtensionFields,
    p0: [f64; 2],
    dt: f64,
    sign: f64,
    level: impl Fn([f64; 2]) -> f64,
    target: &'static str,
) -> Result<(Samples, f64), CharError> {
    let budget = step_budget(dt);
    let mut samples = vec![(0.0, p0)];
    let mut p = p0;
    let mut t = 0.0;
    for _ in 0..budget {
        let next = rk4_step(fields, p, dt, sign)?;
        if level(next) >= 0.0 {
            let (mut lo, mut hi) = (0.0, dt);
            let mut hit = next;
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let q = rk4_step(fields, p, mid, sign)?;
                if level(q) >= 0.0 {
                    hi = mid;
                    hit = q;
                } else {
                    lo = mid;
                }
                if level(hit).abs() <= HIT_TOL || hi - lo <= f64::EPSILON * dt {
                    break;
                }
            }
            samples.push((t + hi, hit));
            return Ok((samples, t + hi));
        }
        t += dt;
        p = next;
        samples.push((t, p));
    }
    Err(CharError::StepBudget {
        target,
        steps: budget,
        x: p0[0],
        y: p0[1],
    })
}

/// Traces `dX/dt = n(X)` from the interface point `γ(ξ)` until it leaves the
/// unit box.
pub fn trace_from_boundary(fields: &ExtensionFields, xi: f64, dt: f64) -> Result<CharTrace, CharError> {
    check_step(dt)?;
    let (start, _) = fields.domain().boundary_point(xi);
    let (samples, exit_time) = integrate_until(fields, start, dt, 1.0, box_level, "the box boundary")?;
    Ok(CharTrace {
        start,
        samples,
        exit_time,
    })
}

/// Foot point on the interface of the characteristic through `query`, with
/// the travel time from the foot to the query.
pub fn foot_point(fields: &ExtensionFields, query: [f64; 2], dt: f64) -> Result<([f64; 2], f64), CharError> {
    check_step(dt)?;
    let psi0 = fields.psi(query[0], query[1]);
    if psi0 < -fields.tol() {
        return Err(CharError::InFluid {
            x: query[0],
            y: query[1],
        });
    }
    if psi0 <= HIT_TOL {
        return Ok((query, 0.0));
    }
    // backward in time: the level ψ decreases to zero
    let (samples, time) = integrate_until(fields, query, dt, -1.0, |p| -fields.psi(p[0], p[1]), "the interface")?;
    Ok((samples.last().expect("at least one sample").1, time))
}

/// Value at `query` of the solution of `∇W·n + βW = g` with `W = V` on the
/// interface.
///
/// The characteristic is traced back to the interface, then re-traced with a
/// uniform step (an even number of steps no longer than `dt`) while
/// integrating `∫β` with the same RK4 stages; the source integral uses
/// composite Simpson on those samples.
pub fn solve_advection_reaction(
    fields: &ExtensionFields,
    beta: &dyn Fn(f64, f64) -> f64,
    gsrc: &dyn Fn(f64, f64) -> f64,
    boundary: &dyn Fn(f64, f64) -> f64,
    query: [f64; 2],
    dt: f64,
) -> Result<f64, CharError> {
    let (foot, total) = foot_point(fields, query, dt)?;
    if total == 0.0 {
        return Ok(boundary(foot[0], foot[1]));
    }
    let mut m = (total / dt).ceil() as usize;
    m = (m + m % 2).max(2);
    let step = total / m as f64;

    // State (X, B̂) with B̂(τ) = ∫_0^τ β along the backward path from the query.
    let rhs = |p: [f64; 2]| -> Result<([f64; 2], f64), GeometryError> {
        let n = fields.normal_at(p[0], p[1])?;
        Ok(([-n[0], -n[1]], beta(p[0], p[1])))
    };
    let square = fields.domain().shape == Shape::SquareInSquare;
    let mut p = query;
    let mut bhat = 0.0;
    let weight = |k: usize| -> f64 {
        if k == 0 || k == m {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut integral = weight(0) * gsrc(p[0], p[1]);
    for k in 1..=m {
        let (d1, b1) = rhs(p)?;
        let (next, db) = if square {
            let (_, b2) = rhs(axpy(p, 0.5 * step, d1))?;
            let (_, b4) = rhs(axpy(p, step, d1))?;
            (axpy(p, step, d1), step / 6.0 * (b1 + 4.0 * b2 + b4))
        } else {
            let (d2, b2) = rhs(axpy(p, 0.5 * step, d1))?;
            let (d3, b3) = rhs(axpy(p, 0.5 * step, d2))?;
            let (d4, b4) = rhs(axpy(p, step, d3))?;
            (
                [
                    p[0] + step / 6.0 * (d1[0] + 2.0 * d2[0] + 2.0 * d3[0] + d4[0]),
                    p[1] + step / 6.0 * (d1[1] + 2.0 * d2[1] + 2.0 * d3[1] + d4[1]),
                ],
                step / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
            )
        };
        p = if k == m { foot } else { next };
        bhat += db;
        integral += weight(k) * gsrc(p[0], p[1]) * (-bhat).exp();
    }
    integral *= step / 3.0;
    Ok(boundary(foot[0], foot[1]) * (-bhat).exp() + integral)
}

/// Dual limit field `Q̄⁰`: solves `∇Q·n + Δψ Q = -b⁻¹` with the constant
/// `boundary_value` on the interface.
pub fn qbar0(
    fields: &ExtensionFields,
    boundary_value: f64,
    b_neg1: &dyn Fn(f64, f64) -> f64,
    query: [f64; 2],
    dt: f64,
) -> Result<f64, CharError> {
    let beta = |x: f64, y: f64| fields.laplacian_psi(x, y);
    let src = |x: f64, y: f64| -b_neg1(x, y);
    solve_advection_reaction(fields, &beta, &src, &|_, _| boundary_value, query, dt)
}
