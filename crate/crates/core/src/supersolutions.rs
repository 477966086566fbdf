//! Audits of the explicit supersolution pairs `(p_ε, q_ε)` for the dual
//! problem in one dimension and in the radially symmetric 2-D case.
//!
//! Every inequality is evaluated with analytic derivatives on a uniform grid
//! of each interval; the report records the worst value of each condition.

use std::fmt;

use crate::bessel::bessel_i;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupersolCase {
    OneD,
    Spherical,
}

impl fmt::Display for SupersolCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SupersolCase::OneD => "1d",
            SupersolCase::Spherical => "spherical",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupersolReport {
    pub case: SupersolCase,
    pub eps: f64,
    pub grid_pts: usize,
    /// Positivity target.
    pub beta: f64,
    /// Tolerance applied to residuals and transmission gaps.
    pub tol: f64,
    pub min_p: f64,
    pub min_q: f64,
    /// Most negative value of the `p` inequality residual `a_ε`.
    pub min_residual_p: f64,
    /// Most negative value of the `q` inequality residual `b_ε`.
    pub min_residual_q: f64,
    /// `|p(1) - q(1)|` and the flux-condition mismatch at the interface.
    pub transmission_gap: [f64; 2],
    /// `|p'(0)|` (spherical only, zero otherwise).
    pub p_slope_at_origin: f64,
    /// `max |q|` over the band next to the interface.
    pub linf_inner: f64,
    /// `max |q|` over the band away from the interface.
    pub linf_outer: f64,
}

impl SupersolReport {
    pub fn pass(&self) -> bool {
        self.min_p >= self.beta
            && self.min_q >= self.beta
            && self.min_residual_p >= -self.tol
            && self.min_residual_q >= -self.tol
            && self.transmission_gap[0] <= self.tol
            && self.transmission_gap[1] <= self.tol
            && self.p_slope_at_origin <= self.tol
    }
}

/// `[a, b]` sampled at `m + 1` uniform nodes.
fn nodes(a: f64, b: f64, m: usize) -> impl Iterator<Item = f64> {
    (0..=m).map(move |k| a + (b - a) * k as f64 / m as f64)
}

/// `q_ε(x) = 1 + e^{(x-1)/ε}/ε - e^{-1/ε}/ε` with its first two derivatives.
fn q1d(eps: f64, x: f64) -> (f64, f64, f64) {
    let e = ((x - 1.0) / eps).exp();
    let q = 1.0 + e / eps - (-1.0 / eps).exp() / eps;
    let dq = e / eps / eps;
    (q, dq, dq / eps)
}

/// One-dimensional pair: `q_ε` on `(0, 1)` and the affine `p_ε` on `(1, 2)`
/// fixed by the transmission conditions. Bands split at `x = 1/2`.
pub fn check_1d(eps: f64, m: usize) -> SupersolReport {
    let (q1, dq1, _) = q1d(eps, 1.0);
    let slope = dq1 - q1 / eps;
    let p = |x: f64| q1 + slope * (x - 1.0);

    let mut min_q = f64::INFINITY;
    let mut min_res_q = f64::INFINITY;
    let mut linf_inner: f64 = 0.0;
    let mut linf_outer: f64 = 0.0;
    for x in nodes(0.0, 1.0, m) {
        let (q, dq, d2q) = q1d(eps, x);
        min_q = min_q.min(q);
        min_res_q = min_res_q.min(-d2q + dq / eps + q);
        if x >= 0.5 {
            linf_inner = linf_inner.max(q.abs());
        }
        if x <= 0.5 {
            linf_outer = linf_outer.max(q.abs());
        }
    }
    let mut min_p = f64::INFINITY;
    let mut min_res_p = f64::INFINITY;
    for x in nodes(1.0, 2.0, m) {
        // p'' = 0
        let v = p(x);
        min_p = min_p.min(v);
        min_res_p = min_res_p.min(v);
    }
    SupersolReport {
        case: SupersolCase::OneD,
        eps,
        grid_pts: m + 1,
        beta: 0.5,
        tol: 1e-12,
        min_p,
        min_q,
        min_residual_p: min_res_p,
        min_residual_q: min_res_q,
        transmission_gap: [(p(1.0) - q1).abs(), (slope - (dq1 - q1 / eps)).abs()],
        p_slope_at_origin: 0.0,
        linf_inner,
        linf_outer,
    }
}

/// Coefficients `(d_ε, e_ε)` of `q_ε(r) = d_ε/r + (e_ε/ε) e^{-(r-1)/ε}`
/// matching `p_ε = I₀(r)/ε` in value and flux at `r = 1`.
pub fn spherical_coefficients(eps: f64) -> (f64, f64) {
    let i0 = bessel_i(0, 1.0).expect("in domain");
    let i1 = bessel_i(1, 1.0).expect("in domain");
    let d = i1 / (1.0 - eps);
    (d, i0 - eps * d)
}

/// Radial pair: `p_ε = I₀(r)/ε` on `(0, 1)`, `q_ε` on `(1, 2)`. Bands split at
/// `r = 3/2`.
pub fn check_spherical(eps: f64, m: usize) -> SupersolReport {
    let (d, e) = spherical_coefficients(eps);
    let i0 = |r: f64| bessel_i(0, r).expect("in domain");
    let i1 = |r: f64| bessel_i(1, r).expect("in domain");
    // I1(r)/r, continuous at the origin
    let i1_over_r = |r: f64| if r == 0.0 { 0.5 } else { i1(r) / r };
    let q = |r: f64| {
        let ex = e / eps * (-(r - 1.0) / eps).exp();
        (d / r + ex, -d / (r * r) - ex / eps, 2.0 * d / (r * r * r) + ex / (eps * eps))
    };

    let mut min_p = f64::INFINITY;
    let mut min_res_p = f64::INFINITY;
    for r in nodes(0.0, 1.0, m) {
        let p = i0(r) / eps;
        let dp_over_r = i1_over_r(r) / eps;
        let d2p = (i0(r) - i1_over_r(r)) / eps;
        min_p = min_p.min(p);
        min_res_p = min_res_p.min(-d2p - dp_over_r + p);
    }
    let mut min_q = f64::INFINITY;
    let mut min_res_q = f64::INFINITY;
    let mut linf_inner: f64 = 0.0;
    let mut linf_outer: f64 = 0.0;
    for r in nodes(1.0, 2.0, m) {
        let (v, dv, d2v) = q(r);
        min_q = min_q.min(v);
        min_res_q = min_res_q.min(-d2v - (1.0 / r + 1.0 / eps) * dv + (1.0 - 1.0 / (eps * r)) * v);
        if r <= 1.5 {
            linf_inner = linf_inner.max(v.abs());
        }
        if r >= 1.5 {
            linf_outer = linf_outer.max(v.abs());
        }
    }
    let (q1, dq1, _) = q(1.0);
    let (p1, dp1) = (i0(1.0) / eps, i1(1.0) / eps);
    SupersolReport {
        case: SupersolCase::Spherical,
        eps,
        grid_pts: m + 1,
        beta: 0.25,
        tol: 1e-10,
        min_p,
        min_q,
        min_residual_p: min_res_p,
        min_residual_q: min_res_q,
        transmission_gap: [(p1 - q1).abs(), (dp1 - (dq1 + q1 / eps)).abs()],
        p_slope_at_origin: (i1(0.0) / eps).abs(),
        linf_inner,
        linf_outer,
    }
}
