//! Manufactured solutions and the `ε → 0` limit field.

use std::sync::Arc;

use thiserror::Error;

use crate::assembly::PenalConfig;
use crate::characteristics::{solve_advection_reaction, CharError};
use crate::geometry::{BoundaryFn, CornerRule, DomainSpec, ExtensionFields, GeometryError, Shape};
use crate::grid::Grid;

/// `u = sin(c (x + y - 1))`, `f = -Δu + u`, `g~ = ∇u·n~ + αu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ManufacturedCase {
    DiskSin { c: f64 },
    /// The square-obstacle case, `c = 5`.
    SquareSin5,
}

impl ManufacturedCase {
    pub fn c(&self) -> f64 {
        match *self {
            ManufacturedCase::DiskSin { c } => c,
            ManufacturedCase::SquareSin5 => 5.0,
        }
    }

    pub fn exact(&self, x: f64, y: f64) -> f64 {
        (self.c() * (x + y - 1.0)).sin()
    }

    pub fn gradient(&self, x: f64, y: f64) -> [f64; 2] {
        let c = self.c();
        let d = c * (c * (x + y - 1.0)).cos();
        [d, d]
    }

    pub fn source(&self, x: f64, y: f64) -> f64 {
        let c = self.c();
        (2.0 * c * c + 1.0) * (c * (x + y - 1.0)).sin()
    }

    /// Robin trace `∇u·n + αu` at `(x, y)`.
    pub fn trace(&self, alpha: f64, x: f64, y: f64, n: [f64; 2]) -> f64 {
        let [gx, gy] = self.gradient(x, y);
        gx * n[0] + gy * n[1] + alpha * self.exact(x, y)
    }

    pub fn gtilde(&self, alpha: f64) -> BoundaryFn {
        let case = *self;
        Arc::new(move |x, y, n| case.trace(alpha, x, y, n))
    }
}

#[derive(Debug, Error)]
pub enum ReferenceError {
    #[error("the limit field needs a manufactured source")]
    NotManufactured,
    #[error(transparent)]
    Characteristics(#[from] CharError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// The limit `u_lim`: the exact solution in the fluid and `W̄⁰`, the solution
/// of `∇W·n + αW = g` with `W = u` on the interface, in the penalized region.
#[derive(Debug, Clone)]
pub struct LimitField {
    case: ManufacturedCase,
    alpha: f64,
    fields: ExtensionFields,
    dt: f64,
}

impl LimitField {
    /// Characteristics are integrated with `dt = h / 4`.
    pub fn new(case: ManufacturedCase, alpha: f64, domain: DomainSpec, corner_rule: CornerRule, h: f64) -> Self {
        Self {
            case,
            alpha,
            fields: ExtensionFields::for_mesh(domain, case.gtilde(alpha), corner_rule, h),
            dt: 0.25 * h,
        }
    }

    pub fn from_config(cfg: &PenalConfig, grid: &Grid) -> Result<Self, ReferenceError> {
        let case = cfg.source.manufactured().ok_or(ReferenceError::NotManufactured)?;
        Ok(Self::new(case, cfg.alpha, cfg.domain, cfg.corner_rule, grid.h()))
    }

    pub fn case(&self) -> ManufacturedCase {
        self.case
    }

    pub fn fields(&self) -> &ExtensionFields {
        &self.fields
    }

    /// `W̄⁰(x, y)` for a point of the closed penalized region.
    pub fn wbar0(&self, x: f64, y: f64) -> Result<f64, ReferenceError> {
        let f = &self.fields;
        let psi = f.psi(x, y);
        if psi <= f.tol() {
            return Ok(self.case.exact(x, y));
        }
        if f.domain().shape == Shape::SquareInSquare && self.alpha > 0.0 {
            // n and g are constant along the straight rays off each side
            let [cx, cy] = f.domain().center;
            let r = f.domain().radius;
            let n = f.normal_at(x, y)?;
            let (foot, dist) = if n[0] != 0.0 {
                ([cx + n[0] * r, y.clamp(cy - r, cy + r)], (x - cx).abs() - r)
            } else {
                ([x.clamp(cx - r, cx + r), cy + n[1] * r], (y - cy).abs() - r)
            };
            let g = f.gdata_at(x, y)?;
            let ga = g / self.alpha;
            return Ok((self.case.exact(foot[0], foot[1]) - ga) * (-self.alpha * dist).exp() + ga);
        }
        let alpha = self.alpha;
        let gsrc = |px: f64, py: f64| f.gdata_at(px, py).unwrap_or(f64::NAN);
        let v = |px: f64, py: f64| self.case.exact(px, py);
        Ok(solve_advection_reaction(f, &|_, _| alpha, &gsrc, &v, [x, y], self.dt)?)
    }

    /// Central-difference gradient of `W̄⁰` (step `1e-6`), for use away from
    /// the interface and the square's diagonal seams.
    pub fn wbar0_gradient(&self, x: f64, y: f64) -> Result<[f64; 2], ReferenceError> {
        let d = 1e-6;
        Ok([
            (self.wbar0(x + d, y)? - self.wbar0(x - d, y)?) / (2.0 * d),
            (self.wbar0(x, y + d)? - self.wbar0(x, y - d)?) / (2.0 * d),
        ])
    }

    pub fn u_lim(&self, x: f64, y: f64) -> Result<f64, ReferenceError> {
        if self.fields.chi(x, y) == 0.0 {
            Ok(self.case.exact(x, y))
        } else {
            self.wbar0(x, y)
        }
    }

    /// Leading-order boundary-layer model `u_lim (1 - e^{-c φ / ε})`, `φ` the
    /// distance to the box and `c = -n·∇φ` on the nearest box side (ties go to
    /// the `x` sides).
    pub fn bl_profile(&self, x: f64, y: f64, eps: f64) -> Result<f64, ReferenceError> {
        let ulim = self.u_lim(x, y)?;
        if self.fields.chi(x, y) == 0.0 {
            return Ok(ulim);
        }
        let n = self.fields.normal_at(x, y)?;
        let (phi_x, grad_x) = if x <= 1.0 - x { (x, [1.0, 0.0]) } else { (1.0 - x, [-1.0, 0.0]) };
        let (phi_y, grad_y) = if y <= 1.0 - y { (y, [0.0, 1.0]) } else { (1.0 - y, [0.0, -1.0]) };
        let (phi, grad) = if phi_x <= phi_y { (phi_x, grad_x) } else { (phi_y, grad_y) };
        let c = -(n[0] * grad[0] + n[1] * grad[1]);
        Ok(ulim * (1.0 - (-c * phi / eps).exp()))
    }
}
