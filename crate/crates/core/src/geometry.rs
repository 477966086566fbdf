//! Obstacle geometry inside the unit box and the extensions of the boundary
//! normal and boundary data into the penalized region.
//!
//! The fluid domain is either a disk or an axis-aligned square centred in the
//! box. Everything outside its closure (plus the interface itself) is the
//! penalized region, where `chi = 1`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

/// Default absolute tolerance used to classify points on the interface when
/// no grid is at hand.
pub const DEFAULT_INTERFACE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("obstacle size must satisfy 0 < R < 1/2, got {0}")]
    BadRadius(f64),
    #[error("normal extension is undefined at the disk centre ({x}, {y})")]
    SingularCentre { x: f64, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    DiskInSquare,
    SquareInSquare,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::DiskInSquare => f.write_str("disk"),
            Shape::SquareInSquare => f.write_str("square"),
        }
    }
}

/// Fluid domain: a disk of radius `radius` or the square `]c - R, c + R[^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub shape: Shape,
    /// Disk radius, or half the side of the square.
    pub radius: f64,
    pub center: [f64; 2],
}

impl DomainSpec {
    pub fn disk(radius: f64) -> Result<Self, GeometryError> {
        Self::checked(Shape::DiskInSquare, radius)
    }

    pub fn square(half_width: f64) -> Result<Self, GeometryError> {
        Self::checked(Shape::SquareInSquare, half_width)
    }

    fn checked(shape: Shape, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0 && radius < 0.5) {
            return Err(GeometryError::BadRadius(radius));
        }
        Ok(Self {
            shape,
            radius,
            center: [0.5, 0.5],
        })
    }

    /// Level function: negative in the fluid, zero on the interface.
    /// Disk: `r - R`. Square: `max(|x - x0|, |y - y0|) - R`.
    pub fn psi(&self, x: f64, y: f64) -> f64 {
        let dx = x - self.center[0];
        let dy = y - self.center[1];
        match self.shape {
            Shape::DiskInSquare => dx.hypot(dy) - self.radius,
            Shape::SquareInSquare => dx.abs().max(dy.abs()) - self.radius,
        }
    }

    /// `div n` of the extended normal. `1/r` for the disk (2-D), zero for the
    /// square away from the diagonal seams.
    pub fn laplacian_psi(&self, x: f64, y: f64) -> f64 {
        match self.shape {
            Shape::DiskInSquare => {
                1.0 / (x - self.center[0]).hypot(y - self.center[1])
            }
            Shape::SquareInSquare => 0.0,
        }
    }

    pub fn chi_at(&self, x: f64, y: f64) -> u8 {
        self.chi_at_tol(x, y, DEFAULT_INTERFACE_TOL)
    }

    /// 1 on the closed penalized region (interface included), 0 in the open
    /// fluid domain.
    pub fn chi_at_tol(&self, x: f64, y: f64, tol: f64) -> u8 {
        u8::from(self.psi(x, y) >= -tol)
    }

    pub fn on_interface(&self, x: f64, y: f64, tol: f64) -> bool {
        self.psi(x, y).abs() <= tol
    }

    /// Point of the interface at parameter `xi` in `[0, 1)`, with the
    /// geometric outward normal there.
    ///
    /// Disk: angle `2 pi xi`. Square: arclength fraction counter-clockwise
    /// from the lower-left corner.
    pub fn boundary_point(&self, xi: f64) -> ([f64; 2], [f64; 2]) {
        let xi = xi.rem_euclid(1.0);
        let [cx, cy] = self.center;
        let r = self.radius;
        match self.shape {
            Shape::DiskInSquare => {
                let (s, c) = (2.0 * PI * xi).sin_cos();
                ([cx + r * c, cy + r * s], [c, s])
            }
            Shape::SquareInSquare => {
                let side = 2.0 * r;
                let s = 8.0 * r * xi;
                if s < side {
                    ([cx - r + s, cy - r], [0.0, -1.0])
                } else if s < 2.0 * side {
                    ([cx + r, cy - r + (s - side)], [1.0, 0.0])
                } else if s < 3.0 * side {
                    ([cx + r - (s - 2.0 * side), cy + r], [0.0, 1.0])
                } else {
                    ([cx - r, cy + r - (s - 3.0 * side)], [-1.0, 0.0])
                }
            }
        }
    }
}

/// How the normal and boundary data are assigned at the four corners of a
/// square obstacle, where the one-sided limits disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CornerRule {
    /// Limit along the horizontal side (top or bottom) meeting the corner.
    #[default]
    PlusX,
    /// Limit along the vertical side (left or right) meeting the corner.
    MinusY,
    /// Average of both one-sided limits.
    Mean,
}

/// Boundary data `g~(x, y, n~)` on the interface, given the interface point
/// and the outward normal used there.
pub type BoundaryFn = Arc<dyn Fn(f64, f64, [f64; 2]) -> f64 + Send + Sync>;

/// Pointwise values of the extension fields at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeFields {
    pub chi: f64,
    pub normal: [f64; 2],
    pub g: f64,
}

/// Evaluators for `chi`, the extended normal `n`, the extended data `g` and the
/// level function `psi`.
#[derive(Clone)]
pub struct ExtensionFields {
    domain: DomainSpec,
    gtilde: BoundaryFn,
    corner_rule: CornerRule,
    tol: f64,
}

impl fmt::Debug for ExtensionFields {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExtensionFields")
            .field("domain", &self.domain)
            .field("corner_rule", &self.corner_rule)
            .field("tol", &self.tol)
            .finish_non_exhaustive()
    }
}

/// Which straight side of the square a point is attached to.
#[derive(Debug, Clone, Copy)]
enum Side {
    /// `x = x0 +- R`, normal `(+-1, 0)`.
    Vertical(f64),
    /// `y = y0 +- R`, normal `(0, +-1)`.
    Horizontal(f64),
}

fn sign(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

impl ExtensionFields {
    pub fn new(domain: DomainSpec, gtilde: BoundaryFn, corner_rule: CornerRule, tol: f64) -> Self {
        Self {
            domain,
            gtilde,
            corner_rule,
            tol,
        }
    }

    /// Interface tolerance `h * 1e-9` for a mesh of size `h`.
    pub fn for_mesh(domain: DomainSpec, gtilde: BoundaryFn, corner_rule: CornerRule, h: f64) -> Self {
        Self::new(domain, gtilde, corner_rule, h * 1e-9)
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    pub fn corner_rule(&self) -> CornerRule {
        self.corner_rule
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn gtilde(&self) -> &BoundaryFn {
        &self.gtilde
    }

    pub fn chi(&self, x: f64, y: f64) -> f64 {
        f64::from(self.domain.chi_at_tol(x, y, self.tol))
    }

    pub fn psi(&self, x: f64, y: f64) -> f64 {
        self.domain.psi(x, y)
    }

    pub fn laplacian_psi(&self, x: f64, y: f64) -> f64 {
        self.domain.laplacian_psi(x, y)
    }

    fn is_square_corner(&self, dx: f64, dy: f64) -> bool {
        let r = self.domain.radius;
        (dx.abs() - r).abs() <= self.tol && (dy.abs() - r).abs() <= self.tol
    }

    /// Side a point takes its normal from. Diagonal seams go to the
    /// horizontal side.
    fn square_side(&self, dx: f64, dy: f64) -> Side {
        if dx.abs() > dy.abs() + self.tol {
            Side::Vertical(sign(dx))
        } else {
            Side::Horizontal(sign(dy))
        }
    }

    fn side_normal(side: Side) -> [f64; 2] {
        match side {
            Side::Vertical(s) => [s, 0.0],
            Side::Horizontal(s) => [0.0, s],
        }
    }

    fn side_data(&self, side: Side, x: f64, y: f64) -> f64 {
        let [cx, cy] = self.domain.center;
        let r = self.domain.radius;
        match side {
            Side::Vertical(s) => {
                let py = y.clamp(cy - r, cy + r);
                (self.gtilde)(cx + s * r, py, [s, 0.0])
            }
            Side::Horizontal(s) => {
                let px = x.clamp(cx - r, cx + r);
                (self.gtilde)(px, cy + s * r, [0.0, s])
            }
        }
    }

    /// Extended normal at `(x, y)`.
    pub fn normal_at(&self, x: f64, y: f64) -> Result<[f64; 2], GeometryError> {
        let dx = x - self.domain.center[0];
        let dy = y - self.domain.center[1];
        match self.domain.shape {
            Shape::DiskInSquare => {
                let r = dx.hypot(dy);
                if r == 0.0 {
                    return Err(GeometryError::SingularCentre { x, y });
                }
                Ok([dx / r, dy / r])
            }
            Shape::SquareInSquare => {
                if self.is_square_corner(dx, dy) {
                    let horizontal = Self::side_normal(Side::Horizontal(sign(dy)));
                    let vertical = Self::side_normal(Side::Vertical(sign(dx)));
                    return Ok(match self.corner_rule {
                        CornerRule::PlusX => horizontal,
                        CornerRule::MinusY => vertical,
                        CornerRule::Mean => [
                            0.5 * (horizontal[0] + vertical[0]),
                            0.5 * (horizontal[1] + vertical[1]),
                        ],
                    });
                }
                Ok(Self::side_normal(self.square_side(dx, dy)))
            }
        }
    }

    /// Extended boundary data at `(x, y)`: `g~` at the radial projection for
    /// the disk, at the orthogonal projection onto the attached side for the
    /// square.
    pub fn gdata_at(&self, x: f64, y: f64) -> Result<f64, GeometryError> {
        let [cx, cy] = self.domain.center;
        let dx = x - cx;
        let dy = y - cy;
        match self.domain.shape {
            Shape::DiskInSquare => {
                let [nx, ny] = self.normal_at(x, y)?;
                let r = self.domain.radius;
                Ok((self.gtilde)(cx + r * nx, cy + r * ny, [nx, ny]))
            }
            Shape::SquareInSquare => {
                if self.is_square_corner(dx, dy) {
                    let horizontal = self.side_data(Side::Horizontal(sign(dy)), x, y);
                    let vertical = self.side_data(Side::Vertical(sign(dx)), x, y);
                    return Ok(match self.corner_rule {
                        CornerRule::PlusX => horizontal,
                        CornerRule::MinusY => vertical,
                        CornerRule::Mean => 0.5 * (horizontal + vertical),
                    });
                }
                Ok(self.side_data(self.square_side(dx, dy), x, y))
            }
        }
    }

    /// `chi`, `n` and `g` at one point. Inside the fluid the normal and data
    /// are irrelevant and returned as zero.
    pub fn sample(&self, x: f64, y: f64) -> Result<NodeFields, GeometryError> {
        let chi = self.chi(x, y);
        if chi == 0.0 {
            return Ok(NodeFields {
                chi,
                normal: [0.0, 0.0],
                g: 0.0,
            });
        }
        Ok(NodeFields {
            chi,
            normal: self.normal_at(x, y)?,
            g: self.gdata_at(x, y)?,
        })
    }
}
