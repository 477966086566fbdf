//! Assembly of the penalized finite-difference system `A_h X_h = B_h`.
//!
//! Interior rows discretize
//! `-Δu + u + (χ/ε)(n·∇u + αu) = (1 - χ) f + (χ/ε) g`
//! with a 5-point Laplacian and upwind differences for the advection term;
//! box-boundary rows are identity rows with zero right-hand side.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{BoundaryFn, CornerRule, DomainSpec, ExtensionFields, GeometryError, Shape};
use crate::grid::Grid;
use crate::linalg::{LinalgError, SparseMatrix};
use crate::reference::ManufacturedCase;

pub type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// First-order upwind advection.
    Upwind1,
    /// Second-order (three-point) upwind advection.
    Upwind2,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Upwind1 => "upwind1",
            Scheme::Upwind2 => "upwind2",
        })
    }
}

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("eps must be > 0, got {0}")]
    BadEps(f64),
    #[error("alpha must be >= 0, got {0}")]
    BadAlpha(f64),
    #[error("configuration requests {found} but the {expected} assembler was called")]
    SchemeMismatch { expected: Scheme, found: Scheme },
    #[error("the second-order scheme is only enabled for the square obstacle")]
    Upwind2NeedsSquare,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Right-hand side data: either a manufactured solution or user closures.
#[derive(Clone)]
pub enum Source {
    Manufactured(ManufacturedCase),
    Custom {
        f: ScalarFn,
        /// Boundary data `g~(x, y, n~)` on the interface.
        gtilde: BoundaryFn,
    },
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Manufactured(case) => f.debug_tuple("Manufactured").field(case).finish(),
            Source::Custom { .. } => f.write_str("Custom"),
        }
    }
}

impl Source {
    pub fn f(&self, x: f64, y: f64) -> f64 {
        match self {
            Source::Manufactured(case) => case.source(x, y),
            Source::Custom { f, .. } => f(x, y),
        }
    }

    pub fn gtilde(&self, alpha: f64) -> BoundaryFn {
        match self {
            Source::Manufactured(case) => case.gtilde(alpha),
            Source::Custom { gtilde, .. } => gtilde.clone(),
        }
    }

    pub fn manufactured(&self) -> Option<ManufacturedCase> {
        match self {
            Source::Manufactured(case) => Some(*case),
            Source::Custom { .. } => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PenalConfig {
    pub eps: f64,
    pub alpha: f64,
    pub scheme: Scheme,
    pub domain: DomainSpec,
    pub corner_rule: CornerRule,
    /// Permit the second-order scheme on the disk.
    pub allow_upwind2_disk: bool,
    pub source: Source,
}

impl PenalConfig {
    pub fn new(eps: f64, alpha: f64, scheme: Scheme, domain: DomainSpec, source: Source) -> Self {
        Self {
            eps,
            alpha,
            scheme,
            domain,
            corner_rule: CornerRule::default(),
            allow_upwind2_disk: false,
            source,
        }
    }

    pub fn validate(&self) -> Result<(), AssemblyError> {
        if !(self.eps.is_finite() && self.eps > 0.0) {
            return Err(AssemblyError::BadEps(self.eps));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(AssemblyError::BadAlpha(self.alpha));
        }
        if self.scheme == Scheme::Upwind2
            && self.domain.shape != Shape::SquareInSquare
            && !self.allow_upwind2_disk
        {
            return Err(AssemblyError::Upwind2NeedsSquare);
        }
        Ok(())
    }

    /// Extension fields for this configuration on `grid`.
    pub fn extension_fields(&self, grid: &Grid) -> ExtensionFields {
        ExtensionFields::for_mesh(self.domain, self.source.gtilde(self.alpha), self.corner_rule, grid.h())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssembledSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Scheme that produced the matrix, `None` for hand-built systems.
    pub scheme: Option<Scheme>,
}

impl AssembledSystem {
    pub fn new(matrix: SparseMatrix, rhs: Vec<f64>) -> Self {
        Self {
            matrix,
            rhs,
            scheme: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Builds the system for `cfg.scheme`.
pub fn assemble(grid: &Grid, cfg: &PenalConfig) -> Result<AssembledSystem, AssemblyError> {
    let fields = cfg.extension_fields(grid);
    match cfg.scheme {
        Scheme::Upwind1 => assemble_upwind1(grid, cfg, &fields),
        Scheme::Upwind2 => assemble_upwind2(grid, cfg, &fields),
    }
}

pub fn assemble_upwind1(
    grid: &Grid,
    cfg: &PenalConfig,
    fields: &ExtensionFields,
) -> Result<AssembledSystem, AssemblyError> {
    check_scheme(cfg, Scheme::Upwind1)?;
    build(grid, cfg, fields, Scheme::Upwind1)
}

pub fn assemble_upwind2(
    grid: &Grid,
    cfg: &PenalConfig,
    fields: &ExtensionFields,
) -> Result<AssembledSystem, AssemblyError> {
    check_scheme(cfg, Scheme::Upwind2)?;
    build(grid, cfg, fields, Scheme::Upwind2)
}

fn check_scheme(cfg: &PenalConfig, expected: Scheme) -> Result<(), AssemblyError> {
    if cfg.scheme != expected {
        return Err(AssemblyError::SchemeMismatch {
            expected,
            found: cfg.scheme,
        });
    }
    cfg.validate()
}

/// One direction of the advection stencil.
struct Axis {
    /// Grid index along this direction.
    idx: usize,
    /// Flat-index stride.
    stride: usize,
    /// Normal component.
    n: f64,
    /// Use the forward (`+stride`) side.
    forward: bool,
}

struct Row {
    entries: Vec<(usize, f64)>,
    rhs: f64,
    degraded: bool,
}

fn build(
    grid: &Grid,
    cfg: &PenalConfig,
    fields: &ExtensionFields,
    scheme: Scheme,
) -> Result<AssembledSystem, AssemblyError> {
    let cells = grid.cells();
    let dim = grid.dim();
    let rows: Vec<Row> = (0..dim)
        .into_par_iter()
        .with_min_len(256)
        .map(|node| assemble_row(grid, cfg, fields, scheme, node))
        .collect::<Result<_, _>>()?;

    let degraded = rows.iter().filter(|r| r.degraded).count();
    if degraded > 0 {
        log::warn!("{degraded} rows fell back to first-order upwinding near the box (N = {cells})");
    }
    let mut rhs = Vec::with_capacity(dim);
    let entries = rows
        .into_iter()
        .map(|r| {
            rhs.push(r.rhs);
            r.entries
        })
        .collect();
    let matrix = SparseMatrix::from_rows(dim, entries)?;
    Ok(AssembledSystem {
        matrix,
        rhs,
        scheme: Some(scheme),
    })
}

fn assemble_row(
    grid: &Grid,
    cfg: &PenalConfig,
    fields: &ExtensionFields,
    scheme: Scheme,
    node: usize,
) -> Result<Row, AssemblyError> {
    let cells = grid.cells();
    let (i, j) = (node / (cells + 1), node % (cells + 1));
    if grid.on_box_boundary(i, j) {
        return Ok(Row {
            entries: vec![(node, 1.0)],
            rhs: 0.0,
            degraded: false,
        });
    }
    let h = grid.h();
    let h2 = h * h;
    let (eps, alpha) = (cfg.eps, cfg.alpha);
    let (x, y) = grid.point(i, j);
    let nf = fields.sample(x, y)?;
    let chi = nf.chi;
    let [nx, ny] = nf.normal;
    let lap = -1.0 / h2;

    let axes = [
        Axis {
            idx: i,
            stride: cells + 1,
            n: nx,
            forward: upwind_forward(cfg, cells, i, nx),
        },
        Axis {
            idx: j,
            stride: 1,
            n: ny,
            forward: upwind_forward(cfg, cells, j, ny),
        },
    ];

    let mut entries = Vec::with_capacity(9);
    let mut k = [1.0; 2];
    let mut degraded = false;
    for (a, axis) in axes.iter().enumerate() {
        let (lo, hi) = (node - axis.stride, node + axis.stride);
        let active = chi != 0.0 && axis.n != 0.0;
        let second_order = scheme == Scheme::Upwind2
            && active
            && if axis.forward {
                axis.idx + 2 <= cells
            } else {
                axis.idx >= 2
            };
        if scheme == Scheme::Upwind2 && active && !second_order {
            degraded = true;
        }
        if second_order {
            k[a] = 1.5;
            if axis.forward {
                entries.push((lo, lap));
                entries.push((hi, lap + 2.0 * chi * axis.n / (eps * h)));
                entries.push((hi + axis.stride, -0.5 * chi * axis.n / (eps * h)));
            } else {
                entries.push((lo, lap - 2.0 * chi * axis.n / (eps * h)));
                entries.push((lo - axis.stride, 0.5 * chi * axis.n / (eps * h)));
                entries.push((hi, lap));
            }
        } else if axis.forward {
            entries.push((lo, lap));
            entries.push((hi, lap + chi * axis.n / (eps * h)));
        } else {
            entries.push((lo, lap - chi * axis.n / (eps * h)));
            entries.push((hi, lap));
        }
    }
    let diag = 4.0 / h2 + 1.0 + chi * (k[0] * nx.abs() + k[1] * ny.abs()) / (eps * h) + alpha * chi / eps;
    entries.push((node, diag));
    let rhs = (1.0 - chi) * cfg.source.f(x, y) + chi * nf.g / eps;
    Ok(Row {
        entries,
        rhs,
        degraded,
    })
}

/// Whether the upwind difference along one axis uses the forward neighbours.
/// The disk under the first-order scheme selects the side by grid index
/// (`idx <= N/2` means a non-positive normal component); everything else uses
/// the sign, with zero taking the backward branch.
fn upwind_forward(cfg: &PenalConfig, cells: usize, idx: usize, n: f64) -> bool {
    if cfg.scheme == Scheme::Upwind1 && cfg.domain.shape == Shape::DiskInSquare {
        2 * idx <= cells
    } else {
        n < 0.0
    }
}

/// Worst row of `|A_nn| - Σ_{m≠n} |A_nm|` over the matrix.
pub fn diagonal_dominance_margin(matrix: &SparseMatrix) -> f64 {
    (0..matrix.dim())
        .map(|r| {
            let (cols, vals) = matrix.row(r);
            let mut diag = 0.0;
            let mut off = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                if c == r {
                    diag = v.abs();
                } else {
                    off += v.abs();
                }
            }
            diag - off
        })
        .fold(f64::INFINITY, f64::min)
}
