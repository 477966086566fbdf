//! Experiment drivers: solve one configuration, measure errors against the
//! manufactured solution or the limit field, and sweep over `N` or `ε`.

use rayon::prelude::*;
use thiserror::Error;

use crate::analysis::{error_norms, AnalysisError, ErrorReport, Mask};
use crate::assembly::{assemble, AssembledSystem, AssemblyError, PenalConfig};
use crate::grid::{Grid, GridError};
use crate::linalg::{solve, LinalgError, SolveReport, SolverOptions};
use crate::reference::{LimitField, ReferenceError};

#[derive(Debug, Error)]
pub enum StudyError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Solver(#[from] LinalgError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("could not build a worker pool: {0}")]
    Pool(String),
}

/// Norm selector for order tables; orders use the square-rooted sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    LInf,
    L2,
    H1,
}

impl Norm {
    pub const ALL: [Norm; 3] = [Norm::LInf, Norm::L2, Norm::H1];

    pub fn of(&self, rep: &ErrorReport) -> f64 {
        match self {
            Norm::LInf => rep.l_inf,
            Norm::L2 => rep.l2_sqrt,
            Norm::H1 => rep.h1_sqrt,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Norm::LInf => "Linf",
            Norm::L2 => "L2",
            Norm::H1 => "H1",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Solved {
    pub grid: Grid,
    pub cfg: PenalConfig,
    pub system: AssembledSystem,
    pub report: SolveReport,
}

impl Solved {
    pub fn solution(&self) -> &[f64] {
        &self.report.solution
    }
}

pub fn run_case(cells: usize, cfg: &PenalConfig, opts: &SolverOptions) -> Result<Solved, StudyError> {
    let grid = Grid::new(cells)?;
    let system = assemble(&grid, cfg)?;
    let report = solve(&system, opts)?;
    log::info!(
        "N = {cells}, eps = {:e}: {} in {} iterations, residual {:e}",
        cfg.eps,
        report.method,
        report.iterations,
        report.final_residual
    );
    Ok(Solved {
        grid,
        cfg: cfg.clone(),
        system,
        report,
    })
}

fn is_fluid_mask(mask: &Mask) -> bool {
    !matches!(mask, Mask::ObstacleStrip { .. })
}

/// Errors of `solution` on `mask`. Fluid masks compare against the exact
/// solution; strips in the penalized region compare against `W̄⁰`.
pub fn errors_for(
    grid: &Grid,
    cfg: &PenalConfig,
    solution: &[f64],
    mask: Mask,
) -> Result<ErrorReport, StudyError> {
    let limit = LimitField::from_config(cfg, grid)?;
    let case = limit.case();
    if is_fluid_mask(&mask) {
        return Ok(error_norms(
            grid,
            &cfg.domain,
            solution,
            &|x, y| case.exact(x, y),
            &|x, y| case.gradient(x, y),
            mask,
        )?);
    }
    // the reference is fallible, so evaluate it on the mask nodes up front
    let tol = grid.h() * 1e-9;
    let mut values = vec![f64::NAN; grid.dim()];
    let mut grads = vec![[f64::NAN; 2]; grid.dim()];
    for (k, i, j) in grid.nodes() {
        let (x, y) = grid.point(i, j);
        if mask.contains(&cfg.domain, x, y, tol) {
            values[k] = limit.wbar0(x, y)?;
            grads[k] = limit.wbar0_gradient(x, y)?;
        }
    }
    let n = grid.cells() as f64;
    let lookup = |x: f64, y: f64| (x * n).round() as usize * grid.side() + (y * n).round() as usize;
    Ok(error_norms(
        grid,
        &cfg.domain,
        solution,
        &|x, y| values[lookup(x, y)],
        &|x, y| grads[lookup(x, y)],
        mask,
    )?)
}

/// One parameter point of a sweep with its error reports, one per mask.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub cells: usize,
    pub eps: f64,
    pub iterations: usize,
    pub residual: f64,
    pub reports: Vec<ErrorReport>,
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, StudyError> {
    match jobs {
        None => Ok(f()),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| StudyError::Pool(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Fixed solver options, or the size-based default when `None`.
fn pick(solver: Option<&SolverOptions>) -> impl Fn(usize) -> SolverOptions + Sync + '_ {
    move |cells| solver.cloned().unwrap_or_else(|| SolverOptions::for_cells(cells))
}

fn sweep(
    points: Vec<(usize, f64)>,
    cfg: &PenalConfig,
    masks: &[Mask],
    solver: &(dyn Fn(usize) -> SolverOptions + Sync),
    jobs: Option<usize>,
    strip: &(dyn Fn(&Grid) -> Option<Mask> + Sync),
) -> Result<Vec<SweepPoint>, StudyError> {
    with_pool(jobs, || {
        points
            .par_iter()
            .map(|&(cells, eps)| {
                let mut c = cfg.clone();
                c.eps = eps;
                let solved = run_case(cells, &c, &solver(cells))?;
                let mut all: Vec<Mask> = masks.to_vec();
                all.extend(strip(&solved.grid));
                let reports = all
                    .into_iter()
                    .map(|m| errors_for(&solved.grid, &c, solved.solution(), m))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SweepPoint {
                    cells,
                    eps,
                    iterations: solved.report.iterations,
                    residual: solved.report.final_residual,
                    reports,
                })
            })
            .collect()
    })?
}

/// Mesh-refinement sweep at fixed `cfg.eps`.
pub fn sweep_h(
    cfg: &PenalConfig,
    cells: &[usize],
    masks: &[Mask],
    solver: Option<&SolverOptions>,
    jobs: Option<usize>,
) -> Result<Vec<SweepPoint>, StudyError> {
    let points = cells.iter().map(|&n| (n, cfg.eps)).collect();
    sweep(points, cfg, masks, &pick(solver), jobs, &|_| None)
}

/// Penalization sweep at fixed `N`.
pub fn sweep_eps(
    cfg: &PenalConfig,
    cells: usize,
    eps: &[f64],
    masks: &[Mask],
    solver: Option<&SolverOptions>,
    jobs: Option<usize>,
) -> Result<Vec<SweepPoint>, StudyError> {
    let points = eps.iter().map(|&e| (cells, e)).collect();
    sweep(points, cfg, masks, &pick(solver), jobs, &|_| None)
}

/// The strip `[0.1, 0.2] x [0.5, 0.5 + h]` left of the square obstacle.
pub fn obstacle_strip(grid: &Grid) -> Mask {
    Mask::ObstacleStrip {
        x_lo: 0.1,
        x_hi: 0.2,
        y_lo: 0.5,
        y_hi: 0.5 + grid.h(),
    }
}

/// Penalization sweep measuring errors on the mesh-dependent obstacle strip.
pub fn sweep_eps_strip(
    cfg: &PenalConfig,
    cells: usize,
    eps: &[f64],
    solver: Option<&SolverOptions>,
    jobs: Option<usize>,
) -> Result<Vec<SweepPoint>, StudyError> {
    let points = eps.iter().map(|&e| (cells, e)).collect();
    sweep(points, cfg, &[], &pick(solver), jobs, &|g| Some(obstacle_strip(g)))
}

/// Orders for mask index `mask` and `norm` along a sweep, with `param`
/// selecting the abscissa (`N` or `ε`).
pub fn sweep_orders(
    points: &[SweepPoint],
    mask: usize,
    norm: Norm,
    param: impl Fn(&SweepPoint) -> f64,
) -> Result<Vec<f64>, StudyError> {
    let values: Vec<(f64, f64)> = points.iter().map(|p| (param(p), norm.of(&p.reports[mask]))).collect();
    Ok(crate::analysis::convergence_order(&values)?)
}
