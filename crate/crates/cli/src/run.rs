//! Command execution and CSV output.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use penalfd::analysis::{bl_thickness, convergence_order, AnalysisError, ErrorReport};
use penalfd::linalg::{cond2_estimate, cond2_estimate_jacobi, cond_inf_bound, LinalgError};
use penalfd::reference::{LimitField, ReferenceError};
use penalfd::study::{errors_for, run_case, sweep_eps, sweep_h, sweep_orders, Norm, StudyError, SweepPoint};
use penalfd::supersolutions::{check_1d, check_spherical, SupersolReport};
use penalfd::assembly::AssemblyError;
use penalfd::{assemble, Grid};

use crate::config::{Config, ConfigError, MethodKind, Purpose, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    SweepEps,
    SweepH,
    Blayer,
    Condnum,
    Supersol,
}

impl Command {
    fn purpose(self) -> Purpose {
        match self {
            Command::Solve => Purpose::Solve,
            Command::SweepEps => Purpose::SweepEps,
            Command::SweepH => Purpose::SweepH,
            Command::Blayer => Purpose::Blayer,
            Command::Condnum => Purpose::Condnum,
            Command::Supersol => Purpose::Supersol,
        }
    }
}

/// Everything needed to execute one command.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub command: Command,
    pub config: PathBuf,
    pub out: PathBuf,
    pub jobs: Option<usize>,
    pub allow_upwind2_disk: bool,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid configuration:\n{}", list(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Study(#[from] StudyError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("supersolution check failed for {0}")]
    Supersol(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },
}

fn list(v: &[Violation]) -> String {
    v.iter().map(|v| format!("  {v}")).collect::<Vec<_>>().join("\n")
}

impl RunError {
    /// 2 for configuration problems, 3 for numerical failures, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Invalid(_) => 2,
            RunError::Io { .. } | RunError::Csv { .. } => 1,
            _ => 3,
        }
    }
}

/// Shortest decimal that reads back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// A CSV file collected in memory and written once complete.
struct Table {
    name: &'static str,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &[&str]) -> Self {
        Self {
            name,
            rows: vec![header.iter().map(|s| s.to_string()).collect()],
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn write(&self, dir: &Path) -> Result<(), RunError> {
        let path = dir.join(self.name);
        let csv_err = |source| RunError::Csv {
            path: path.display().to_string(),
            source,
        };
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(|source| RunError::Io {
            path: path.display().to_string(),
            source,
        })
    }
}

pub const ERROR_HEADER: [&str; 6] = ["mask", "Linf", "L2", "L2sqrt", "H1", "H1sqrt"];

/// The `errors.csv` fields of one report, in header order.
pub fn error_fields(rep: &ErrorReport) -> Vec<String> {
    vec![
        rep.mask.to_string(),
        num(rep.l_inf),
        num(rep.l2),
        num(rep.l2_sqrt),
        num(rep.h1),
        num(rep.h1_sqrt),
    ]
}

pub fn run(spec: &RunSpec) -> Result<Vec<PathBuf>, RunError> {
    let config = Config::load(&spec.config)?;
    let violations = config.validate(spec.command.purpose(), spec.allow_upwind2_disk);
    if !violations.is_empty() {
        return Err(RunError::Invalid(violations));
    }
    let mut failure = None;
    let tables = match spec.command {
        Command::Solve => solve(&config, spec)?,
        Command::SweepEps => sweep(&config, spec, true)?,
        Command::SweepH => sweep(&config, spec, false)?,
        Command::Blayer => blayer(&config, spec)?,
        Command::Condnum => condnum(&config, spec)?,
        Command::Supersol => {
            let (tables, f) = supersol(&config);
            failure = f;
            tables
        }
    };
    fs::create_dir_all(&spec.out).map_err(|source| RunError::Io {
        path: spec.out.display().to_string(),
        source,
    })?;
    let mut written = Vec::new();
    for t in &tables {
        t.write(&spec.out)?;
        written.push(spec.out.join(t.name));
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(written),
    }
}

fn solve(config: &Config, spec: &RunSpec) -> Result<Vec<Table>, RunError> {
    let cells = config.grid.n;
    let cfg = config.penal_config(config.problem.eps, spec.allow_upwind2_disk);
    let solved = run_case(cells, &cfg, &config.solver_options(cells))?;
    log::info!(
        "solved N = {cells}, eps = {:e} with {} (residual {:e})",
        cfg.eps,
        solved.report.method,
        solved.report.final_residual
    );
    let grid = &solved.grid;
    let fields = cfg.extension_fields(grid);
    let mut sol = Table::new("solution.csv", &["i", "j", "x", "y", "chi", "U"]);
    for (n, i, j) in grid.nodes() {
        let (x, y) = grid.point(i, j);
        sol.push(vec![
            i.to_string(),
            j.to_string(),
            num(x),
            num(y),
            num(fields.chi(x, y)),
            num(solved.solution()[n]),
        ]);
    }
    let mut errors = Table::new("errors.csv", &ERROR_HEADER);
    for mask in config.masks(grid) {
        errors.push(error_fields(&errors_for(grid, &cfg, solved.solution(), mask)?));
    }
    Ok(vec![sol, errors])
}

fn sweep(config: &Config, spec: &RunSpec, by_eps: bool) -> Result<Vec<Table>, RunError> {
    let base = config.penal_config(config.problem.eps, spec.allow_upwind2_disk);
    let points: Vec<SweepPoint> = if by_eps {
        let cells = config.grid.n;
        let masks = config.masks(&Grid::new(cells).map_err(StudyError::from)?);
        let opts = config.solver_options(cells);
        sweep_eps(&base, cells, &config.sweep.eps, &masks, Some(&opts), spec.jobs)?
    } else {
        let grid = Grid::new(config.sweep.n[0]).map_err(StudyError::from)?;
        let masks = config.masks(&grid);
        // `auto` picks the solver per grid size
        let opts = (config.solver.method != MethodKind::Auto).then(|| config.solver_options(config.sweep.n[0]));
        sweep_h(&base, &config.sweep.n, &masks, opts.as_ref(), spec.jobs)?
    };
    let mut header = vec!["N", "eps"];
    header.extend(ERROR_HEADER);
    let mut errors = Table::new("errors.csv", &header);
    for p in &points {
        for rep in &p.reports {
            let mut row = vec![p.cells.to_string(), num(p.eps)];
            row.extend(error_fields(rep));
            errors.push(row);
        }
    }
    let param = if by_eps { "eps" } else { "N" };
    let mut orders = Table::new("orders.csv", &["mask", "norm", "param", "from", "to", "order"]);
    for (m, rep) in points[0].reports.iter().enumerate() {
        for norm in Norm::ALL {
            let o = if by_eps {
                sweep_orders(&points, m, norm, |p| p.eps)?
            } else {
                sweep_orders(&points, m, norm, |p| p.cells as f64)?
            };
            for (k, order) in o.iter().enumerate() {
                let (a, b) = (&points[k], &points[k + 1]);
                let (from, to) = if by_eps {
                    (num(a.eps), num(b.eps))
                } else {
                    (a.cells.to_string(), b.cells.to_string())
                };
                orders.push(vec![
                    rep.mask.to_string(),
                    norm.name().to_string(),
                    param.to_string(),
                    from,
                    to,
                    num(*order),
                ]);
            }
        }
    }
    Ok(vec![errors, orders])
}

fn blayer(config: &Config, spec: &RunSpec) -> Result<Vec<Table>, RunError> {
    let cells = config.grid.n;
    let grid = Grid::new(cells).map_err(StudyError::from)?;
    let mut table = Table::new("blayer.csv", &["eps", "x", "RU", "bl1", "bl2"]);
    let mut bl2 = Vec::new();
    for &eps in &config.blayer.eps {
        let cfg = config.penal_config(eps, spec.allow_upwind2_disk);
        let solved = run_case(cells, &cfg, &config.solver_options(cells))?;
        let limit = LimitField::from_config(&cfg, &grid)?;
        let failure = std::cell::OnceCell::new();
        let rep = bl_thickness(
            &grid,
            solved.solution(),
            &|x, y| {
                limit.u_lim(x, y).unwrap_or_else(|e| {
                    let _ = failure.set(e);
                    f64::NAN
                })
            },
            config.blayer.cut_y,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e.into());
        }
        let rep = rep?;
        table.push(vec![num(eps), num(grid.h()), num(rep.ru), num(rep.bl1), num(rep.bl2)]);
        bl2.push((eps, rep.bl2));
    }
    let mut tables = vec![table];
    if bl2.len() >= 2 {
        let mut orders = Table::new("orders.csv", &["quantity", "param", "from", "to", "order"]);
        for (k, o) in convergence_order(&bl2)?.iter().enumerate() {
            orders.push(vec![
                "bl2".into(),
                "eps".into(),
                num(bl2[k].0),
                num(bl2[k + 1].0),
                num(*o),
            ]);
        }
        tables.push(orders);
    }
    Ok(tables)
}

fn condnum(config: &Config, spec: &RunSpec) -> Result<Vec<Table>, RunError> {
    let grid = Grid::new(config.grid.n).map_err(StudyError::from)?;
    let mut table = Table::new("condnum.csv", &["eps", "kappa_inf_bound", "kappa2", "kappa2_jacobi"]);
    for &eps in &config.condnum.eps {
        let sys = assemble(&grid, &config.penal_config(eps, spec.allow_upwind2_disk))?;
        let bound = cond_inf_bound(&sys);
        let plain = cond2_estimate(&sys, config.condnum.iters)?;
        let jac = cond2_estimate_jacobi(&sys, config.condnum.iters)?;
        for (what, est) in [("kappa2", &plain), ("kappa2_jacobi", &jac)] {
            if !est.converged {
                log::warn!("{what} at eps = {eps:e} did not converge in {} iterations", est.iterations);
            }
        }
        table.push(vec![num(eps), num(bound.value), num(plain.kappa), num(jac.kappa)]);
    }
    Ok(vec![table])
}

/// The table is produced even when a check fails, so the failure can be
/// inspected; the failure is returned alongside it.
fn supersol(config: &Config) -> (Vec<Table>, Option<RunError>) {
    let s = &config.supersol;
    let reports: Vec<SupersolReport> = s
        .eps_1d
        .iter()
        .map(|&e| check_1d(e, s.points))
        .chain(s.eps_spherical.iter().map(|&e| check_spherical(e, s.points)))
        .collect();
    let mut table = Table::new(
        "supersol.csv",
        &[
            "case",
            "eps",
            "beta",
            "tol",
            "min_p",
            "min_q",
            "min_residual_p",
            "min_residual_q",
            "gap_value",
            "gap_flux",
            "p_slope_at_origin",
            "linf_inner",
            "linf_outer",
            "pass",
        ],
    );
    for r in &reports {
        table.push(vec![
            r.case.to_string(),
            num(r.eps),
            num(r.beta),
            num(r.tol),
            num(r.min_p),
            num(r.min_q),
            num(r.min_residual_p),
            num(r.min_residual_q),
            num(r.transmission_gap[0]),
            num(r.transmission_gap[1]),
            num(r.p_slope_at_origin),
            num(r.linf_inner),
            num(r.linf_outer),
            r.pass().to_string(),
        ]);
    }
    let failure = reports
        .iter()
        .find(|r| !r.pass())
        .map(|r| RunError::Supersol(format!("{} eps = {:e}", r.case, r.eps)));
    (vec![table], failure)
}

