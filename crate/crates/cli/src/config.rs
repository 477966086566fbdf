//! Run configuration: a TOML file with one table per concern.
//!
//! ```toml
//! [problem]
//! domain = "square"
//! radius = 0.3
//! case = "square-sin5"
//! alpha = 2.0
//! eps = 1e-3
//! scheme = "upwind2"
//!
//! [grid]
//! n = 150
//! ```

use std::fmt;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use penalfd::analysis::Mask;
use penalfd::study::obstacle_strip;
use penalfd::{
    CornerRule, DomainSpec, Grid, ManufacturedCase, PenalConfig, Scheme, Shape, SolverOptions, Source,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    Disk,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseKind {
    DiskSin,
    SquareSin5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    Upwind1,
    Upwind2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CornerKind {
    PlusX,
    MinusY,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKind {
    /// Direct LU for small grids, BiCGStab above.
    Auto,
    Direct,
    Bicgstab,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskKind {
    Fluid,
    FluidNoBoundary,
    FluidInterior,
    Strip,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    pub domain: DomainKind,
    pub radius: f64,
    pub case: CaseKind,
    /// Frequency of the disk manufactured solution.
    pub c: f64,
    pub alpha: f64,
    pub eps: f64,
    pub scheme: SchemeKind,
    pub corner_rule: CornerKind,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            domain: DomainKind::Square,
            radius: 0.3,
            case: CaseKind::SquareSin5,
            c: 5.0,
            alpha: 2.0,
            eps: 1e-3,
            scheme: SchemeKind::Upwind2,
            corner_rule: CornerKind::PlusX,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: 100 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub method: MethodKind,
    pub tol: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            method: MethodKind::Auto,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub eps: Vec<f64>,
    pub n: Vec<usize>,
    pub masks: Vec<MaskKind>,
    /// Inset of the interior mask from the obstacle boundary.
    pub interior_s: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            eps: vec![1e-1, 1e-2, 1e-3, 1e-4],
            n: vec![50, 100, 150, 200],
            masks: vec![MaskKind::Fluid, MaskKind::FluidNoBoundary, MaskKind::FluidInterior],
            interior_s: 0.1,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlayerSection {
    pub eps: Vec<f64>,
    pub cut_y: f64,
}

impl Default for BlayerSection {
    fn default() -> Self {
        Self {
            eps: vec![1e-1, 1e-2],
            cut_y: 0.5,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CondnumSection {
    pub eps: Vec<f64>,
    pub iters: usize,
}

impl Default for CondnumSection {
    fn default() -> Self {
        Self {
            eps: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
            iters: 3000,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SupersolSection {
    pub eps_1d: Vec<f64>,
    pub eps_spherical: Vec<f64>,
    pub points: usize,
}

impl Default for SupersolSection {
    fn default() -> Self {
        Self {
            eps_1d: vec![1e-1, 1e-2, 1e-3],
            eps_spherical: vec![1e-1, 1e-2],
            points: 2000,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub problem: ProblemSection,
    pub grid: GridSection,
    pub solver: SolverSection,
    pub sweep: SweepSection,
    pub blayer: BlayerSection,
    pub condnum: CondnumSection,
    pub supersol: SupersolSection,
}

/// One broken validation rule, naming the offending key.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub key: String,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.rule)
    }
}

/// Which command the config is validated for; each command reads
/// different sections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Purpose {
    Solve,
    SweepEps,
    SweepH,
    Blayer,
    Condnum,
    Supersol,
}

/// Largest grid for which the 2-norm condition estimate is attempted.
pub const CONDNUM_MAX_CELLS: usize = 150;

fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |p| p + 1) + 1;
    (line, column)
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_column(text, s.start));
            ConfigError::Parse {
                line,
                column,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn domain(&self) -> DomainSpec {
        let p = &self.problem;
        DomainSpec {
            shape: match p.domain {
                DomainKind::Disk => Shape::DiskInSquare,
                DomainKind::Square => Shape::SquareInSquare,
            },
            radius: p.radius,
            center: [0.5, 0.5],
        }
    }

    /// Penalized-problem configuration at `eps`.
    pub fn penal_config(&self, eps: f64, allow_upwind2_disk: bool) -> PenalConfig {
        let p = &self.problem;
        let case = match p.case {
            CaseKind::DiskSin => ManufacturedCase::DiskSin { c: p.c },
            CaseKind::SquareSin5 => ManufacturedCase::SquareSin5,
        };
        let scheme = match p.scheme {
            SchemeKind::Upwind1 => Scheme::Upwind1,
            SchemeKind::Upwind2 => Scheme::Upwind2,
        };
        let mut cfg = PenalConfig::new(eps, p.alpha, scheme, self.domain(), Source::Manufactured(case));
        cfg.corner_rule = match p.corner_rule {
            CornerKind::PlusX => CornerRule::PlusX,
            CornerKind::MinusY => CornerRule::MinusY,
            CornerKind::Mean => CornerRule::Mean,
        };
        cfg.allow_upwind2_disk = allow_upwind2_disk;
        cfg
    }

    pub fn solver_options(&self, cells: usize) -> SolverOptions {
        match self.solver.method {
            MethodKind::Auto => {
                let mut opts = SolverOptions::for_cells(cells);
                opts.tol = self.solver.tol;
                opts
            }
            MethodKind::Direct => SolverOptions {
                tol: self.solver.tol,
                ..SolverOptions::direct()
            },
            MethodKind::Bicgstab => SolverOptions::bicgstab(self.solver.tol),
        }
    }

    /// Error masks for `solve` and the sweeps, resolved on `grid`.
    pub fn masks(&self, grid: &Grid) -> Vec<Mask> {
        self.sweep
            .masks
            .iter()
            .map(|m| match m {
                MaskKind::Fluid => Mask::FluidFull,
                MaskKind::FluidNoBoundary => Mask::FluidNoBoundary,
                MaskKind::FluidInterior => Mask::FluidInterior {
                    s: self.sweep.interior_s,
                },
                MaskKind::Strip => obstacle_strip(grid),
            })
            .collect()
    }

    /// Every rule the config breaks for `purpose`; empty iff runnable.
    pub fn validate(&self, purpose: Purpose, allow_upwind2_disk: bool) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut bad = |key: &str, rule: String| {
            out.push(Violation {
                key: key.to_string(),
                rule,
            })
        };
        let p = &self.problem;
        if !(p.radius > 0.0 && p.radius < 0.5) {
            bad("problem.radius", "radius must lie in (0, 0.5)".into());
        }
        if !(p.alpha >= 0.0 && p.alpha.is_finite()) {
            bad("problem.alpha", "alpha must be >= 0".into());
        }
        if p.case == CaseKind::DiskSin && !(p.c.is_finite()) {
            bad("problem.c", "c must be finite".into());
        }
        match (p.domain, p.case) {
            (DomainKind::Disk, CaseKind::DiskSin) | (DomainKind::Square, CaseKind::SquareSin5) => {}
            _ => bad("problem.case", "manufactured case does not match the domain".into()),
        }
        if p.domain == DomainKind::Disk && p.scheme == SchemeKind::Upwind2 && !allow_upwind2_disk {
            bad(
                "problem.scheme",
                "upwind2 is only enabled for the square; pass --allow-upwind2-disk to override".into(),
            );
        }
        if !(self.solver.tol.is_finite() && self.solver.tol > 0.0) {
            bad("solver.tol", "tol must be > 0".into());
        }

        let eps_key: (&str, Vec<f64>) = match purpose {
            Purpose::Solve => ("problem.eps", vec![p.eps]),
            Purpose::SweepH => ("problem.eps", vec![p.eps]),
            Purpose::SweepEps => ("sweep.eps", self.sweep.eps.clone()),
            Purpose::Blayer => ("blayer.eps", self.blayer.eps.clone()),
            Purpose::Condnum => ("condnum.eps", self.condnum.eps.clone()),
            Purpose::Supersol => ("supersol.eps", Vec::new()),
        };
        if eps_key.1.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            bad(eps_key.0, "eps must be > 0".into());
        }

        let cells: Vec<usize> = match purpose {
            Purpose::SweepH => self.sweep.n.clone(),
            Purpose::Supersol => Vec::new(),
            _ => vec![self.grid.n],
        };
        let n_key = if purpose == Purpose::SweepH { "sweep.n" } else { "grid.n" };
        for &n in &cells {
            if n < 4 || n % 2 != 0 {
                bad(n_key, format!("N = {n} must be even and at least 4"));
                continue;
            }
            if p.domain == DomainKind::Square {
                let offset = (0.5 - p.radius) * n as f64;
                if (offset - offset.round()).abs() > 1e-9 {
                    bad(
                        n_key,
                        format!("square obstacle not aligned: (0.5 - R)/h = {offset} is not an integer for N = {n}"),
                    );
                }
            }
        }

        match purpose {
            Purpose::Solve | Purpose::SweepEps | Purpose::SweepH => {
                if self.sweep.masks.is_empty() {
                    bad("sweep.masks", "at least one mask is required".into());
                }
                if self.sweep.masks.contains(&MaskKind::FluidInterior)
                    && !(self.sweep.interior_s > 0.0 && self.sweep.interior_s < p.radius)
                {
                    bad("sweep.interior_s", "interior inset must lie in (0, R)".into());
                }
                if purpose == Purpose::SweepH && self.sweep.masks.contains(&MaskKind::Strip) {
                    bad("sweep.masks", "the strip mask depends on h and is not available for sweep-h".into());
                }
            }
            _ => {}
        }
        match purpose {
            Purpose::SweepEps if self.sweep.eps.len() < 2 => {
                bad("sweep.eps", "a sweep needs at least two values".into())
            }
            Purpose::SweepH if self.sweep.n.len() < 2 => bad("sweep.n", "a sweep needs at least two values".into()),
            Purpose::Blayer => {
                if self.blayer.eps.is_empty() {
                    bad("blayer.eps", "at least one eps is required".into());
                }
                let j = self.blayer.cut_y * self.grid.n as f64;
                if !(self.blayer.cut_y > 0.0 && self.blayer.cut_y < 1.0) || (j - j.round()).abs() > 1e-9 {
                    bad("blayer.cut_y", "cut line must be an interior grid line".into());
                }
            }
            Purpose::Condnum => {
                if self.grid.n > CONDNUM_MAX_CELLS {
                    bad("grid.n", format!("condition estimates are limited to N <= {CONDNUM_MAX_CELLS}"));
                }
                if self.condnum.iters == 0 {
                    bad("condnum.iters", "iters must be > 0".into());
                }
            }
            Purpose::Supersol => {
                let all = self.supersol.eps_1d.iter().chain(&self.supersol.eps_spherical);
                if all.clone().any(|e| !(*e > 0.0 && *e < 1.0)) {
                    bad("supersol.eps", "eps must lie in (0, 1)".into());
                }
                if self.supersol.points < 2 {
                    bad("supersol.points", "at least two sample points are required".into());
                }
            }
            _ => {}
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(n: usize) -> Config {
        let mut c = Config::default();
        c.grid.n = n;
        c
    }

    #[test]
    fn zero_eps_is_rejected() {
        let mut c = square(150);
        c.problem.eps = 0.0;
        let v = c.validate(Purpose::Solve, false);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].key, "problem.eps");
        assert_eq!(v[0].rule, "eps must be > 0");
    }

    #[test]
    fn aligned_square_grid_is_valid() {
        // (0.5 - 0.3) * 150 = 30
        assert!(square(150).validate(Purpose::Solve, false).is_empty());
        let v = square(104).validate(Purpose::Solve, false);
        assert!(v[0].rule.contains("not aligned"), "{v:?}");
    }

    #[test]
    fn upwind2_disk_needs_override() {
        let mut c = square(100);
        c.problem.domain = DomainKind::Disk;
        c.problem.case = CaseKind::DiskSin;
        assert_eq!(c.validate(Purpose::Solve, false)[0].key, "problem.scheme");
        assert!(c.validate(Purpose::Solve, true).is_empty());
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = Config::parse("[problem]\neps = 1e-3\nbogus = 1\n").unwrap_err();
        match err {
            ConfigError::Parse { line, column, .. } => assert_eq!((line, column), (3, 1)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sections_default_when_missing() {
        let c = Config::parse("[grid]\nn = 50\n").unwrap();
        assert_eq!(c.grid.n, 50);
        assert_eq!(c.problem.alpha, 2.0);
        assert_eq!(c.sweep.masks.len(), 3);
    }

    #[test]
    fn line_column_counts_from_one() {
        assert_eq!(line_column("ab\ncd", 4), (2, 2));
        assert_eq!(line_column("ab", 0), (1, 1));
    }
}
