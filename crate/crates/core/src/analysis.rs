//! Masked error norms, convergence orders and boundary-layer estimators.

use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::DomainSpec;
use crate::grid::Grid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("mask {0} selects no grid node")]
    EmptyMask(Mask),
    #[error("field has {found} values, grid has {expected} nodes")]
    FieldSize { expected: usize, found: usize },
    #[error("convergence order needs at least two entries")]
    TooFewEntries,
    #[error("entry {index} has non-positive parameter or error ({param}, {error})")]
    NonPositive { index: usize, param: f64, error: f64 },
    #[error("cut line y = {0} is not a grid line")]
    NoCutLine(f64),
    #[error("limit value vanishes at the first interior node")]
    ZeroLimit,
    #[error("ratio RU = {ru} is outside (0, 1); the logarithmic estimator is undefined (BL1 = {bl1})")]
    BlDomain { ru: f64, bl1: f64 },
    #[error("no node on the cut line has a usable limit value")]
    AllSkipped,
}

/// Node set over which errors are measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mask {
    /// Closed fluid domain, interface included.
    FluidFull,
    /// Open fluid domain.
    FluidNoBoundary,
    /// The box `[1/2 - R + S, 1/2 + R - S]²`.
    FluidInterior { s: f64 },
    /// A closed rectangle, normally inside the penalized region.
    ObstacleStrip { x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64 },
}

impl fmt::Display for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mask::FluidFull => f.write_str("fluid"),
            Mask::FluidNoBoundary => f.write_str("fluid_no_boundary"),
            Mask::FluidInterior { s } => write!(f, "fluid_interior_{s}"),
            Mask::ObstacleStrip { x_lo, x_hi, y_lo, y_hi } => {
                write!(f, "strip_{x_lo}_{x_hi}_{y_lo}_{y_hi}")
            }
        }
    }
}

impl Mask {
    /// Membership with absolute tolerance `tol`.
    pub fn contains(&self, domain: &DomainSpec, x: f64, y: f64, tol: f64) -> bool {
        match *self {
            Mask::FluidFull => domain.psi(x, y) <= tol,
            Mask::FluidNoBoundary => domain.psi(x, y) < -tol,
            Mask::FluidInterior { s } => {
                let [cx, cy] = domain.center;
                let half = domain.radius - s;
                (x - cx).abs() <= half + tol && (y - cy).abs() <= half + tol
            }
            Mask::ObstacleStrip { x_lo, x_hi, y_lo, y_hi } => {
                x >= x_lo - tol && x <= x_hi + tol && y >= y_lo - tol && y <= y_hi + tol
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub mask: Mask,
    pub nodes: usize,
    pub l_inf: f64,
    /// `Σ h² (u - U)²`.
    pub l2: f64,
    pub l2_sqrt: f64,
    /// `Σ h² [(u - U)² + (u_x - U^x)² + (u_y - U^y)²]`.
    pub h1: f64,
    pub h1_sqrt: f64,
}

/// Second-order difference of `field` along one axis at node index `k`.
/// Central when both neighbours are in the mask, three-point one-sided inside
/// the mask otherwise; masks too thin for either fall back to grid neighbours.
fn derivative(k: usize, cells: usize, h: f64, inmask: impl Fn(isize) -> bool, val: impl Fn(isize) -> f64) -> f64 {
    let k = k as isize;
    let n = cells as isize;
    let ok = |m: isize| m >= 0 && m <= n && inmask(m);
    if ok(k - 1) && ok(k + 1) {
        (val(k + 1) - val(k - 1)) / (2.0 * h)
    } else if ok(k + 1) && ok(k + 2) {
        (-3.0 * val(k) + 4.0 * val(k + 1) - val(k + 2)) / (2.0 * h)
    } else if ok(k - 1) && ok(k - 2) {
        (3.0 * val(k) - 4.0 * val(k - 1) + val(k - 2)) / (2.0 * h)
    } else if k >= 1 && k < n {
        (val(k + 1) - val(k - 1)) / (2.0 * h)
    } else if k == 0 {
        (-3.0 * val(0) + 4.0 * val(1) - val(2)) / (2.0 * h)
    } else {
        (3.0 * val(n) - 4.0 * val(n - 1) + val(n - 2)) / (2.0 * h)
    }
}

/// Discrete gradient `(U^x, U^y)` at `(i, j)` relative to `mask`.
pub fn discrete_gradient(grid: &Grid, field: &[f64], member: &[bool], i: usize, j: usize) -> [f64; 2] {
    let s = grid.side();
    let n = grid.cells();
    let h = grid.h();
    let ux = derivative(
        i,
        n,
        h,
        |m| member[m as usize * s + j],
        |m| field[m as usize * s + j],
    );
    let uy = derivative(
        j,
        n,
        h,
        |m| member[i * s + m as usize],
        |m| field[i * s + m as usize],
    );
    [ux, uy]
}

/// Error of `numerical` against `reference` (value and gradient) on `mask`.
pub fn error_norms(
    grid: &Grid,
    domain: &DomainSpec,
    numerical: &[f64],
    reference: &(dyn Fn(f64, f64) -> f64 + Sync),
    reference_grad: &(dyn Fn(f64, f64) -> [f64; 2] + Sync),
    mask: Mask,
) -> Result<ErrorReport, AnalysisError> {
    if numerical.len() != grid.dim() {
        return Err(AnalysisError::FieldSize {
            expected: grid.dim(),
            found: numerical.len(),
        });
    }
    let tol = grid.h() * 1e-9;
    let member: Vec<bool> = grid
        .nodes()
        .map(|(_, i, j)| {
            let (x, y) = grid.point(i, j);
            mask.contains(domain, x, y, tol)
        })
        .collect();
    let h2 = grid.h() * grid.h();
    let s = grid.side();
    // terms are evaluated in parallel but summed in node order, so results do
    // not depend on the thread count
    let terms: Vec<(f64, f64, f64)> = (0..grid.dim())
        .into_par_iter()
        .filter(|&k| member[k])
        .map(|k| {
            let (i, j) = (k / s, k % s);
            let (x, y) = grid.point(i, j);
            let e = reference(x, y) - numerical[k];
            let [gx, gy] = reference_grad(x, y);
            let [ux, uy] = discrete_gradient(grid, numerical, &member, i, j);
            (e.abs(), e * e, (gx - ux).powi(2) + (gy - uy).powi(2))
        })
        .collect();
    let nodes = terms.len();
    let (l_inf, l2, grad2) = terms
        .iter()
        .fold((0.0f64, 0.0, 0.0), |a, t| (a.0.max(t.0), a.1 + t.1, a.2 + t.2));
    if nodes == 0 {
        return Err(AnalysisError::EmptyMask(mask));
    }
    let l2 = h2 * l2;
    let h1 = l2 + h2 * grad2;
    Ok(ErrorReport {
        mask,
        nodes,
        l_inf,
        l2,
        l2_sqrt: l2.sqrt(),
        h1,
        h1_sqrt: h1.sqrt(),
    })
}

/// `log(e_k / e_{k-1}) / log(p_k / p_{k-1})` for consecutive pairs.
pub fn convergence_order(values: &[(f64, f64)]) -> Result<Vec<f64>, AnalysisError> {
    if values.len() < 2 {
        return Err(AnalysisError::TooFewEntries);
    }
    for (index, &(param, error)) in values.iter().enumerate() {
        if !(param > 0.0 && error > 0.0) {
            return Err(AnalysisError::NonPositive { index, param, error });
        }
    }
    Ok(values
        .windows(2)
        .map(|w| (w[1].1 / w[0].1).ln() / (w[1].0 / w[0].0).ln())
        .collect())
}

/// Boundary-layer thickness estimates from the first interior node of a cut.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlReport {
    /// `U(h, y) / u_lim(h, y)`.
    pub ru: f64,
    /// `h / RU`.
    pub bl1: f64,
    /// `-h / ln(1 - RU)`.
    pub bl2: f64,
}

fn cut_row(grid: &Grid, cut_y: f64) -> Result<usize, AnalysisError> {
    grid.line_index(cut_y, grid.h() * 1e-6).ok_or(AnalysisError::NoCutLine(cut_y))
}

pub fn bl_thickness(
    grid: &Grid,
    u_eps: &[f64],
    u_lim: &dyn Fn(f64, f64) -> f64,
    cut_y: f64,
) -> Result<BlReport, AnalysisError> {
    if u_eps.len() != grid.dim() {
        return Err(AnalysisError::FieldSize {
            expected: grid.dim(),
            found: u_eps.len(),
        });
    }
    let j = cut_row(grid, cut_y)?;
    let h = grid.h();
    let (x, y) = grid.point(1, j);
    let lim = u_lim(x, y);
    if lim == 0.0 {
        return Err(AnalysisError::ZeroLimit);
    }
    let ru = u_eps[grid.side() + j] / lim;
    let bl1 = h / ru;
    if !(ru > 0.0 && ru < 1.0) {
        return Err(AnalysisError::BlDomain { ru, bl1 });
    }
    Ok(BlReport {
        ru,
        bl1,
        bl2: -h / (1.0 - ru).ln(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatioProfile {
    /// `(x, U / u_lim)` along the cut.
    pub points: Vec<(f64, f64)>,
    /// Abscissae skipped because `|u_lim| <= 1e-12`.
    pub skipped: Vec<f64>,
}

pub fn ratio_profile(
    grid: &Grid,
    u_eps: &[f64],
    u_lim: &dyn Fn(f64, f64) -> f64,
    cut_y: f64,
) -> Result<RatioProfile, AnalysisError> {
    if u_eps.len() != grid.dim() {
        return Err(AnalysisError::FieldSize {
            expected: grid.dim(),
            found: u_eps.len(),
        });
    }
    let j = cut_row(grid, cut_y)?;
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for i in 0..grid.side() {
        let (x, y) = grid.point(i, j);
        let lim = u_lim(x, y);
        if lim.abs() <= 1e-12 {
            skipped.push(x);
        } else {
            points.push((x, u_eps[i * grid.side() + j] / lim));
        }
    }
    if points.is_empty() {
        return Err(AnalysisError::AllSkipped);
    }
    Ok(RatioProfile { points, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        grid.nodes()
            .map(|(_, i, j)| {
                let (x, y) = grid.point(i, j);
                f(x, y)
            })
            .collect()
    }

    #[test]
    fn exact_field_has_zero_error() {
        let grid = Grid::new(10).unwrap();
        let d = DomainSpec::square(0.3).unwrap();
        let u = sample(&grid, |x, y| x + y);
        let rep = error_norms(&grid, &d, &u, &|x, y| x + y, &|_, _| [1.0, 1.0], Mask::FluidFull).unwrap();
        assert_eq!(rep.l_inf, 0.0);
        assert_eq!(rep.l2, 0.0);
        assert!(rep.h1 < 1e-24);
        assert_eq!(rep.nodes, 49);
    }

    #[test]
    fn constant_offset() {
        let grid = Grid::new(10).unwrap();
        let d = DomainSpec::square(0.3).unwrap();
        let delta = 0.25;
        let u = sample(&grid, |_, _| 1.0);
        let rep = error_norms(&grid, &d, &u, &|_, _| 1.0 + delta, &|_, _| [0.0, 0.0], Mask::FluidNoBoundary).unwrap();
        assert_eq!(rep.nodes, 25);
        assert_eq!(rep.l_inf, delta);
        assert!((rep.l2 - 25.0 * 0.01 * delta * delta).abs() < 1e-15);
        assert!((rep.h1 - rep.l2).abs() < 1e-15);
    }

    #[test]
    fn one_sided_gradients_at_mask_edge() {
        let grid = Grid::new(10).unwrap();
        let d = DomainSpec::square(0.3).unwrap();
        let u = sample(&grid, |x, y| x * x + 3.0 * y);
        // exact reference, so only gradient mismatches contribute; quadratics
        // are differentiated exactly by every second-order stencil
        let rep = error_norms(
            &grid,
            &d,
            &u,
            &|x, y| x * x + 3.0 * y,
            &|x, _| [2.0 * x, 3.0],
            Mask::FluidInterior { s: 0.1 },
        )
        .unwrap();
        assert_eq!(rep.nodes, 25);
        assert!(rep.h1 < 1e-20, "{}", rep.h1);
    }

    #[test]
    fn thin_strip_uses_grid_neighbours() {
        let grid = Grid::new(10).unwrap();
        let d = DomainSpec::square(0.3).unwrap();
        let u = sample(&grid, |x, y| x + 2.0 * y);
        let mask = Mask::ObstacleStrip { x_lo: 0.1, x_hi: 0.2, y_lo: 0.5, y_hi: 0.6 };
        let rep = error_norms(&grid, &d, &u, &|x, y| x + 2.0 * y, &|_, _| [1.0, 2.0], mask).unwrap();
        assert_eq!(rep.nodes, 4);
        assert!(rep.h1 < 1e-24);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let grid = Grid::new(10).unwrap();
        let d = DomainSpec::square(0.3).unwrap();
        let u = vec![0.0; grid.dim()];
        let mask = Mask::ObstacleStrip { x_lo: 0.11, x_hi: 0.12, y_lo: 0.5, y_hi: 0.5 };
        assert!(matches!(
            error_norms(&grid, &d, &u, &|_, _| 0.0, &|_, _| [0.0; 2], mask),
            Err(AnalysisError::EmptyMask(_))
        ));
    }

    #[test]
    fn orders() {
        assert_eq!(convergence_order(&[(50.0, 1.0), (100.0, 0.25)]).unwrap(), vec![-2.0]);
        let o = convergence_order(&[(1e-1, 1.0), (1e-2, 0.1)]).unwrap();
        assert!((o[0] - 1.0).abs() < 1e-15);
        assert!(convergence_order(&[(1.0, 1.0)]).is_err());
        assert!(matches!(
            convergence_order(&[(1.0, 1.0), (2.0, 0.0)]),
            Err(AnalysisError::NonPositive { index: 1, .. })
        ));
    }

    proptest! {
        #[test]
        fn power_law_orders(p in -3.0f64..3.0, c in 0.1f64..10.0) {
            let vals: Vec<_> = [50.0, 100.0, 150.0, 200.0].iter().map(|&n: &f64| (n, c * n.powf(p))).collect();
            for o in convergence_order(&vals).unwrap() {
                prop_assert!((o - p).abs() < 1e-12);
            }
        }

        #[test]
        fn linf_monotone_under_inclusion(seed in 0u64..1000) {
            let grid = Grid::new(20).unwrap();
            let d = DomainSpec::square(0.3).unwrap();
            let u = sample(&grid, |x, y| ((x * 13.0 + y * 7.0 + seed as f64) * 1.7).sin());
            let e = |m| error_norms(&grid, &d, &u, &|_, _| 0.0, &|_, _| [0.0; 2], m).unwrap().l_inf;
            let interior = e(Mask::FluidInterior { s: 0.1 });
            prop_assert!(interior <= e(Mask::FluidNoBoundary));
            prop_assert!(e(Mask::FluidNoBoundary) <= e(Mask::FluidFull));
        }

        #[test]
        fn estimator_inverts_exponential_profile(log_eps in -3.0f64..-1.0, half in 100usize..600) {
            let eps = 10f64.powf(log_eps);
            let grid = Grid::new(2 * half).unwrap();
            prop_assume!(grid.h() < eps);
            let u = sample(&grid, |x, _| 2.0 * (1.0 - (-x / eps).exp()));
            let bl = bl_thickness(&grid, &u, &|_, _| 2.0, 0.5).unwrap();
            prop_assert!((bl.bl2 - eps).abs() <= 1e-9 * eps);
        }
    }

    #[test]
    fn synthetic_profile() {
        let grid = Grid::new(1000).unwrap();
        let eps = 1e-2;
        let u = sample(&grid, |x, _| 0.7 * (1.0 - (-x / eps).exp()));
        let bl = bl_thickness(&grid, &u, &|_, _| 0.7, 0.5).unwrap();
        assert!((bl.bl2 - eps).abs() < 1e-12);
        let prof = ratio_profile(&grid, &u, &|_, _| 0.7, 0.5).unwrap();
        assert_eq!(prof.points[0], (0.0, 0.0));
        let far = prof.points.iter().find(|p| p.0 >= 10.0 * eps).unwrap();
        assert!((far.1 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn estimator_domain_errors() {
        let grid = Grid::new(10).unwrap();
        let u = vec![1.0; grid.dim()];
        assert!(matches!(
            bl_thickness(&grid, &u, &|_, _| 0.5, 0.5),
            Err(AnalysisError::BlDomain { .. })
        ));
        assert!(matches!(bl_thickness(&grid, &u, &|_, _| 0.5, 0.55), Err(AnalysisError::NoCutLine(_))));
        let prof = ratio_profile(&grid, &u, &|x, _| if x < 0.5 { 0.0 } else { 1.0 }, 0.5).unwrap();
        assert_eq!(prof.skipped.len(), 5);
        assert!(matches!(ratio_profile(&grid, &u, &|_, _| 0.0, 0.5), Err(AnalysisError::AllSkipped)));
    }
}
