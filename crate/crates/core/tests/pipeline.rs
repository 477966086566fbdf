mod common;

use penalfd::analysis::Mask;
use penalfd::reference::LimitField;
use penalfd::study::{run_case, sweep_eps, sweep_h, Norm};
use penalfd::{Grid, ManufacturedCase, PenalConfig, Scheme, SolverOptions, Source};

fn square_cfg(eps: f64) -> PenalConfig {
    PenalConfig::new(
        eps,
        2.0,
        Scheme::Upwind2,
        common::square(),
        Source::Manufactured(ManufacturedCase::SquareSin5),
    )
}

#[test]
fn parallel_and_serial_sweeps_match() {
    let cfg = square_cfg(1e-3);
    let masks = [Mask::FluidFull, Mask::FluidInterior { s: 0.1 }];
    let serial = sweep_eps(&cfg, 40, &[1e-1, 1e-2, 1e-3], &masks, None, Some(1)).unwrap();
    let parallel = sweep_eps(&cfg, 40, &[1e-1, 1e-2, 1e-3], &masks, None, Some(3)).unwrap();
    for (a, b) in serial.iter().zip(&parallel) {
        assert_eq!(a.reports, b.reports);
    }
}

#[test]
fn error_shrinks_under_refinement_and_penalization() {
    let h = sweep_h(&square_cfg(1e-10), &[20, 40], &[Mask::FluidFull], None, None).unwrap();
    for norm in Norm::ALL {
        assert!(norm.of(&h[1].reports[0]) < norm.of(&h[0].reports[0]) / 3.0);
    }
    let e = sweep_eps(&square_cfg(1e-1), 60, &[1e-1, 1e-2], &[Mask::FluidFull], None, None).unwrap();
    for norm in Norm::ALL {
        assert!(norm.of(&e[1].reports[0]) < norm.of(&e[0].reports[0]) / 4.0);
    }
}

#[test]
fn obstacle_solution_approaches_limit_field() {
    // away from the layer the penalized solution follows the advection–reaction limit
    let cells = 100;
    let grid = Grid::new(cells).unwrap();
    let mut prev = f64::INFINITY;
    for eps in [1e-2, 1e-3] {
        let cfg = square_cfg(eps);
        let solved = run_case(cells, &cfg, &SolverOptions::direct()).unwrap();
        let limit = LimitField::from_config(&cfg, &grid).unwrap();
        let (i, j) = (15, 50);
        let n = grid.node_of(i, j).unwrap();
        let (x, y) = (grid.coord(i), grid.coord(j));
        let gap = (solved.solution()[n] - limit.wbar0(x, y).unwrap()).abs();
        assert!(gap < prev / 3.0, "eps {eps}: gap {gap} after {prev}");
        prev = gap;
    }
}
