//! Volume-penalization finite differences for `-Δu + u = f` on an obstacle
//! complement with Robin/Neumann boundary conditions.
//!
//! The physical domain is embedded in the unit box; the boundary condition is
//! replaced by a stiff `1/ε` advection–reaction term on the penalized region
//! and the resulting problem is discretized with first- or second-order upwind
//! differences on a uniform Cartesian grid.

pub mod analysis;
pub mod assembly;
pub mod bessel;
pub mod characteristics;
pub mod geometry;
pub mod grid;
pub mod linalg;
pub mod reference;
pub mod study;
pub mod supersolutions;

pub use assembly::{assemble, AssembledSystem, PenalConfig, Scheme, Source};
pub use geometry::{CornerRule, DomainSpec, ExtensionFields, Shape};
pub use grid::Grid;
pub use linalg::{solve, SolveReport, SolverOptions, SparseMatrix};
pub use reference::ManufacturedCase;
