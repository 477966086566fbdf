//! Experiment runner for the penalized reaction–diffusion solver: single
//! solves, convergence sweeps, boundary-layer, condition-number and
//! supersolution studies, all written as CSV.

pub mod config;
pub mod run;

pub use config::{Config, ConfigError, Purpose, Violation};
pub use run::{run, Command, RunError, RunSpec};
