//! Nonlinear time integration of the perturbation system in the shearing frame.

mod config;
mod energy;
mod remap;
mod rhs;
mod run;
pub mod snapshot;
mod stepper;

pub use config::{InitialCondition, RemapPolicy, SimConfig};
pub use energy::{energy_balance_residual, energy_rate, simpson_nonuniform};
pub use remap::{remap_shear_frame, shift_labels, shift_state};
pub use rhs::{nonlinear_rhs, quadratic_energy_transfer, RhsEvaluator, INPUT_DIV_TOL};
pub use run::{initial_state, run, run_from_state, run_with, DiagnosticSample, RemapEvent, Trajectory};
pub use stepper::{cfl_limit, propagate, velocity_bound, Stepper, STEP_DIV_TOL};
