//! Fully implicit DLN time stepping for the 2D periodic Navier–Stokes
//! equations, with a ledger that evaluates the energy inequalities along
//! the computed trajectory.

pub mod error;
pub mod ledger;
pub mod simulation;
pub mod solver;
pub mod step;

pub use error::{Result, StepperError};
pub use ledger::{
    csv_columns, fmt_f64, write_ledger_csv, Check, CheckSummary, CheckTracker, LedgerRow, CUMULATIVE_TOL, STEP_TOL,
};
pub use simulation::{run_simulation, run_simulation_with, RunSummary, SimulationConfig, SimulationOutput, Start};
pub use solver::{solve_stage, SolverMode, SolverPolicy, StageSolution};
pub use step::{advance, bootstrap_first_step, stage_residual, StepState, Stepper};
