//! Experiment orchestration: DNS sweeps against the predicted branch, symmetry audits,
//! and branch-diagram output.

mod audit;
mod config;
mod diagram;
mod experiment;
mod sweep;

pub use audit::{phase_offset_error, run_symmetry_audit, step_commutator, AuditRow, AuditTable};
pub use config::{
    default_stepper, CriticalTriple, ExperimentConfig, GridConfig, InitialConfig, ParamsConfig, ReduceConfig,
    RunConfig, ToleranceBlock,
};
pub use diagram::{branch_csv, emit_diagram, runs_json};
pub use experiment::{run_fate, run_to_steady, wrap_angle, Experiment, Fate, FateRun, SteadyRun};
pub use sweep::{
    fit_slope, phase_drift, run_bifurcation_sweep, run_subcritical_bracket, BracketReport, ComparisonReport,
    ComparisonRow, PhaseDrift,
};
