//! Experiment configs, training runs, curve files and reports.

pub mod config;
pub mod emit;
pub mod report;
pub mod run;

pub use config::{Conversion, ExperimentConfig, ProblemSpec};
pub use emit::{emit_curves, CurveAxis, CurveFormat};
pub use report::{compare_schedules, lr_sweep, reported_counts, ComparisonReport, LrSweepReport, ReportedCount};
pub use run::{rerun, run, run_experiment, CurveRow, RunRecord, RunSummary};
