//! Benchmark controller: grids of task × condition cells, robustness
//! metrics, ablation sweeps, reports and the run store.

pub mod metrics;
pub mod report;
pub mod store;
pub mod suite;
pub mod sweep;

use thiserror::Error;

pub use metrics::{corruption_robustness, Deltas, KindColumn, MetricsTable, Rate};
pub use report::{emit_report, load_report, Report, ReportFormat, CSV_HEADER};
pub use store::{RunStore, StoreError, STORE_ENV};
pub use suite::{cell_seed, conditions_from_specs, run_suite, BenchmarkSuite, CellRecord, RunRecord};
pub use sweep::{run_sweep, sweep_variants, SweepKind, SweepVariant};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("suite has no tasks")]
    NoTasks,
    #[error("suite has no conditions")]
    NoConditions,
    #[error("duplicate condition id `{0}`")]
    DuplicateCondition(String),
    #[error("repeats must be at least 1")]
    NoRepeats,
    #[error("report: {0}")]
    Report(String),
}
