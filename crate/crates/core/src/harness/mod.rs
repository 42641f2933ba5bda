//! End-to-end experiments: coarse solve, replication, fine-grid overlap and
//! phase-estimation statistics, plus sweeps over the coarse size.

pub mod checks;
pub mod config;
pub mod pipeline;
pub mod sweep;

pub use config::{ExperimentConfig, FineGrid, QpeSettings};
pub use pipeline::{
    end_to_end_success_rate, failure_at_fine_sizes, point_instance, prepare_and_compare, run_pipeline,
    solve_problem, FineProblem, GoodSetCheck, OverlapSummary, RunRecord, RunReport, ShotStats,
};
pub use sweep::{fit_rows, sweep_and_fit, SweepResult, SweepRow};
