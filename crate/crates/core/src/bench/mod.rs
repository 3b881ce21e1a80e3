//! Experiment runner, metrics and output files.

mod config;
mod emit;
mod metrics;
mod runner;

pub use config::{Algorithm, EnvSpec, RunConfig};
pub use emit::{
    csv_row, emit, read_csv_logs, read_jsonl_logs, read_trace, summary_path, write_summary,
    write_trace, OutputFormat, CSV_HEADER,
};
pub use metrics::{
    decompose, decompose_runs, pseudo_regret_from, pseudo_regret_step, pv_loss,
    DecompositionReport, Stat,
};
pub use runner::{
    build_agent, run_experiment, run_experiment_partial, run_seed, ExperimentOutput, RunOutput,
    SeedSummary, Summary,
};
