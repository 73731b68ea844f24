//! Config-driven experiments, codebook files and theory tables for the CLI.

pub mod config;
pub mod experiment;
pub mod report;

pub use config::{ExperimentConfig, Metric, SchemeChoice, SweepAxis};
pub use experiment::{run_experiment, run_experiment_threads, write_results, ResultRow};
pub use report::{emit_codebook, theory_report, write_theory, TheoryRow};
