//! Experiment harness for RSGD with growing batch sizes: data generation,
//! seeded runs, constant-versus-growing comparisons, bound evaluation and
//! trade-off tables.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{
    build_experiment_problem, cmd_analyze, cmd_compare, cmd_gen_data, cmd_run, cmd_tradeoff, run_seeds, seed_average,
    tradeoff_text, AnalyzeReport, CompareEntry, CompareReport, FrontierPoint, GenDataOutcome, RunOutcome,
};
pub use config::{AnalysisSection, AnalyzeConfig, ExperimentConfig, ProblemSection, RunSection, TradeoffConfig, TradeoffSection};
pub use error::{CliError, CliResult};
