//! Experiment harness for the `bwk-core` simulator: configuration and
//! presets, replicated runs with common random numbers, aggregation, CSV
//! output, and the `bwk` command line.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod presets;

pub use config::{CellSpec, ExperimentConfig, Instance, OracleSpec, PolicySpec, SCHEMA_VERSION};
pub use error::{HarnessError, Result};
pub use experiment::{
    aggregate, mean_and_stderr, replication_seed, run_experiment, trace_oracle, AggregateRow,
    ResultRow, RunOptions, TraceRow, NO_ORACLE,
};
