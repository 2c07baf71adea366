//! Experiment orchestration: configuration, seeding, the benchmark protocol
//! and CSV output.

mod benchmark;
mod config;
mod csv_io;
mod seed;

pub use benchmark::{run_benchmark, run_setting, BenchmarkOutput, Setting};
pub use config::ExperimentConfig;
pub use csv_io::{decisions_csv, parse_decisions_csv, parse_runs_csv, runs_csv, stats_csv, StatsRow};
pub use seed::derive_seed;
