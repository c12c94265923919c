//! Experiment engine: ingestion, synthetic data, batteries, metrics and tables.

pub mod battery;
pub mod dataset;
mod kv;
pub mod metrics;
pub mod synth;
pub mod table;

pub use battery::{derive_seed, run_battery, AlgorithmConfig, AlgorithmKind, BatteryOptions, BatteryOutcome, ExperimentSpec};
pub use dataset::{load_csv, write_csv, CsvOptions, DatasetSource, DatasetSpec};
pub use metrics::{aggregate, count_succ, relative_error, summarize, AggregateRow, RunRecord, Stats};
pub use synth::{generate_gaussian_mixture, MixtureComponent, MixtureSpec};
pub use table::{emit_table, parse_aggregate_csv, TableFormat};
