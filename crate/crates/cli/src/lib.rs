//! Experiment harness: seeded inputs, oracle-checked runs of the selection
//! algorithms, CSV/JSON records and scaling tables.

pub mod error;
pub mod output;
pub mod runner;
pub mod scaling;
pub mod spec;

pub use error::CliError;
pub use runner::{run, KeyValue, ResultRecord, CSV_COLUMNS};
pub use scaling::{scaling_table, sweep_n_for, ScalingRow, Sweep};
pub use spec::{Algorithm, ExperimentSpec, Format};
