//! Configuration, serialization and orchestration of experiments.

pub mod config;
mod diagnostics;
pub mod experiment;
mod snapshot;

pub use config::{load_config, parse_config, parse_config_with, CheckName, Format, InitialData, RunConfig};
pub use diagnostics::{emit_csv, write_csv, CSV_HEADER};
pub use snapshot::{read_snapshot, snapshot_from_json, snapshot_to_json, write_snapshot, SNAPSHOT_SCHEMA};
