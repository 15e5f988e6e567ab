//! Configuration parsing and result serialization.

pub mod config;
pub mod ledger;
pub mod snapshot;

pub use config::{config_hash, parse_config, OutputOptions, ParsedConfig, SnapshotFormat};
pub use ledger::{read_ledger_csv, write_ledger_csv, LEDGER_HEADER};
pub use snapshot::{pressure_on_q2_grid, write_archive, write_field_snapshot};
