//! Command-line front end: presets, data ingestion, configuration and
//! report emission on top of the `spinorbit` library.

pub mod app;
pub mod config;
pub mod error;
pub mod ingest;
pub mod presets;
pub mod report;
pub mod sweep;

pub use app::{run, Cli};
pub use config::{ModeSpec, OutputFormat, RunConfig};
pub use error::{CliError, CliResult};
pub use ingest::{ingest_csv, ingest_csv_str, ingest_file, ingest_json_str};
pub use presets::{run_preset, Preset};
pub use report::{emit_report, ReportBundle};
