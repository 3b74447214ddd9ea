//! Scenario files, trace and summary formats, and the `wmac` command line
//! on top of `wmac-core`.

pub mod cli;
pub mod error;
pub mod runner;
pub mod scenario_file;
pub mod summary;
pub mod table;
pub mod trace_csv;
pub mod verify;

pub use error::{CliError, Result};
