//! Benchmark harness for the `dgpmg` solver: single solves, reference table
//! sweeps and discretization error sweeps, with CSV and JSON output.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod reference;
pub mod run;
pub mod sweep;
pub mod table;

pub use config::RunConfig;
pub use error::HarnessError;
pub use run::{execute, RunRecord};
