//! File formats, reports and the command runner for the `qrcp` tool.
//!
//! The numerical work lives in [`qrcp_core`]; this crate reads and writes
//! dense Matrix Market files, turns factorizations and structure reports
//! into CSV and JSON artifacts, and runs Kahan-family parameter sweeps.

pub mod args;
pub mod artifacts;
pub mod commands;
pub mod dynmat;
pub mod error;
pub mod files;
pub mod mtx;
pub mod sweep;

pub use args::{Cli, GridShape, RunStrategy, SweepFamily};
pub use commands::{run, Outcome};
pub use dynmat::AnyMatrix;
pub use error::CliError;
pub use sweep::{c_grid, run_case, run_sweep, sweep_csv, SweepRow, SweepSpec};
