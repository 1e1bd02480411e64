//! File formats, reports and the command-line interface for
//! [`warpband_core`].
//!
//! - [`band_file`]: plain-text band files
//! - [`tables`]: CSV tables written and read by the commands
//! - [`syntax`]: the mini-syntax for bands, prescriptions and maps
//! - [`config`]: tolerances and sweep grids
//! - [`report`]: JSON envelopes and atomic writes
//! - [`oracle`]: brute-force minima for the cut solver
//! - [`plot`]: plot data for bubbles
//! - [`verify`]: the verification suites
//! - [`commands`], [`cli`]: the binary

pub mod band_file;
pub mod cli;
pub mod commands;
pub mod config;
mod error;
pub mod oracle;
pub mod plot;
pub mod report;
pub mod syntax;
pub mod tables;
pub mod verify;

pub use error::{CliError, Result};
