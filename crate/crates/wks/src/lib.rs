//! Command-line front end for the `wks-core` bounds: configuration files,
//! CSV/JSON reports with reproducibility headers, parameter sweeps with
//! gnuplot scripts, parallel Monte Carlo, and the `verify` suite.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod par;
pub mod report;
pub mod scenario;
pub mod verify;

pub use error::{exit, CliError};
