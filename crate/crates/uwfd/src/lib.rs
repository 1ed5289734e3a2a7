//! Simulation harness around `uwfd-core`: configuration files, parallel
//! sweeps, CSV results, SVG figures and the command-line interface.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;
pub mod selftest;
pub mod sweep;

pub use error::{AppError, Result};
