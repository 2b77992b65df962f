//! Command-line front end for `funcausal-core`: configuration, panel/model/
//! curve/survey file formats, the synthetic benchmark harness and SVG plots.

pub mod benchmark;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod svg;

pub use config::RunConfig;
pub use error::{CliError, Result};
