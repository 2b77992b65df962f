//! File formats. Every file written here carries a metadata block with the
//! tool version and the resolved configuration: `#` comment lines at the top
//! of CSV files, a `meta` object in JSON documents.

pub mod curve;
pub mod model;
pub mod panel;
pub mod scores;
pub mod survey;

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const TOOL: &str = "funcausal";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
}

impl Meta {
    pub fn new(command: &str, config: serde_json::Value) -> Self {
        Meta { tool: TOOL.into(), version: VERSION.into(), command: command.into(), config }
    }

    pub fn csv_header(&self) -> String {
        format!(
            "# {} {} {}\n# config {}\n",
            self.tool,
            self.version,
            self.command,
            serde_json::to_string(&self.config).expect("json")
        )
    }
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("json");
    s.push('\n');
    write_file(path, s.as_bytes())
}

/// Shortest representation that parses back to the same `f64`.
pub(crate) fn num(v: f64) -> String {
    format!("{v}")
}
