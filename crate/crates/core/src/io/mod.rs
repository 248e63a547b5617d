//! Configuration ingestion and deterministic result serialization: JSON
//! configs and reports, CSV tables, SVG plots.

pub mod config;
pub mod csv;
pub mod svg;

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

pub use config::{load_config, parse_config, OutputConfig, OutputFormat, RunConfig, EFFECTIVE_CONFIG_FILE};
pub use csv::{format_number, write_csv, write_trajectory_csv};
pub use svg::{emit_plot_svg, render_svg, Plot, PlotKind};

pub fn write_text_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    write_text_file(path, &to_json(value))
}
