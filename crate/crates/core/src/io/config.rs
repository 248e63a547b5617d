use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::IntegrationConfig;
use crate::error::{Error, Result};
use crate::params::{validate_parameters, ModelParameters, StorageParameters};
use crate::scenarios::ScenarioSpec;

/// File name of the provenance echo written next to every output set.
pub const EFFECTIVE_CONFIG_FILE: &str = "effective_config.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "unknown output format '{other}', expected csv or json"
            ))),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            formats: vec![OutputFormat::Csv],
        }
    }
}

/// Complete run configuration. Every section is optional in the file and
/// falls back to the calibrated defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelParameters,
    pub storage: StorageParameters,
    pub simulation: IntegrationConfig,
    pub scenario: ScenarioSpec,
    pub output: OutputConfig,
}

impl RunConfig {
    /// Checks every section, including the scenario overlay merged on top of
    /// `model` and `storage`.
    pub fn validate(&self) -> Result<()> {
        validate_parameters(&self.model, Some(&self.storage))?;
        self.simulation
            .steps()
            .map_err(|e| Error::Config(format!("simulation: {e}")))?;
        self.scenario.resolve(&self.model, &self.storage)?;
        if self.output.formats.is_empty() {
            return Err(Error::Config("output.formats: at least one format is required".into()));
        }
        Ok(())
    }

    /// Pretty JSON of the full effective configuration, newline-terminated.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn write_effective(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(EFFECTIVE_CONFIG_FILE);
        super::write_text_file(&path, &self.to_json())?;
        Ok(path)
    }
}

/// Parses and validates a configuration document. `origin` prefixes parse
/// errors (usually the file path).
pub fn parse_config(text: &str, origin: &str) -> Result<RunConfig> {
    let mut cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
        Error::Config(format!(
            "{origin}:{}:{}: {}",
            e.line(),
            e.column(),
            strip_position(&e.to_string())
        ))
    })?;
    cfg.scenario.cfg = cfg.simulation;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text, &path.display().to_string())
}

fn strip_position(msg: &str) -> &str {
    msg.rfind(" at line ").map_or(msg, |k| &msg[..k])
}
