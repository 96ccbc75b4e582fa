//! Run configuration: a JSON document merged with command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

/// Keys of the configuration document that are not command parameters.
const GLOBAL_KEYS: [&str; 3] = ["out", "format", "threads"];

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Core(pbnc_core::Error),
}

impl CliError {
    /// 2 for configuration and I/O problems, 3 for numerical non-convergence.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(pbnc_core::Error::NonConvergence { .. } | pbnc_core::Error::NonFinite { .. }) => 3,
            _ => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "configuration error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<pbnc_core::Error> for CliError {
    fn from(e: pbnc_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Config(format!("csv output: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Settings that shape where and how output is written, not what is computed.
#[derive(Clone, Debug)]
pub struct Globals {
    pub out: PathBuf,
    pub format: Format,
    pub threads: Option<usize>,
}

/// The configuration document split into command parameters and globals.
pub struct Document {
    pub params: Map<String, Value>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub threads: Option<usize>,
}

pub fn load_document(path: Option<&Path>) -> CliResult<Document> {
    let mut params = match path {
        None => Map::new(),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            match serde_json::from_str::<Value>(&text)? {
                Value::Object(m) => m,
                _ => return Err(CliError::Config("config must be a JSON object".into())),
            }
        }
    };
    let mut globals: Map<String, Value> = Map::new();
    for key in GLOBAL_KEYS {
        if let Some(v) = params.remove(key) {
            globals.insert(key.into(), v);
        }
    }
    Ok(Document {
        params,
        out: globals.remove("out").map(serde_json::from_value).transpose()?,
        format: globals.remove("format").map(serde_json::from_value).transpose()?,
        threads: globals.remove("threads").map(serde_json::from_value).transpose()?,
    })
}

/// Merges `overrides` (flags, which win) over the document parameters and
/// deserializes the command configuration. Unknown keys are rejected.
pub fn resolve<T: DeserializeOwned + Serialize>(params: &Map<String, Value>, overrides: Value) -> CliResult<(T, Value)> {
    let mut merged = params.clone();
    if let Value::Object(o) = overrides {
        merged.extend(o);
    }
    let cfg: T = serde_json::from_value(Value::Object(merged))?;
    let echo = serde_json::to_value(&cfg)?;
    Ok((cfg, echo))
}
