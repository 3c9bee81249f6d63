use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliResult;
use crate::io::write_json;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Record of one command run, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, Value>,
    pub seed: u64,
    /// Output files, relative to the directory holding the manifest.
    pub artifacts: Vec<String>,
    pub version: String,
}

impl RunManifest {
    pub fn new<T: Serialize>(command: &str, args: &T, seed: u64) -> CliResult<Self> {
        let config = match serde_json::to_value(args)? {
            Value::Object(map) => map.into_iter().collect(),
            other => BTreeMap::from([("value".to_string(), other)]),
        };
        Ok(Self {
            command: command.to_string(),
            config,
            seed,
            artifacts: Vec::new(),
            version: concat!("sqrtlasso ", env!("CARGO_PKG_VERSION")).to_string(),
        })
    }

    pub fn add(&mut self, artifact: impl Into<String>) {
        self.artifacts.push(artifact.into());
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        write_json(&dir.join(MANIFEST_FILE), self)
    }

    #[cfg(test)]
    pub fn read(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::error::CliError::Io(format!("{}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}
