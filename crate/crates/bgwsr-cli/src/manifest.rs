//! The run manifest written into every output directory: command, resolved
//! configuration, seed, code version, timestamps and input-file digests.

use std::collections::BTreeMap;
use std::path::Path;

use sha2::{Digest, Sha256};

use bgwsr::error::{Error, Result};

#[derive(Debug, serde::Serialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub code_version: String,
    pub started_at: String,
    pub finished_at: Option<String>,
    /// Resolved configuration values, either plain strings or JSON blobs.
    pub config: BTreeMap<String, serde_json::Value>,
    /// SHA-256 digests of every input file, keyed by path.
    pub input_digests: BTreeMap<String, String>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

impl RunManifest {
    pub fn start(command: &str, seed: u64) -> Self {
        RunManifest {
            command: command.to_string(),
            seed,
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: now(),
            finished_at: None,
            config: BTreeMap::new(),
            input_digests: BTreeMap::new(),
        }
    }

    pub fn insert_config(&mut self, key: &str, value: &str) {
        self.config.insert(key.to_string(), serde_json::Value::String(value.to_string()));
    }

    pub fn insert_config_json<T: serde::Serialize>(&mut self, key: &str, value: &T) -> Result<()> {
        let json = serde_json::to_value(value)
            .map_err(|e| Error::invalid(format!("manifest serialisation failed: {e}")))?;
        self.config.insert(key.to_string(), json);
        Ok(())
    }

    pub fn record_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        self.input_digests.insert(path.display().to_string(), format!("{digest:x}"));
        Ok(())
    }

    /// Stamps the end time and writes `manifest.json` into the directory.
    pub fn finish(mut self, out_dir: &Path) -> Result<()> {
        self.finished_at = Some(now());
        let json = serde_json::to_string_pretty(&self)
            .map_err(|e| Error::invalid(format!("manifest serialisation failed: {e}")))?;
        std::fs::write(out_dir.join("manifest.json"), json + "\n")?;
        Ok(())
    }
}
