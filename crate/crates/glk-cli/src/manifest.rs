//! Run manifests: every output file is accompanied by a manifest recording
//! the command, its parameters, the tool version, input digests, and a
//! timestamp. The manifest lives in a sibling file so the output itself
//! stays byte-reproducible.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub version: String,
    pub seed: Option<u64>,
    pub input_digests: BTreeMap<String, String>,
    pub timestamp_unix: u64,
}

impl RunManifest {
    pub fn new(command: &str, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            args: std::env::args().skip(1).collect(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            input_digests: BTreeMap::new(),
            timestamp_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn record_input(&mut self, path: &Path) -> std::io::Result<()> {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        self.input_digests
            .insert(path.display().to_string(), format!("sha256:{:x}", digest));
        Ok(())
    }

    /// Write alongside `output`, as `<output>.manifest.json`.
    pub fn write_beside(&self, output: &Path) -> std::io::Result<()> {
        let mut manifest_path = output.as_os_str().to_owned();
        manifest_path.push(".manifest.json");
        let body = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(manifest_path, body + "\n")
    }
}
