//! Output collection and the run manifest: every emitted file is recorded
//! with a SHA-256 checksum, and the manifest echoes the resolved config and
//! seed so a run can be reproduced byte for byte.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// Collects experiment artifacts in an output directory.
pub struct OutputCollector {
    dir: PathBuf,
    checksums: BTreeMap<String, String>,
    warnings: Vec<String>,
    metadata: BTreeMap<String, String>,
}

#[derive(Serialize)]
struct ManifestDoc<'a> {
    experiment: &'a str,
    seed: u64,
    excluded_trials: usize,
    warnings: &'a [String],
    metadata: &'a BTreeMap<String, String>,
    checksums: &'a BTreeMap<String, String>,
    config: &'a ExperimentConfig,
}

impl OutputCollector {
    pub fn new(dir: &Path) -> io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(OutputCollector {
            dir: dir.to_path_buf(),
            checksums: BTreeMap::new(),
            warnings: Vec::new(),
            metadata: BTreeMap::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write one artifact and record its checksum.
    pub fn write_file(&mut self, name: &str, contents: &str) -> io::Result<()> {
        std::fs::write(self.dir.join(name), contents)?;
        self.checksums
            .insert(name.to_string(), hex_digest(contents.as_bytes()));
        Ok(())
    }

    pub fn warn(&mut self, message: String) {
        self.warnings.push(message);
    }

    pub fn set_metadata(&mut self, key: &str, value: String) {
        self.metadata.insert(key.to_string(), value);
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn file_names(&self) -> Vec<String> {
        self.checksums.keys().cloned().collect()
    }

    /// Write `manifest.toml` and return the list of emitted files.
    pub fn finish(
        self,
        config: &ExperimentConfig,
        seed: u64,
        excluded_trials: usize,
    ) -> io::Result<Vec<String>> {
        let doc = ManifestDoc {
            experiment: config.experiment.name(),
            seed,
            excluded_trials,
            warnings: &self.warnings,
            metadata: &self.metadata,
            checksums: &self.checksums,
            config,
        };
        let text = toml::to_string_pretty(&doc)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e.to_string()))?;
        std::fs::write(self.dir.join("manifest.toml"), text)?;
        let mut files = self.file_names();
        files.push("manifest.toml".to_string());
        Ok(files)
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
