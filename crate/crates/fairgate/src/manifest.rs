//! Run manifests: every file-producing command records its full parameter
//! set, input digests, seeds, and outputs beside the primary output, so a
//! run can be reproduced and its provenance audited.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::io::write_atomic;
use crate::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    pub inputs: Vec<InputDigest>,
    pub seeds: Vec<u64>,
    pub generator_version: Option<String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>) -> RunManifest {
        RunManifest {
            command: command.into(),
            parameters: BTreeMap::new(),
            inputs: Vec::new(),
            seeds: Vec::new(),
            generator_version: None,
            outputs: Vec::new(),
        }
    }

    pub fn parameter(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.parameters.insert(key.to_string(), value.to_string());
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self, CliError> {
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(self)
    }

    pub fn seed(&mut self, seed: u64) -> &mut Self {
        self.seeds.push(seed);
        self
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    /// Writes the manifest as `<primary>.manifest.json`, listing itself as
    /// an output first.
    pub fn write_beside(&mut self, primary: &Path) -> Result<PathBuf, CliError> {
        let mut name = primary.as_os_str().to_owned();
        name.push(".manifest.json");
        let path = PathBuf::from(name);
        self.output(&path);
        write_atomic(&path, &crate::io::to_json_bytes(self))?;
        Ok(path)
    }
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let contents = fs::read(path)
        .map_err(|e| CliError::io(format!("cannot digest {}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&contents)))
}
