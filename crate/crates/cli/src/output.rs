//! File emission helpers shared by the subcommands.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;
use crate::{TOOL, VERSION};

/// Provenance block embedded in every JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_hash: String,
    pub seed: Option<u64>,
}

impl Meta {
    pub fn new(config_hash: String, seed: Option<u64>) -> Self {
        Meta {
            tool: TOOL,
            version: VERSION,
            config_hash,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

/// Collects files written into one directory, in write order.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    written: Vec<OutputFile>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| {
            CliError::config(format!(
                "cannot create output directory {}: {e}",
                root.display()
            ))
        })?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.path(name);
        std::fs::write(&path, text)
            .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(OutputFile {
            file: name.to_string(),
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        self.write_text(name, &to_json(value)?)
    }

    pub fn written(&self) -> &[OutputFile] {
        &self.written
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
