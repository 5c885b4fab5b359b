//! Output directories and the manifest describing them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use swssb_core::hash::{bytes_hash, canonical_json, content_hash};

use crate::error::{CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CSV_SCHEMA: &str = "series-csv/1 (t,mean,stderr)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: Value,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub units: Value,
    pub csv_schema: String,
    pub started: String,
    pub finished: String,
    pub files: Vec<OutputFile>,
}

impl RunManifest {
    pub fn read(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Other(format!("cannot read {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Collects files written into one output directory.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<OutputFile>,
    started: String,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(root)?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
            started: now(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        std::fs::write(&path, bytes)?;
        self.files.push(OutputFile {
            path: rel.to_string(),
            bytes: bytes.len() as u64,
            sha256: bytes_hash(bytes),
        });
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> CliResult<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    /// Registers a file some other routine already wrote under the root.
    pub fn adopt(&mut self, path: &Path) -> CliResult<()> {
        let rel = path
            .strip_prefix(&self.root)
            .map_err(|_| CliError::Other(format!("{} is outside the output directory", path.display())))?;
        let bytes = std::fs::read(path)?;
        self.files.push(OutputFile {
            path: rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"),
            bytes: bytes.len() as u64,
            sha256: bytes_hash(&bytes),
        });
        Ok(())
    }

    /// Writes `manifest.json` listing every registered file.
    pub fn finish<T: Serialize>(mut self, command: &str, config: &T, seed: Option<u64>) -> CliResult<RunManifest> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let config_value: Value = serde_json::from_str(&canonical_json(config)?)?;
        let manifest = RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: content_hash(config)?,
            config: config_value,
            seed,
            units: serde_json::json!({"energy": "J", "time": "1/J", "J": 1.0}),
            csv_schema: CSV_SCHEMA.to_string(),
            started: self.started.clone(),
            finished: now(),
            files: self.files,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(self.root.join(MANIFEST_FILE), text)?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_every_file() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path()).unwrap();
        out.write("b.csv", b"t,mean,stderr\n").unwrap();
        out.write("sub/a.json", b"{}").unwrap();
        std::fs::write(dir.path().join("extra.bin"), [1u8, 2, 3]).unwrap();
        out.adopt(&dir.path().join("extra.bin")).unwrap();
        let m = out.finish("test", &serde_json::json!({"b": 1, "a": 2}), Some(3)).unwrap();
        let paths: Vec<&str> = m.files.iter().map(|f| f.path.as_str()).collect();
        assert_eq!(paths, ["b.csv", "extra.bin", "sub/a.json"]);
        assert_eq!(m.files[1].bytes, 3);
        let back = RunManifest::read(dir.path()).unwrap();
        assert_eq!(back, m);
        let same = content_hash(&serde_json::json!({"a": 2, "b": 1})).unwrap();
        assert_eq!(m.config_hash, same);
    }
}
