//! Output directory, CSV writer and the JSON run manifest.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use eitbragg_core::Table;

use crate::config::ScenarioConfig;
use crate::error::CliError;

pub const TOOL: &str = "eitbragg";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub preset: Option<String>,
    /// SHA-256 of the resolved configuration serialised as TOML.
    pub config_sha256: String,
    /// SHA-256 over tool, version, command and resolved configuration. Every
    /// CSV written by the run carries it.
    pub manifest_hash: String,
    pub created_unix_s: u64,
    pub status: String,
    pub config: ScenarioConfig,
    pub derived: Value,
    pub results: Map<String, Value>,
    pub warnings: Vec<String>,
    pub outputs: Vec<OutputRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub struct Run {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl Run {
    pub fn new(dir: &Path, command: &str, preset: Option<&str>, cfg: &ScenarioConfig) -> Result<Self, CliError> {
        let canonical = toml::to_string(cfg).map_err(|e| CliError::Config(format!("serialising config: {e}")))?;
        let config_sha256 = sha256_hex(canonical.as_bytes());
        let manifest_hash = sha256_hex(format!("{TOOL}\n{VERSION}\n{command}\n{canonical}").as_bytes());
        fs::create_dir_all(dir)?;
        let created_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                tool: TOOL,
                version: VERSION,
                command: command.to_string(),
                preset: preset.map(str::to_string),
                config_sha256,
                manifest_hash,
                created_unix_s,
                status: "running".into(),
                config: cfg.clone(),
                derived: Value::Null,
                results: Map::new(),
                warnings: Vec::new(),
                outputs: Vec::new(),
            },
        })
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.manifest.results.insert(key.to_string(), v);
    }

    /// Writes `table` as `<name>.csv` with the run's header comments.
    pub fn csv(&mut self, name: &str, table: &Table) -> Result<(), CliError> {
        let mut buf = Vec::new();
        writeln!(buf, "# {TOOL} {VERSION}, manifest {}", self.manifest.manifest_hash)?;
        writeln!(buf, "# units in brackets after each column name; [1] is dimensionless")?;
        table.write(&mut buf)?;
        self.file(&format!("{name}.csv"), &buf)
    }

    pub fn file(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        w.write_all(bytes)?;
        w.flush()?;
        self.manifest.outputs.push(OutputRecord {
            file: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    /// Writes the manifest; called on success and on numerical failure.
    pub fn finish(mut self, status: Result<(), &CliError>) -> Result<PathBuf, CliError> {
        self.manifest.status = match status {
            Ok(()) => "ok".into(),
            Err(e) => format!("failed: {e}"),
        };
        let path = self.dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(&self.manifest).map_err(std::io::Error::other)?;
        fs::write(&path, text + "\n")?;
        Ok(path)
    }
}
