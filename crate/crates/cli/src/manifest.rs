//! Run manifests: enough to re-run the command that produced an artifact.

use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::failure::CliResult;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: Value,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub started_at: String,
    pub finished_at: String,
}

/// Collects inputs and outputs while a command runs.
pub struct ManifestBuilder {
    command: String,
    config: Value,
    seed: Option<u64>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
    started: DateTime<Utc>,
}

fn timestamp(t: DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl ManifestBuilder {
    pub fn new(command: &str, config: &impl Serialize, seed: Option<u64>) -> Self {
        Self {
            command: command.to_string(),
            config: serde_json::to_value(config).unwrap_or(Value::Null),
            seed,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Utc::now(),
        }
    }

    pub fn input(&mut self, p: impl AsRef<Path>) {
        self.inputs.push(p.as_ref().to_path_buf());
    }

    pub fn output(&mut self, p: impl AsRef<Path>) {
        self.outputs.push(p.as_ref().to_path_buf());
    }

    /// Writes the manifest next to `primary` and returns its path.
    pub fn write(self, primary: impl AsRef<Path>) -> CliResult<PathBuf> {
        let path = sidecar(primary, "manifest");
        let manifest = RunManifest {
            command: self.command,
            argv: std::env::args().collect(),
            config: self.config,
            inputs: self.inputs,
            outputs: self.outputs,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            started_at: timestamp(self.started),
            finished_at: timestamp(Utc::now()),
        };
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)?;
        Ok(path)
    }
}

/// `rho.json` → `rho.<tag>.json`; any other name gets `.<tag>.json` appended.
pub fn sidecar(path: impl AsRef<Path>, tag: &str) -> PathBuf {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "json") {
        path.with_extension(format!("{tag}.json"))
    } else {
        let mut s = path.as_os_str().to_owned();
        s.push(format!(".{tag}.json"));
        PathBuf::from(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_names() {
        assert_eq!(sidecar("out/rho.json", "report"), PathBuf::from("out/rho.report.json"));
        assert_eq!(sidecar("d.qhd", "manifest"), PathBuf::from("d.qhd.manifest.json"));
        assert_eq!(sidecar("curve.csv", "summary"), PathBuf::from("curve.csv.summary.json"));
    }
}
