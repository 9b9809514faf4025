//! Run manifests and output file helpers.
//!
//! Every command writing files also writes `<stem>.manifest.json` next to
//! its primary output. Side outputs share the same stem, so
//! `best.json`, `best.grid.csv` and `best.runs.csv` all belong to
//! `best.manifest.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub parameters: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<String>,
    pub threads: usize,
    pub started_unix: u64,
    pub wall_time_seconds: f64,
    pub outputs: Vec<String>,
}

/// Collects outputs while a command runs and writes the manifest at the end.
pub struct ManifestBuilder {
    manifest: RunManifest,
    clock: Instant,
    path: PathBuf,
}

impl ManifestBuilder {
    pub fn new(command: &str, parameters: Value, primary: &Path) -> Self {
        let started_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            manifest: RunManifest {
                tool: env!("CARGO_PKG_NAME"),
                version: env!("CARGO_PKG_VERSION"),
                command: command.into(),
                parameters,
                seed: None,
                generator: None,
                threads: rayon::current_num_threads(),
                started_unix,
                wall_time_seconds: 0.0,
                outputs: Vec::new(),
            },
            clock: Instant::now(),
            path: sibling(primary, "manifest.json"),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn seed(&mut self, seed: u64, generator: Option<String>) {
        self.manifest.seed = Some(seed);
        self.manifest.generator = generator;
    }

    pub fn output(&mut self, path: &Path) {
        self.manifest.outputs.push(path.display().to_string());
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.manifest.wall_time_seconds = self.clock.elapsed().as_secs_f64();
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        text.push('\n');
        write_file(&self.path, text.as_bytes())?;
        Ok(self.path)
    }
}

/// `dir/stem.json` with suffix `grid.csv` becomes `dir/stem.grid.csv`.
pub fn sibling(primary: &Path, suffix: &str) -> PathBuf {
    let stem = primary
        .file_stem()
        .map_or_else(|| "out".into(), |s| s.to_string_lossy().into_owned());
    primary.with_file_name(format!("{stem}.{suffix}"))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, bytes).map_err(io)
}

/// Renders rows as CSV with the given header.
pub fn csv_bytes(path: &Path, header: &[&str], rows: &[Vec<String>]) -> CliResult<Vec<u8>> {
    let err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.into_error(),
    })
}
