//! CSV artifacts and the run manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Writes CSVs into one directory, each starting with a `#` line carrying the config hash.
pub struct CsvSink {
    dir: PathBuf,
    comment: String,
    written: Vec<String>,
}

impl CsvSink {
    pub fn new(dir: &Path, kind: &str, hash: &str) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), comment: format!("config_sha256={hash} kind={kind}"), written: Vec::new() })
    }

    pub fn comment(&self) -> &str {
        &self.comment
    }

    /// Opens `name` for a caller that writes the comment line itself.
    pub fn raw(&mut self, name: &str) -> std::io::Result<BufWriter<File>> {
        let f = File::create(self.dir.join(name))?;
        self.written.push(name.to_string());
        Ok(BufWriter::new(f))
    }

    pub fn table<R, I>(&mut self, name: &str, header: &[&str], rows: I) -> std::io::Result<()>
    where
        R: IntoIterator,
        R::Item: AsRef<[u8]>,
        I: IntoIterator<Item = R>,
    {
        let mut out = self.raw(name)?;
        writeln!(out, "# {}", self.comment)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), pass, detail: detail.into() }
    }
}

#[derive(Debug, Clone, Copy, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Passed,
    ChecksFailed,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub kind: String,
    pub config_path: String,
    pub config_sha256: String,
    pub config: String,
    pub seed: u64,
    pub threads: Option<usize>,
    pub estimated_cost: Option<f64>,
    pub cost_ceiling: Option<f64>,
    pub wall_time_s: f64,
    pub status: Status,
    /// Stage that stopped the run: `parse_config`, `setup`, `run` or `write`.
    pub failed_stage: Option<String>,
    pub errors: Vec<String>,
    pub checks: Vec<CheckResult>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn exit_code(&self) -> i32 {
        match (self.status, self.failed_stage.as_deref()) {
            (Status::Passed, _) => 0,
            (_, Some("parse_config")) => 2,
            _ => 1,
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("manifest.json");
        let mut f = BufWriter::new(File::create(&path)?);
        serde_json::to_writer_pretty(&mut f, self)?;
        writeln!(f)?;
        f.flush()?;
        Ok(path)
    }
}
