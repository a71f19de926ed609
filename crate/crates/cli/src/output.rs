//! Data-file encoding, the run report and its manifest.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Duration;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const REPORT_FILE: &str = "report.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.extension())
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(format!("expected csv or json, got `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataFile {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl DataFile {
    /// Rows as CSV (one header row, LF endings) or as a JSON array.
    pub fn encode<T: Serialize>(stem: &str, rows: &[T], format: Format) -> Result<Self, CliError> {
        let bytes = match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(Vec::new());
                for row in rows {
                    w.serialize(row).map_err(|e| CliError::Io(format!("encoding {stem}: {e}")))?;
                }
                w.into_inner().map_err(|e| CliError::Io(format!("encoding {stem}: {e}")))?
            }
            Format::Json => {
                let mut v = serde_json::to_vec_pretty(rows)
                    .map_err(|e| CliError::Io(format!("encoding {stem}: {e}")))?;
                v.push(b'\n');
                v
            }
        };
        Ok(Self {
            name: format!("{stem}.{}", format.extension()),
            bytes,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Everything a scenario produces, before anything touches the disk.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<DataFile>,
    pub metrics: Map<String, Value>,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn metric(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.metrics.insert(name.into(), v);
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub scenario: String,
    pub config: BTreeMap<String, String>,
    pub duration_seconds: f64,
    pub checks: Vec<Check>,
    /// SHA-256 of every data file, by file name.
    pub files: BTreeMap<String, String>,
    /// SHA-256 over the `name:digest` lines of `files`.
    pub digest: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn combined_digest(files: &BTreeMap<String, String>) -> String {
    let mut h = Sha256::new();
    for (name, digest) in files {
        h.update(name.as_bytes());
        h.update(b":");
        h.update(digest.as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Writes the data files and `report.json` into `out`.
pub fn write_outputs(
    out: &Path,
    scenario: &str,
    config: BTreeMap<String, String>,
    outcome: &Outcome,
    duration: Duration,
) -> Result<Manifest, CliError> {
    std::fs::create_dir_all(out).map_err(|e| io(out, e))?;
    let mut files = BTreeMap::new();
    for f in &outcome.files {
        let path = out.join(&f.name);
        std::fs::write(&path, &f.bytes).map_err(|e| io(&path, e))?;
        files.insert(f.name.clone(), sha256_hex(&f.bytes));
    }
    let manifest = Manifest {
        tool: "cparticle".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        scenario: scenario.into(),
        config,
        duration_seconds: duration.as_secs_f64(),
        checks: outcome.checks.clone(),
        digest: combined_digest(&files),
        files,
    };
    let mut report = outcome.metrics.clone();
    report.insert("passed".into(), Value::Bool(outcome.all_passed()));
    report.insert(
        "manifest".into(),
        serde_json::to_value(&manifest).map_err(|e| CliError::Io(e.to_string()))?,
    );
    let mut bytes = serde_json::to_vec_pretty(&Value::Object(report)).map_err(|e| CliError::Io(e.to_string()))?;
    bytes.push(b'\n');
    let path = out.join(REPORT_FILE);
    std::fs::write(&path, bytes).map_err(|e| io(&path, e))?;
    Ok(manifest)
}

pub fn read_manifest(out: &Path) -> Result<Manifest, CliError> {
    let path = out.join(REPORT_FILE);
    let text = std::fs::read_to_string(&path).map_err(|e| io(&path, e))?;
    let mut report: Map<String, Value> =
        serde_json::from_str(&text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let manifest = report
        .remove("manifest")
        .ok_or_else(|| CliError::Io(format!("{}: no manifest", path.display())))?;
    serde_json::from_value(manifest).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Re-hashes every file listed in the manifest; returns the names that no
/// longer match (or are missing).
pub fn verify(out: &Path) -> Result<Vec<String>, CliError> {
    let manifest = read_manifest(out)?;
    let mut bad = Vec::new();
    for (name, digest) in &manifest.files {
        match std::fs::read(out.join(name)) {
            Ok(bytes) if sha256_hex(&bytes) == *digest => {}
            _ => bad.push(name.clone()),
        }
    }
    if combined_digest(&manifest.files) != manifest.digest {
        bad.push("manifest digest".into());
    }
    Ok(bad)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        x: f64,
        flag: bool,
    }

    #[test]
    fn csv_is_lf_and_round_trips_floats() {
        let rows = [Row { x: 0.1 + 0.2, flag: true }, Row { x: -1e-300, flag: false }];
        let f = DataFile::encode("t", &rows, Format::Csv).unwrap();
        let text = String::from_utf8(f.bytes).unwrap();
        assert_eq!(f.name, "t.csv");
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,flag");
        let x: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
        assert_eq!(x, 0.1 + 0.2);
        assert_eq!(lines[2], "-1e-300,false");
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
