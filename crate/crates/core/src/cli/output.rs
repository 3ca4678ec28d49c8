//! Reports, CSV tables and 16-bit PGM images.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Inconclusive => 2,
        }
    }

    /// Fail dominates inconclusive, which dominates pass.
    pub fn combine(self, other: Status) -> Status {
        use Status::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Pass,
        }
    }

    pub fn from_checks(pass: bool, inconclusive: bool) -> Status {
        if inconclusive {
            Status::Inconclusive
        } else if pass {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

/// Self-describing JSON envelope around a command's result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub schema_version: u32,
    pub version: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub status: Status,
    pub exit_code: i32,
    pub config: ExperimentConfig,
    pub result: serde_json::Value,
}

impl Report {
    pub fn new(config: &ExperimentConfig, status: Status, result: serde_json::Value) -> Self {
        Report {
            command: config.params.name().into(),
            schema_version: config.schema_version,
            version: VERSION.into(),
            config_hash: config_hash(config),
            seed: config.params.seed(),
            status,
            exit_code: status.exit_code(),
            config: config.clone(),
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

/// SHA-256 of the compact JSON form of `config`.
pub fn config_hash(config: &ExperimentConfig) -> String {
    let text = serde_json::to_string(config).expect("configs serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Csv {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = line.iter().map(|c| escape(c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

fn escape(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// Cell text for an optional float: empty when absent.
pub fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, &target)?;
    Ok(target)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageSidecar {
    pub image: String,
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    /// Field value mapped to pixel 0.
    pub min: f64,
    /// Field value mapped to `maxval`.
    pub max: f64,
    pub mapping: String,
    pub seed: u64,
    pub schedule: crate::noise::DampingSchedule,
    pub truncation: usize,
    pub grid: crate::spectra::Grid,
    pub quadrature_l2: f64,
    pub coefficient_l2: f64,
}

/// Binary 16-bit PGM of row-major `values`, scaled linearly from `[min, max]` to `[0, 65535]`;
/// a constant image maps to mid-gray.
pub fn encode_pgm16(width: usize, height: usize, values: &[f64]) -> (Vec<u8>, f64, f64) {
    assert_eq!(values.len(), width * height);
    let (min, max) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
        (lo.min(v), hi.max(v))
    });
    let (min, max) = if values.is_empty() { (0.0, 0.0) } else { (min, max) };
    let mut out = format!("P5\n{width} {height}\n65535\n").into_bytes();
    out.reserve(2 * values.len());
    for &v in values {
        let p: u16 = if max > min {
            (((v - min) / (max - min)) * 65535.0).round().clamp(0.0, 65535.0) as u16
        } else {
            32768
        };
        out.extend_from_slice(&p.to_be_bytes());
    }
    (out, min, max)
}
