//! Artifact writing: atomic file replacement, full-precision CSV, and the
//! run manifest. Every artifact names the config hash so equal configurations
//! are byte-identical and diffable.

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

/// 17 significant digits: lossless round-trip for f64 plotting downstream.
pub fn fmt_full(x: f64) -> String {
    if x == x.trunc() && x.abs() < 1e15 {
        format!("{x:.1}")
    } else {
        format!("{x:.16e}")
    }
}

/// SHA-256 of the canonical (serde_json) encoding, hex, first 16 bytes.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let bytes = serde_json::to_vec(config).expect("config serializes");
    let digest = Sha256::digest(&bytes);
    digest[..16].iter().map(|b| format!("{b:02x}")).collect()
}

/// Write bytes atomically: temp file in the target directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    if !dir.as_os_str().is_empty() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut tmp = PathBuf::from(path);
    let name = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".into());
    tmp.set_file_name(format!(".{name}.tmp-{}", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)
            .with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// A CSV body with full-precision numeric cells.
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            buf: format!("{}\n", header.join(",")),
        }
    }

    pub fn row(&mut self, cells: &[CsvCell]) {
        let line: Vec<String> = cells
            .iter()
            .map(|c| match c {
                CsvCell::Num(x) => fmt_full(*x),
                CsvCell::Int(i) => i.to_string(),
                CsvCell::Str(s) => s.clone(),
            })
            .collect();
        self.buf.push_str(&line.join(","));
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

pub enum CsvCell {
    Num(f64),
    Int(i64),
    Str(String),
}

/// The run manifest written next to every file artifact.
#[derive(Serialize)]
pub struct Manifest {
    pub config: serde_json::Value,
    pub config_hash: String,
    pub root_seed: u64,
    pub versions: Versions,
    pub wall_secs: f64,
    pub outputs: Vec<String>,
}

#[derive(Serialize)]
pub struct Versions {
    pub randpoly: &'static str,
}

impl Manifest {
    pub fn new(config: serde_json::Value, root_seed: u64, wall_secs: f64, outputs: Vec<String>) -> Self {
        let config_hash = config_hash(&config);
        Self {
            config,
            config_hash,
            root_seed,
            versions: Versions {
                randpoly: env!("CARGO_PKG_VERSION"),
            },
            wall_secs,
            outputs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_precision_roundtrip() {
        for &x in &[std::f64::consts::PI, 1.0 / 3.0, 2.0f64.powi(-40), 1234.0] {
            let s = fmt_full(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = serde_json::json!({"n": 4, "profile": "kac"});
        let b = serde_json::json!({"n": 5, "profile": "kac"});
        assert_eq!(config_hash(&a), config_hash(&a));
        assert_ne!(config_hash(&a), config_hash(&b));
    }
}
