//! Run manifests: the resolved config, the command line, and a digest of
//! every file written, so a run can be repeated and checked.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use ciphermimic::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

#[derive(Serialize)]
struct Output {
    path: PathBuf,
    bytes: u64,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    argv: &'a [String],
    created_unix: u64,
    config: &'a ExperimentConfig,
    outputs: Vec<Output>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    summary: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `<dir>/<command>-manifest.json` and returns its path.
pub fn write(
    dir: &Path,
    command: &str,
    argv: &[String],
    config: &ExperimentConfig,
    outputs: &[PathBuf],
    summary: serde_json::Value,
) -> Result<PathBuf> {
    let outputs = outputs
        .iter()
        .map(|p| {
            let data = std::fs::read(p)?;
            Ok(Output {
                path: p.clone(),
                bytes: data.len() as u64,
                sha256: sha256_hex(&data),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let created_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let m = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command,
        argv,
        created_unix,
        config,
        outputs,
        summary,
    };
    let path = dir.join(format!("{command}-manifest.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&m)?)?;
    Ok(path)
}
