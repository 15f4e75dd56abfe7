//! Artifact writing. Every artifact starts with the resolved config, its
//! hash, the seed and the RNG construction.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use roughvol::rng::RNG_ALGORITHM;

use crate::config::{Format, RunConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Header {
    pub command: String,
    pub config_json: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Header {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        let config_json = config.to_json();
        let config_sha256 = Sha256::digest(config_json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        Self {
            command: command.to_string(),
            config_json,
            config_sha256,
            seed: config.execution.seed,
        }
    }

    fn write_comment<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# command: {}", self.command)?;
        writeln!(w, "# config: {}", self.config_json)?;
        writeln!(w, "# config_sha256: {}", self.config_sha256)?;
        writeln!(w, "# seed: {}", self.seed)?;
        writeln!(w, "# rng: {RNG_ALGORITHM}")
    }
}

/// A command result in both renderings.
pub struct Artifact {
    pub csv: Vec<u8>,
    pub json: Value,
}

impl Artifact {
    pub fn from_csv(write: impl FnOnce(&mut Vec<u8>) -> io::Result<()>, json: Value) -> io::Result<Self> {
        let mut csv = Vec::new();
        write(&mut csv)?;
        Ok(Self { csv, json })
    }
}

pub fn render(header: &Header, artifact: &Artifact, format: Format) -> io::Result<Vec<u8>> {
    let mut out = Vec::new();
    match format {
        Format::Csv => {
            header.write_comment(&mut out)?;
            out.extend_from_slice(&artifact.csv);
        }
        Format::Json => {
            let config: Value = serde_json::from_str(&header.config_json).map_err(io::Error::other)?;
            let doc = json!({
                "command": header.command,
                "config": config,
                "config_sha256": header.config_sha256,
                "seed": header.seed,
                "rng": RNG_ALGORITHM,
                "result": artifact.json,
            });
            serde_json::to_writer_pretty(&mut out, &doc).map_err(io::Error::other)?;
            out.push(b'\n');
        }
    }
    Ok(out)
}

/// Writes to `path`, creating missing parent directories, or to stdout.
pub fn emit(bytes: &[u8], path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, bytes)
        }
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()
        }
    }
}
