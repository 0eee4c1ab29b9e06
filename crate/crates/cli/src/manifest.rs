//! Run manifests: what a command read, what it wrote, and the checksums.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use lob_arena_market::scenario::io;
use serde::{Deserialize, Serialize};

pub const RUN_MANIFEST: &str = "run_manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the manifest's directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub inputs: Vec<String>,
    pub outputs: Vec<Artifact>,
    pub wall_time_s: f64,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn output(&self, path: &str) -> Option<&Artifact> {
        self.outputs.iter().find(|a| a.path == path)
    }
}

pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    Ok(io::sha256_bytes(&serde_json::to_vec(config)?))
}

fn relative(base: &Path, p: &Path) -> String {
    p.strip_prefix(base).unwrap_or(p).to_string_lossy().replace('\\', "/")
}

/// Files written by one stage, recorded as they are produced.
#[derive(Debug, Default)]
pub struct Outputs {
    pub inputs: Vec<PathBuf>,
    pub files: Vec<PathBuf>,
}

impl Outputs {
    pub fn input(&mut self, p: impl Into<PathBuf>) {
        self.inputs.push(p.into());
    }

    pub fn file(&mut self, p: impl Into<PathBuf>) {
        self.files.push(p.into());
    }

    pub fn extend(&mut self, other: Outputs) {
        self.inputs.extend(other.inputs);
        self.files.extend(other.files);
    }

    pub fn write_json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<()> {
        write_json(&path, value)?;
        self.file(path);
        Ok(())
    }

    pub fn write_text(&mut self, path: PathBuf, text: &str) -> Result<()> {
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.file(path);
        Ok(())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub struct Stage {
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    started: Instant,
}

impl Stage {
    pub fn start<T: Serialize>(command: &str, config: &T, seed: Option<u64>) -> Result<Self> {
        Ok(Self {
            command: command.to_string(),
            config_hash: config_hash(config)?,
            seed,
            started: Instant::now(),
        })
    }

    /// Checksums every output and writes `run_manifest.json` into `dir`.
    pub fn finish(self, dir: &Path, out: &Outputs) -> Result<RunManifest> {
        let mut files = out.files.clone();
        files.sort();
        files.dedup();
        let outputs = files
            .iter()
            .map(|p| {
                Ok(Artifact {
                    path: relative(dir, p),
                    sha256: io::sha256_file(p)?,
                    bytes: std::fs::metadata(p)?.len(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let manifest = RunManifest {
            command: self.command,
            config_hash: self.config_hash,
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs: out.inputs.iter().map(|p| p.to_string_lossy().into_owned()).collect(),
            outputs,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        };
        write_json(&dir.join(RUN_MANIFEST), &manifest)?;
        Ok(manifest)
    }
}
