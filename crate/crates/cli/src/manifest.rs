use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{runtime, CliResult};

pub fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> CliResult<String> {
    let bytes = std::fs::read(path).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    Ok(digest(&bytes))
}

fn slashed(p: &Path) -> String {
    p.to_string_lossy().replace('\\', "/")
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct StageRecord {
    pub stage: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

/// What ran, on which inputs, producing which outputs. Holds no timestamps,
/// so identical runs produce identical manifests.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_digest: Option<String>,
    pub seeds: BTreeMap<String, u64>,
    pub workers: usize,
    pub stages: Vec<StageRecord>,
    #[serde(skip)]
    root: PathBuf,
    #[serde(skip)]
    output: PathBuf,
}

impl RunManifest {
    pub fn new(root: &Path, output: &Path, config_digest: Option<String>, seeds: BTreeMap<String, u64>, workers: usize) -> Self {
        RunManifest {
            tool: "discoforge".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_digest,
            seeds,
            workers,
            stages: Vec::new(),
            root: root.to_path_buf(),
            output: output.to_path_buf(),
        }
    }

    /// Input path as recorded: relative to the run root when possible.
    pub fn key(&self, path: &Path) -> String {
        slashed(path.strip_prefix(&self.root).unwrap_or(path))
    }

    /// Output path as recorded: relative to the output root.
    pub fn output_key(&self, path: &Path) -> String {
        slashed(path.strip_prefix(&self.output).unwrap_or(path))
    }

    pub fn push(&mut self, stage: StageRecord) {
        self.stages.push(stage);
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Collects digests for one stage.
pub struct StageLog {
    record: StageRecord,
}

impl StageLog {
    pub fn new(stage: &str) -> Self {
        StageLog {
            record: StageRecord {
                stage: stage.into(),
                ..Default::default()
            },
        }
    }

    pub fn input(&mut self, manifest: &RunManifest, path: &Path) -> CliResult<()> {
        let d = digest_file(path)?;
        self.record.inputs.insert(manifest.key(path), d);
        Ok(())
    }

    pub fn output(&mut self, manifest: &RunManifest, path: &Path, bytes: &[u8]) {
        self.record.outputs.insert(manifest.output_key(path), digest(bytes));
    }

    pub fn finish(self) -> StageRecord {
        self.record
    }
}
