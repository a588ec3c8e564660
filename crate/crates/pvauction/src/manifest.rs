//! `run_manifest.json`: what a run read and wrote, by content hash.
//!
//! Paths are recorded as given on the command line and no clock is read,
//! so identical invocations produce identical manifests.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_FILE: &str = "run_manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_path: Option<String>,
    pub seed: Option<u64>,
    pub output_dir: String,
    pub tool_version: String,
    pub inputs: Vec<FileDigest>,
    /// Relative to `output_dir`.
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let file = File::open(path).with_context(|| format!("hashing {}", path.display()))?;
    let mut reader = BufReader::new(file);
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = reader.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

impl RunManifest {
    pub fn new(command: &str, config_path: Option<&Path>, seed: Option<u64>, output_dir: &Path) -> Self {
        RunManifest {
            command: command.into(),
            config_path: config_path.map(|p| p.display().to_string()),
            seed,
            output_dir: output_dir.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            inputs: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn add_inputs<'a>(&mut self, paths: impl IntoIterator<Item = &'a PathBuf>) -> anyhow::Result<()> {
        for p in paths {
            self.inputs.push(FileDigest { path: p.display().to_string(), sha256: sha256_file(p)? });
        }
        Ok(())
    }

    /// Hashes the written files and stores the manifest next to them.
    pub fn finish(mut self, outputs: &[PathBuf]) -> anyhow::Result<Self> {
        let out = PathBuf::from(&self.output_dir);
        let mut outputs: Vec<&PathBuf> = outputs.iter().collect();
        outputs.sort();
        outputs.dedup();
        for p in outputs {
            let rel = p.strip_prefix(&out).unwrap_or(p);
            self.outputs.push(FileDigest { path: rel.display().to_string(), sha256: sha256_file(p)? });
        }
        let mut json = serde_json::to_string_pretty(&self)?;
        json.push('\n');
        std::fs::write(out.join(MANIFEST_FILE), json)?;
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc.txt");
        std::fs::write(&p, b"abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
