//! Run manifests: what was run, on which bytes, with which seed.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: PathBuf,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Resolved arguments, paths included.
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    pub seed: u64,
    pub version: String,
    pub timestamp: String,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl RunManifest {
    pub fn new(
        command: &str,
        config: serde_json::Value,
        inputs: &[PathBuf],
        seed: u64,
    ) -> Result<RunManifest> {
        let mut paths: Vec<&PathBuf> = inputs.iter().collect();
        paths.sort();
        paths.dedup();
        let inputs = paths
            .into_iter()
            .map(|p| {
                Ok(InputDigest {
                    path: p.clone(),
                    sha256: sha256_file(p)?,
                })
            })
            .collect::<Result<_>>()?;
        Ok(RunManifest {
            command: command.to_owned(),
            config,
            inputs,
            seed,
            version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        })
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        log::info!("manifest written to {}", path.display());
        Ok(())
    }

    /// Fails if any recorded input changed since the manifest was written.
    pub fn verify_inputs(&self) -> Result<()> {
        for input in &self.inputs {
            let now = sha256_file(&input.path)?;
            if now != input.sha256 {
                bail!(
                    "input {} changed since the manifest was written",
                    input.path.display()
                );
            }
        }
        Ok(())
    }

    pub fn config_str(&self, key: &str) -> Result<&str> {
        self.config
            .get(key)
            .and_then(|v| v.as_str())
            .with_context(|| format!("manifest config has no string field {key:?}"))
    }
}

/// Where a command's manifest goes: `--manifest-out` if given, otherwise
/// next to the primary output, otherwise nowhere.
pub fn manifest_path(flag: &Option<PathBuf>, default: Option<PathBuf>) -> Option<PathBuf> {
    flag.clone().or(default)
}

/// `<file>.manifest.json` beside an output file.
pub fn beside(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detects_changed_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("a.txt");
        std::fs::write(&f, "one").unwrap();
        let m = RunManifest::new("x", serde_json::json!({}), &[f.clone(), f.clone()], 1).unwrap();
        assert_eq!(m.inputs.len(), 1);
        m.verify_inputs().unwrap();
        let path = dir.path().join("m.json");
        m.save(&path).unwrap();
        assert_eq!(RunManifest::load(&path).unwrap(), m);
        std::fs::write(&f, "two").unwrap();
        assert!(m.verify_inputs().is_err());
    }

    #[test]
    fn beside_appends_suffix() {
        assert_eq!(
            beside(Path::new("out/model.txt")),
            PathBuf::from("out/model.txt.manifest.json")
        );
    }
}
