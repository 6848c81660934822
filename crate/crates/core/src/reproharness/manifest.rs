//! The seed manifest: everything needed to re-run an experiment and
//! check its outputs byte for byte. Serialization is canonical JSON with
//! sorted keys; the content hash excludes itself and all wall-clock data.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact_version: String,
    /// Which entry point produced the run: `pipeline`, `asha`, `stage1`,
    /// `sweep`, or `oracle`.
    pub mode: String,
    /// The fully resolved flat configuration (dotted keys).
    pub config: BTreeMap<String, String>,
    pub master_seed: Option<u64>,
    /// Every stream label the run consumed, sorted.
    pub stream_labels: Vec<String>,
    /// Canonical search-space document.
    pub space: String,
    /// Genotypes handed to the run (stage-2/stage-3 entry points).
    pub input_genotypes: Vec<String>,
    /// Canonical genotypes of the run's outputs, in production order.
    pub output_genotypes: Vec<String>,
    /// Where meta-hyperparameter choices are documented, if anywhere.
    pub tuning_docs: Option<String>,
    /// Digest over the sorted canonical run records.
    pub records_digest: String,
    pub content_hash: String,
}

fn canonical_json(manifest: &Manifest) -> String {
    let value = serde_json::to_value(manifest).expect("manifest serializes");
    serde_json::to_string(&value).expect("canonical manifest")
}

impl Manifest {
    /// Fills `content_hash` from every other field.
    pub fn seal(mut self) -> Manifest {
        self.content_hash = String::new();
        let mut hasher = Sha256::new();
        hasher.update(canonical_json(&self).as_bytes());
        self.content_hash = format!("{:x}", hasher.finalize());
        self
    }

    /// Recomputes the hash and compares with the stored one.
    pub fn hash_is_valid(&self) -> bool {
        let mut unsealed = self.clone();
        unsealed.content_hash = String::new();
        let mut hasher = Sha256::new();
        hasher.update(canonical_json(&unsealed).as_bytes());
        format!("{:x}", hasher.finalize()) == self.content_hash
    }
}

/// Writes the manifest as a canonical single-document text file.
pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<()> {
    std::fs::write(path, canonical_json(manifest))?;
    Ok(())
}

/// Loads a manifest and verifies its content hash.
pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path)?;
    let manifest: Manifest = serde_json::from_str(&text)?;
    if !manifest.hash_is_valid() {
        return Err(Error::Repro(format!(
            "manifest hash mismatch in {}",
            path.display()
        )));
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Manifest {
        let mut config = BTreeMap::new();
        config.insert("seeds.master".to_string(), "7".to_string());
        Manifest {
            artifact_version: "0.1.0".into(),
            mode: "pipeline".into(),
            config,
            master_seed: Some(7),
            stream_labels: vec!["stage1/t0/init".into()],
            space: "{}".into(),
            input_genotypes: vec![],
            output_genotypes: vec!["g".into()],
            tuning_docs: Some("README.md".into()),
            records_digest: "d".into(),
            content_hash: String::new(),
        }
        .seal()
    }

    #[test]
    fn round_trip_and_hash() {
        let m = sample();
        assert!(m.hash_is_valid());
        let dir = std::env::temp_dir().join(format!("nanonas-man-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("manifest.json");
        write_manifest(&m, &path).unwrap();
        let loaded = load_manifest(&path).unwrap();
        assert_eq!(m, loaded);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn tampering_detected() {
        let m = sample();
        let dir = std::env::temp_dir().join(format!("nanonas-man2-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("manifest.json");
        write_manifest(&m, &path).unwrap();
        let tampered = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"seeds.master\":\"7\"", "\"seeds.master\":\"8\"");
        std::fs::write(&path, tampered).unwrap();
        assert!(load_manifest(&path).is_err());
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn different_seeds_different_hashes() {
        let a = sample();
        let mut b = sample();
        b.master_seed = Some(8);
        let b = b.seal();
        assert_ne!(a.content_hash, b.content_hash);
    }
}
