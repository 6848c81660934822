//! Bit-exact rerun verification: re-execute the manifest's configuration
//! and diff every deterministic field of every record and output
//! genotype.

use super::manifest::Manifest;
use super::records::{canonical_record_line, read_records_jsonl, records_digest};
use crate::pipeline::execute_mode;
use crate::{config, Result};
use std::collections::BTreeSet;
use std::path::Path;

/// Outcome of a verification: empty `diffs` means exactly reproducible.
#[derive(Debug, Clone, Default)]
pub struct ReproReport {
    pub diffs: Vec<String>,
    pub warnings: Vec<String>,
}

impl ReproReport {
    pub fn exact(&self) -> bool {
        self.diffs.is_empty()
    }
}

const MAX_LISTED_DIFFS: usize = 20;

/// Re-executes the run described by `manifest` (whose `results.jsonl`
/// and any oracle table live in `dir`) and reports every difference.
/// Multi-worker ASHA runs are order-dependent, so exactness is not
/// guaranteed and a warning says so.
pub fn verify_exact(manifest: &Manifest, dir: &Path) -> Result<ReproReport> {
    let mut report = ReproReport::default();
    if manifest.mode == "asha" {
        if let Some(workers) = manifest.config.get("asha.workers") {
            if workers.parse::<usize>().unwrap_or(1) > 1 {
                report.warnings.push(
                    "asha with workers > 1 is order-dependent; exactness not guaranteed".into(),
                );
            }
        }
    }

    let resolved = config::resolve(&manifest.config)?;
    let rerun = execute_mode(&manifest.mode, &resolved, &manifest.input_genotypes)?;

    // output genotypes, positionally
    if rerun.manifest.output_genotypes != manifest.output_genotypes {
        let n = manifest.output_genotypes.len().max(rerun.manifest.output_genotypes.len());
        for i in 0..n {
            let old = manifest.output_genotypes.get(i);
            let new = rerun.manifest.output_genotypes.get(i);
            if old != new {
                report.diffs.push(format!(
                    "output genotype {i}: recorded {} vs rerun {}",
                    old.map_or("<missing>", |s| s.as_str()),
                    new.map_or("<missing>", |s| s.as_str()),
                ));
            }
        }
    }

    if manifest.mode == "oracle" {
        // byte-compare the regenerated table against the stored one
        let path = dir.join("oracle.jsonl");
        let stored = std::fs::read_to_string(&path)?;
        let tmp = dir.join(".oracle.rerun.jsonl");
        rerun.oracle.as_ref().expect("oracle mode").write_jsonl(&tmp)?;
        let fresh = std::fs::read_to_string(&tmp)?;
        std::fs::remove_file(&tmp).ok();
        if stored != fresh {
            report.diffs.push("oracle.jsonl differs from rerun".into());
        }
        return Ok(report);
    }

    let stored_records = read_records_jsonl(&dir.join("results.jsonl"))?;
    if records_digest(&stored_records) != manifest.records_digest {
        report
            .diffs
            .push("results.jsonl does not match the manifest's records digest".into());
    }

    let stored: BTreeSet<String> = stored_records.iter().map(canonical_record_line).collect();
    let fresh: BTreeSet<String> = rerun.records.iter().map(canonical_record_line).collect();
    for line in stored.difference(&fresh).take(MAX_LISTED_DIFFS) {
        report.diffs.push(format!("recorded but not reproduced: {line}"));
    }
    for line in fresh.difference(&stored).take(MAX_LISTED_DIFFS) {
        report.diffs.push(format!("reproduced but not recorded: {line}"));
    }
    Ok(report)
}
