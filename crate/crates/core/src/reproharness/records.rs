//! One JSONL record per evaluation event. Records hash and compare
//! through a canonical form with wall time stripped, so timing never
//! breaks reproducibility checks.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeSet;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Stage1,
    Stage2,
    Stage3,
    Asha,
}

/// One evaluation record. `(run_id, stage, trial, seed, epoch,
/// metric_name)` is unique within a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_id: String,
    pub stage: Stage,
    pub trial: u64,
    pub seed: u64,
    pub genotype: String,
    pub epoch: u64,
    pub metric_name: String,
    pub metric: f64,
    pub wall_seconds: f64,
}

impl RunRecord {
    pub fn validate(&self) -> Result<()> {
        if !self.metric.is_finite() {
            return Err(Error::non_finite(
                "metric",
                format!("record {}:{:?}:{}", self.run_id, self.stage, self.metric_name),
            ));
        }
        Ok(())
    }
}

/// The deterministic view of a record: canonical JSON without
/// `wall_seconds`.
pub fn canonical_record_line(record: &RunRecord) -> String {
    let mut value = serde_json::to_value(record).expect("record serializes");
    value.as_object_mut().expect("object").remove("wall_seconds");
    // serde_json maps are sorted by key
    serde_json::to_string(&value).expect("canonical record")
}

/// SHA-256 over the sorted canonical record lines; invariant under
/// reordering of the JSONL file.
pub fn records_digest(records: &[RunRecord]) -> String {
    let mut lines: Vec<String> = records.iter().map(canonical_record_line).collect();
    lines.sort();
    let mut hasher = Sha256::new();
    for line in lines {
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
    }
    format!("{:x}", hasher.finalize())
}

/// Rejects duplicate `(run_id, stage, trial, seed, epoch, metric_name)`
/// keys.
pub fn check_unique_keys(records: &[RunRecord]) -> Result<()> {
    let mut seen = BTreeSet::new();
    for r in records {
        let key = (
            r.run_id.clone(),
            r.stage,
            r.trial,
            r.seed,
            r.epoch,
            r.metric_name.clone(),
        );
        if !seen.insert(key) {
            return Err(Error::Config(format!(
                "duplicate record key: {} {:?} trial {} seed {} epoch {} {}",
                r.run_id, r.stage, r.trial, r.seed, r.epoch, r.metric_name
            )));
        }
    }
    Ok(())
}

pub fn write_records_jsonl(records: &[RunRecord], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        writeln!(w, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}

pub fn read_records_jsonl(path: &Path) -> Result<Vec<RunRecord>> {
    let reader = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if !line.is_empty() {
            records.push(serde_json::from_str(&line)?);
        }
    }
    Ok(records)
}
