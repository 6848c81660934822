//! Seed manifests, JSONL run records, bit-exact rerun verification,
//! aggregation, and the reproducibility checklist.

mod aggregate;
mod checklist;
mod manifest;
mod records;
mod verify;

pub use aggregate::{aggregate, Aggregate, SeedStats, TrialStats};
pub use checklist::{checklist_report, render_checklist, Checklist, CodePresence};
pub use manifest::{load_manifest, write_manifest, Manifest};
pub use records::{
    canonical_record_line, check_unique_keys, read_records_jsonl, records_digest,
    write_records_jsonl, RunRecord, Stage,
};
pub use verify::{verify_exact, ReproReport};
