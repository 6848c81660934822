//! Event-trace records, JSONL serialization, and the structural
//! invariant checker used on every trace.

use super::scheduler::{rung_resource, AshaParams};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Start,
    Complete,
    Promote,
}

/// One scheduler event. `epochs` is the cumulative resource of the rung
/// the event refers to; `metric` is present on completions only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceEvent {
    pub event: EventKind,
    pub config: u64,
    pub rung: usize,
    pub epochs: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric: Option<f64>,
    pub wall_seconds: f64,
}

/// Deterministic view of a trace: everything except wall time. Metrics
/// compare bitwise.
pub fn trace_signature(events: &[TraceEvent]) -> Vec<(EventKind, u64, usize, u64, Option<u64>)> {
    events
        .iter()
        .map(|e| (e.event, e.config, e.rung, e.epochs, e.metric.map(f64::to_bits)))
        .collect()
}

pub fn write_trace_jsonl(events: &[TraceEvent], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for e in events {
        writeln!(w, "{}", serde_json::to_string(e)?)?;
    }
    Ok(())
}

pub fn read_trace_jsonl(path: &Path) -> Result<Vec<TraceEvent>> {
    let reader = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut events = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if !line.is_empty() {
            events.push(serde_json::from_str(&line)?);
        }
    }
    Ok(events)
}


/// Replays a trace and checks, event by event:
///
/// - promotion soundness: at promotion time the promoted entry ranks
///   within the top `floor(n_k / eta)` completed metrics of its source
///   rung (ties by id);
/// - single occupancy: no config runs in two rungs at once;
/// - monotone resources: every start strictly increases the config's
///   cumulative epochs;
/// - rung resources match `min(r * eta^k, R)`.
pub fn check_trace_invariants(events: &[TraceEvent], params: &AshaParams) -> Result<()> {
    let mut completed: BTreeMap<(u64, usize), f64> = BTreeMap::new();
    let mut running: BTreeMap<u64, usize> = BTreeMap::new();
    let mut last_epochs: BTreeMap<u64, u64> = BTreeMap::new();
    let mut promoted: BTreeSet<(u64, usize)> = BTreeSet::new();
    let fail = |i: usize, msg: String| Err(Error::Scheduler(format!("event {i}: {msg}")));

    for (i, e) in events.iter().enumerate() {
        let expected = rung_resource(params, e.rung)?;
        if e.epochs != expected {
            return fail(i, format!("rung {} carries {} epochs, expected {expected}", e.rung, e.epochs));
        }
        match e.event {
            EventKind::Start => {
                if running.contains_key(&e.config) {
                    return fail(i, format!("config {} already running", e.config));
                }
                if let Some(&prev) = last_epochs.get(&e.config) {
                    if e.epochs <= prev {
                        return fail(
                            i,
                            format!("config {} resources not monotone: {prev} -> {}", e.config, e.epochs),
                        );
                    }
                }
                running.insert(e.config, e.rung);
                last_epochs.insert(e.config, e.epochs);
            }
            EventKind::Complete => {
                match running.get(&e.config) {
                    Some(&rung) if rung == e.rung => {}
                    _ => return fail(i, format!("config {} not running at rung {}", e.config, e.rung)),
                }
                let metric = match e.metric {
                    Some(m) if m.is_finite() => m,
                    _ => return fail(i, "completion without finite metric".into()),
                };
                running.remove(&e.config);
                completed.insert((e.config, e.rung), metric);
            }
            EventKind::Promote => {
                if e.rung == 0 {
                    return fail(i, "promotion into rung 0".into());
                }
                let source = e.rung - 1;
                let metric = match completed.get(&(e.config, source)) {
                    Some(&m) => m,
                    None => return fail(i, format!("config {} promoted without completing rung {source}", e.config)),
                };
                if !promoted.insert((e.config, source)) {
                    return fail(i, format!("config {} promoted twice from rung {source}", e.config));
                }
                let mut rung_metrics: Vec<(f64, u64)> = completed
                    .iter()
                    .filter(|((_, r), _)| *r == source)
                    .map(|((c, _), &m)| (m, *c))
                    .collect();
                rung_metrics.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
                let top = rung_metrics.len() / params.eta as usize;
                let rank = rung_metrics
                    .iter()
                    .position(|&(m, c)| c == e.config && m == metric)
                    .expect("metric present");
                if rank >= top {
                    return fail(
                        i,
                        format!(
                            "config {} promoted at rank {} of rung {source} (top {top} of {})",
                            e.config,
                            rank + 1,
                            rung_metrics.len()
                        ),
                    );
                }
            }
        }
    }
    Ok(())
}
