//! A deliberately plain single-worker simulation of the promotion rule,
//! kept independent of the scheduler implementation. Used only as a test
//! oracle: traces from `run_asha` with one worker must match this exactly
//! on deterministic metric tables.

use super::trace::{EventKind, TraceEvent};
use super::AshaParams;
use crate::asha::StopRule;
use crate::Result;
use std::collections::{HashMap, HashSet};

/// Simulates ASHA over a metric table (`table[config][rung]` = metric the
/// config reports at that rung) and returns the event trace.
pub fn run_reference_sim(table: &[Vec<f64>], params: &AshaParams) -> Result<Vec<TraceEvent>> {
    params.validate()?;
    // resources per rung, capped at R
    let mut resources = vec![params.r];
    while *resources.last().unwrap() < params.max_resource {
        resources.push((resources.last().unwrap() * params.eta).min(params.max_resource));
    }
    let top = resources.len() - 1;

    let mut completed: HashMap<(usize, usize), f64> = HashMap::new();
    let mut promoted: HashSet<(usize, usize)> = HashSet::new();
    let mut events = Vec::new();
    let mut jobs = 0u64;
    let mut epochs_spent = 0u64;
    let mut next_id = 0usize;

    loop {
        if let StopRule::MaxJobs(n) = params.stop {
            if jobs >= n {
                break;
            }
        }
        // pick the action: highest source rung with a promotable entry
        let mut action: Option<(usize, usize)> = None; // (config, source rung)
        for k in (0..top).rev() {
            let mut rows: Vec<(f64, usize)> = completed
                .iter()
                .filter(|((_, r), _)| *r == k)
                .map(|((c, _), &m)| (m, *c))
                .collect();
            rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            let quota = rows.len() / params.eta as usize;
            if let Some(&(_, c)) = rows[..quota].iter().find(|&&(_, c)| !promoted.contains(&(c, k))) {
                action = Some((c, k));
                break;
            }
        }

        let (config, rung, cost) = match action {
            Some((c, k)) => (c, k + 1, resources[k + 1] - resources[k]),
            None => {
                if next_id >= table.len() {
                    break; // table exhausted
                }
                (next_id, 0, resources[0])
            }
        };
        if let StopRule::MaxTotalEpochs(budget) = params.stop {
            if epochs_spent + cost > budget {
                break;
            }
        }
        jobs += 1;
        epochs_spent += cost;
        if let Some((c, k)) = action {
            promoted.insert((c, k));
            events.push(event(EventKind::Promote, c, rung, resources[rung], None));
        } else {
            next_id += 1;
        }
        events.push(event(EventKind::Start, config, rung, resources[rung], None));
        let metric = table[config][rung];
        completed.insert((config, rung), metric);
        events.push(event(EventKind::Complete, config, rung, resources[rung], Some(metric)));
    }
    Ok(events)
}

fn event(kind: EventKind, config: usize, rung: usize, epochs: u64, metric: Option<f64>) -> TraceEvent {
    TraceEvent {
        event: kind,
        config: config as u64,
        rung,
        epochs,
        metric,
        wall_seconds: 0.0,
    }
}
