//! Asynchronous successive halving: configs start at `r` epochs and the
//! top `1/eta` of each rung is promoted to `eta` times more resource,
//! capped at `R`, with promotions made eagerly as workers free up. A
//! single worker is fully deterministic; multiple workers keep every
//! structural invariant but traces depend on completion order.

mod reference;
mod runner;
mod scheduler;
mod trace;

pub use reference::run_reference_sim;
pub use runner::{run_asha, run_scheduled, AshaOutcome, AshaRunConfig, AshaRunner, TableRunner};
pub use scheduler::{rung_resource, AshaParams, AshaState, ConfigEntry, Job, RungStatus, StopRule};
pub use trace::{
    check_trace_invariants, read_trace_jsonl, trace_signature, write_trace_jsonl, EventKind,
    TraceEvent,
};
