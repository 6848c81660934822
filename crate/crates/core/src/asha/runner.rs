//! Drives the scheduler with real work: in-process workers pull jobs,
//! train, and report. One worker is deterministic end to end; more
//! workers keep the invariants but not the trace.

use super::scheduler::{AshaParams, AshaState, Job};
use super::trace::TraceEvent;
use crate::cellnet::{NetConfig, ScratchConfig, StandaloneNet};
use crate::numcore::{split_stream, Real, Rng};
use crate::searchspace::{sample_architecture, serialize_genotype, Architecture, SearchSpace};
use crate::tasks::Dataset;
use crate::{Error, Result};
use std::collections::HashMap;
use std::sync::Mutex;

/// Executes one job for a config payload and returns its metric.
pub trait AshaRunner<A>: Sync {
    fn run(&self, job: &Job, payload: &A) -> Result<f64>;
}

/// Looks metrics up in a fixed table; used to test scheduling in
/// isolation.
pub struct TableRunner {
    pub table: Vec<Vec<f64>>,
}

impl<A> AshaRunner<A> for TableRunner {
    fn run(&self, job: &Job, _payload: &A) -> Result<f64> {
        self.table
            .get(job.config as usize)
            .and_then(|rungs| rungs.get(job.to_rung))
            .copied()
            .ok_or_else(|| Error::Scheduler(format!("no table entry for config {} rung {}", job.config, job.to_rung)))
    }
}

/// Runs the scheduler loop with `workers` in-process workers. State
/// transitions happen only under the lock; training runs outside it.
pub fn run_scheduled<A, P, R>(
    params: AshaParams,
    workers: usize,
    payload_factory: P,
    runner: &R,
) -> Result<AshaState<A>>
where
    A: Clone + Send,
    P: FnMut(u64) -> Result<Option<A>> + Send,
    R: AshaRunner<A>,
{
    if workers == 0 {
        return Err(Error::Config("asha workers must be >= 1".into()));
    }
    let state = Mutex::new((AshaState::new(params)?, payload_factory));

    let worker_loop = || -> Result<()> {
        loop {
            let (job, payload) = {
                let mut guard = state.lock().expect("state lock");
                let (st, factory) = &mut *guard;
                match st.next_job(|id| factory(id))? {
                    Some(job) => {
                        let payload = st.entries()[job.config as usize].payload.clone();
                        (job, payload)
                    }
                    None => return Ok(()),
                }
            };
            let outcome = runner.run(&job, &payload);
            let mut guard = state.lock().expect("state lock");
            match outcome {
                Ok(metric) => guard.0.report(job.config, job.to_rung, metric)?,
                Err(_) => guard.0.report_failed(job.config, job.to_rung)?,
            }
        }
    };

    if workers == 1 {
        worker_loop()?;
    } else {
        std::thread::scope(|scope| -> Result<()> {
            let handles: Vec<_> = (0..workers).map(|_| scope.spawn(worker_loop)).collect();
            for h in handles {
                h.join().expect("worker panicked")?;
            }
            Ok(())
        })?;
    }
    Ok(state.into_inner().expect("state lock").0)
}

/// ASHA search settings around the scheduler: worker count and the
/// training setup for partially trained evaluation networks.
#[derive(Debug, Clone, PartialEq)]
pub struct AshaRunConfig {
    pub params: AshaParams,
    pub workers: usize,
    pub width: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub clip: f64,
}

/// What a search run produced.
#[derive(Debug, Clone)]
pub struct AshaOutcome {
    pub best_arch: Architecture,
    pub best_genotype: String,
    pub best_metric: f64,
    pub best_rung: usize,
    pub best_epochs: u64,
    pub trace: Vec<TraceEvent>,
    /// Canonical genotype per config id.
    pub genotypes: Vec<String>,
    pub distinct_configs: u64,
    pub total_epochs: u64,
    pub wall_seconds: f64,
}

struct TrainRunner<'a, R: Real> {
    space: &'a SearchSpace,
    data: &'a Dataset<R>,
    cfg: &'a AshaRunConfig,
    master_seed: u64,
    nets: Mutex<HashMap<u64, StandaloneNet<R>>>,
}

impl<R: Real> AshaRunner<Architecture> for TrainRunner<'_, R> {
    fn run(&self, job: &Job, payload: &Architecture) -> Result<f64> {
        let mut net = match self.nets.lock().expect("nets lock").remove(&job.config) {
            Some(net) => net,
            None => {
                let seed = split_stream(self.master_seed, &format!("asha/cfg{}", job.config)).state();
                StandaloneNet::new(
                    self.space,
                    payload,
                    NetConfig::proxyless(self.cfg.width, self.data.out_dim),
                    self.data.in_dim,
                    seed,
                )?
            }
        };
        let scratch = ScratchConfig {
            epochs: job.train_to_epochs as u32,
            batch_size: self.cfg.batch_size,
            lr: self.cfg.lr,
            clip: self.cfg.clip,
        };
        net.train_to(&self.data.train, self.data.loss, &scratch, job.train_to_epochs as u32)?;
        let metric = net.evaluate(&self.data.val, self.data.loss, self.cfg.batch_size)?;
        self.nets.lock().expect("nets lock").insert(job.config, net);
        Ok(metric)
    }
}

/// Random search with early stopping: workers pull jobs, partially train
/// the evaluation network (resuming from the rung checkpoint), and report
/// validation metrics. Returns the best entry at the highest rung plus
/// the full event trace for cost accounting.
pub fn run_asha<R: Real>(
    space: &SearchSpace,
    data: &Dataset<R>,
    cfg: &AshaRunConfig,
    master_seed: u64,
) -> Result<AshaOutcome> {
    let started = std::time::Instant::now();
    let mut arch_rng: Rng = split_stream(master_seed, "asha/arch-sampler");
    let space_for_factory = space.clone();
    let factory = move |_id: u64| -> Result<Option<Architecture>> {
        sample_architecture(&space_for_factory, &mut arch_rng).map(Some)
    };
    let runner = TrainRunner {
        space,
        data,
        cfg,
        master_seed,
        nets: Mutex::new(HashMap::new()),
    };
    let state = run_scheduled(cfg.params, cfg.workers, factory, &runner)?;
    let distinct_configs = state.entries().len() as u64;
    let total_epochs = state.total_epochs_issued();
    let genotypes: Vec<String> = state
        .entries()
        .iter()
        .map(|e| serialize_genotype(space, &e.payload))
        .collect::<Result<_>>()?;
    let (entry, best_rung, best_metric) = state
        .best()
        .ok_or_else(|| Error::Scheduler("asha finished without any completed job".into()))?;
    let best_arch = entry.payload.clone();
    let best_epochs = super::scheduler::rung_resource(&cfg.params, best_rung)?;
    Ok(AshaOutcome {
        best_genotype: serialize_genotype(space, &best_arch)?,
        best_arch,
        best_metric,
        best_rung,
        best_epochs,
        trace: state.into_events(),
        genotypes,
        distinct_configs,
        total_epochs,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}
