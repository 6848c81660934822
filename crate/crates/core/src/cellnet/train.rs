//! Shared-weights training and evaluation. One architecture is sampled
//! per minibatch, so the number of architectures used to update the
//! shared weights equals the number of minibatch iterations.

use super::net::{LossKind, Split};
use super::shared::SharedWeights;
use crate::numcore::{clip_global_norm, split_stream, sgd_step, Real};
use crate::searchspace::{sample_architecture, Architecture};
use crate::{Error, Result};
use std::time::Instant;

/// Labels of the seed streams a training run consumes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamLabels {
    pub arch: String,
    pub init: String,
    pub data: String,
}

impl Default for StreamLabels {
    fn default() -> Self {
        StreamLabels {
            arch: "arch-sampler".into(),
            init: "init".into(),
            data: "data-order".into(),
        }
    }
}

impl StreamLabels {
    /// Namespaces every label under `prefix/`, keeping streams disjoint
    /// across trials.
    pub fn scoped(prefix: &str) -> Self {
        StreamLabels {
            arch: format!("{prefix}/arch-sampler"),
            init: format!("{prefix}/init"),
            data: format!("{prefix}/data-order"),
        }
    }
}

/// Shared-weights training settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: u32,
    pub batch_size: usize,
    pub lr: f64,
    pub clip: f64,
    pub labels: StreamLabels,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Config("train epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("train batch_size must be >= 1".into()));
        }
        if self.lr <= 0.0 {
            return Err(Error::Config("train lr must be > 0".into()));
        }
        if self.clip <= 0.0 {
            return Err(Error::Config("train clip must be > 0".into()));
        }
        Ok(())
    }
}

/// What a shared-weights training run did.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub iterations: u64,
    pub sampled_arch_events: u64,
    pub epoch_losses: Vec<f64>,
    pub wall_seconds: f64,
}

/// Trains the supernet: per minibatch, sample one architecture from the
/// arch stream, backpropagate through its subgraph only, clip the global
/// gradient norm, and take an SGD step. The data order reshuffles every
/// epoch from the per-epoch data stream.
pub fn train_shared<R: Real>(
    weights: &mut SharedWeights<R>,
    train: &Split<R>,
    kind: LossKind,
    cfg: &TrainConfig,
    master_seed: u64,
) -> Result<TrainLog> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(Error::Config("empty training data".into()));
    }
    let n = train.len();
    let batches = n / cfg.batch_size;
    if batches == 0 {
        return Err(Error::Config(format!(
            "batch_size {} exceeds training set of {n}",
            cfg.batch_size
        )));
    }
    let start = Instant::now();
    let space = weights.space().clone();
    let mut arch_rng = split_stream(master_seed, &cfg.labels.arch);
    let lr = R::from_f64_lossy(cfg.lr);
    let clip = R::from_f64_lossy(cfg.clip);

    let mut iterations = 0u64;
    let mut sampled = 0u64;
    let mut epoch_losses = Vec::with_capacity(cfg.epochs as usize);
    for epoch in 0..cfg.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        split_stream(master_seed, &format!("{}/epoch{epoch}", cfg.labels.data))
            .shuffle(&mut order);
        let mut loss_sum = 0.0f64;
        for b in 0..batches {
            let idx = &order[b * cfg.batch_size..(b + 1) * cfg.batch_size];
            let x = train.x.gather(idx);
            let y = train.y.gather(idx);
            let arch = sample_architecture(&space, &mut arch_rng)?;
            sampled += 1;
            let (loss, active) = weights.loss_and_grads(&arch, &x, &y, kind).map_err(|e| {
                Error::Config(format!("iteration {iterations}: {e}"))
            })?;
            let loss = loss
                .to_f64()
                .filter(|l| l.is_finite())
                .ok_or_else(|| Error::non_finite("loss", format!("iteration {iterations}")))?;
            clip_global_norm(weights.store_mut(), &active, clip)?;
            sgd_step(weights.store_mut(), &active, lr);
            iterations += 1;
            loss_sum += loss;
        }
        epoch_losses.push(loss_sum / batches as f64);
    }
    Ok(TrainLog {
        iterations,
        sampled_arch_events: sampled,
        epoch_losses,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// How much of the evaluation split to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchLimit {
    All,
    First(usize),
}

/// Scores architectures with the shared weights on held-out data and
/// returns `(arch, metric)` pairs sorted ascending by metric, ties broken
/// by position in `archs`. Mutates nothing; pure in (weights, archs, data).
pub fn evaluate_with_shared<R: Real>(
    weights: &SharedWeights<R>,
    archs: &[Architecture],
    data: &Split<R>,
    kind: LossKind,
    batch_size: usize,
    limit: BatchLimit,
) -> Result<Vec<(Architecture, f64)>> {
    if archs.is_empty() {
        return Err(Error::Config("evaluate_with_shared: no architectures".into()));
    }
    let max_batches = match limit {
        BatchLimit::All => None,
        BatchLimit::First(k) => Some(k),
    };
    let mut scored: Vec<(Architecture, f64)> = Vec::with_capacity(archs.len());
    for arch in archs {
        let metric = weights.mean_loss(arch, data, kind, batch_size, max_batches)?;
        scored.push((arch.clone(), metric));
    }
    // stable: equal metrics keep input order
    scored.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite metrics"));
    Ok(scored)
}
