//! Sharded final selection: sample M architectures, score each shard
//! cheaply on a few minibatches, then send only each shard's best few to
//! full-validation scoring.

use super::net::{LossKind, Split};
use super::shared::SharedWeights;
use super::train::{evaluate_with_shared, BatchLimit};
use crate::numcore::{Real, Rng};
use crate::searchspace::{sample_architecture, serialize_genotype, Architecture};
use crate::{Error, Result};

/// Selection settings: `num_archs` sampled in total, scored in shards of
/// `shard_size` on `cheap_batches` minibatches, with `top_per_shard`
/// finalists fully validated per shard.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectConfig {
    pub num_archs: usize,
    pub cheap_batches: usize,
    pub shard_size: usize,
    pub top_per_shard: usize,
}

impl Default for SelectConfig {
    fn default() -> Self {
        SelectConfig { num_archs: 64, cheap_batches: 10, shard_size: 1000, top_per_shard: 10 }
    }
}

impl SelectConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_archs == 0 {
            return Err(Error::Config("select num_archs must be >= 1".into()));
        }
        if self.cheap_batches == 0 || self.shard_size == 0 {
            return Err(Error::Config("select cheap_batches and shard_size must be >= 1".into()));
        }
        if self.top_per_shard == 0 || self.top_per_shard > self.shard_size {
            return Err(Error::Config(
                "select top_per_shard must be in 1..=shard_size".into(),
            ));
        }
        Ok(())
    }
}

/// Scores recorded for one shard.
#[derive(Debug, Clone)]
pub struct ShardAudit {
    /// Every candidate with its cheap (partial-validation) metric,
    /// ascending.
    pub cheap: Vec<(String, f64)>,
    /// The shard's finalists with full-validation metrics, ascending.
    pub finalists: Vec<(String, f64)>,
}

/// Complete record of a selection run.
#[derive(Debug, Clone)]
pub struct SelectAudit {
    pub sampled: usize,
    pub shards: Vec<ShardAudit>,
    pub full_evaluations: usize,
    pub winner: String,
    pub winner_metric: f64,
}

/// Samples `cfg.num_archs` architectures and returns the one with the
/// lowest full-validation metric among the per-shard finalists, plus the
/// audit trail of every score that led there.
pub fn select_final<R: Real>(
    weights: &SharedWeights<R>,
    val: &Split<R>,
    kind: LossKind,
    batch_size: usize,
    cfg: &SelectConfig,
    rng: &mut Rng,
) -> Result<(Architecture, SelectAudit)> {
    cfg.validate()?;
    let space = weights.space().clone();
    let mut archs = Vec::with_capacity(cfg.num_archs);
    for _ in 0..cfg.num_archs {
        archs.push(sample_architecture(&space, rng)?);
    }

    let mut shards = Vec::new();
    let mut best: Option<(Architecture, f64)> = None;
    let mut full_evaluations = 0usize;
    for shard in archs.chunks(cfg.shard_size) {
        let cheap_scored = evaluate_with_shared(
            weights,
            shard,
            val,
            kind,
            batch_size,
            BatchLimit::First(cfg.cheap_batches),
        )?;
        let finalists: Vec<Architecture> = cheap_scored
            .iter()
            .take(cfg.top_per_shard)
            .map(|(a, _)| a.clone())
            .collect();
        let full_scored =
            evaluate_with_shared(weights, &finalists, val, kind, batch_size, BatchLimit::All)?;
        full_evaluations += full_scored.len();
        for (arch, metric) in &full_scored {
            // strict comparison: earlier shards win ties
            if best.as_ref().is_none_or(|(_, m)| metric < m) {
                best = Some((arch.clone(), *metric));
            }
        }
        shards.push(ShardAudit {
            cheap: cheap_scored
                .iter()
                .map(|(a, m)| (serialize_genotype(&space, a).expect("valid arch"), *m))
                .collect(),
            finalists: full_scored
                .iter()
                .map(|(a, m)| (serialize_genotype(&space, a).expect("valid arch"), *m))
                .collect(),
        });
    }
    let (winner, winner_metric) = best.expect("num_archs >= 1");
    let audit = SelectAudit {
        sampled: archs.len(),
        shards,
        full_evaluations,
        winner: serialize_genotype(&space, &winner).expect("valid arch"),
        winner_metric,
    };
    Ok((winner, audit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cellnet::{init_shared, NetConfig};
    use crate::numcore::{split_stream, Matrix};
    use crate::searchspace::SearchSpace;

    fn val_split(n: usize) -> Split<f64> {
        let mut rng = split_stream(17, "select-val");
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.unit::<f64>() * 2.0 - 1.0;
            let b: f64 = rng.unit::<f64>() * 2.0 - 1.0;
            xs.push(vec![a, b]);
            ys.push(vec![a * b]);
        }
        Split { x: Matrix::from_rows(xs), y: Matrix::from_rows(ys) }
    }

    #[test]
    fn single_candidate_returned() {
        let space = SearchSpace::single(2);
        let w = init_shared::<f64>(&space, NetConfig::proxy(4, 1), 2, &mut split_stream(0, "i")).unwrap();
        let val = val_split(32);
        let cfg = SelectConfig { num_archs: 1, ..Default::default() };
        let mut rng = split_stream(1, "sel");
        let (arch, audit) = select_final(&w, &val, LossKind::SquaredError, 8, &cfg, &mut rng).unwrap();
        assert_eq!(audit.sampled, 1);
        assert_eq!(audit.winner, serialize_genotype(&space, &arch).unwrap());
    }

    // M = 2500, K = 1000: shards of 1000/1000/500 and at most 30 full
    // validations.
    #[test]
    fn shard_arithmetic() {
        let space = SearchSpace::single(2);
        let w = init_shared::<f64>(&space, NetConfig::proxy(3, 1), 2, &mut split_stream(2, "i")).unwrap();
        let val = val_split(24);
        let cfg = SelectConfig {
            num_archs: 2500,
            cheap_batches: 2,
            shard_size: 1000,
            top_per_shard: 10,
        };
        let mut rng = split_stream(3, "sel");
        let (_, audit) = select_final(&w, &val, LossKind::SquaredError, 8, &cfg, &mut rng).unwrap();
        let sizes: Vec<usize> = audit.shards.iter().map(|s| s.cheap.len()).collect();
        assert_eq!(sizes, vec![1000, 1000, 500]);
        assert!(audit.full_evaluations <= 30);
    }

    // The reported winner must minimize the full-validation metric among
    // everything that was fully validated, rechecked from the audit.
    #[test]
    fn winner_minimizes_full_validation() {
        let space = SearchSpace::single(2);
        let w = init_shared::<f64>(&space, NetConfig::proxy(4, 1), 2, &mut split_stream(4, "i")).unwrap();
        let val = val_split(40);
        let cfg = SelectConfig {
            num_archs: 60,
            cheap_batches: 2,
            shard_size: 25,
            top_per_shard: 5,
        };
        let mut rng = split_stream(5, "sel");
        let (_, audit) = select_final(&w, &val, LossKind::SquaredError, 8, &cfg, &mut rng).unwrap();
        let min_full = audit
            .shards
            .iter()
            .flat_map(|s| s.finalists.iter().map(|(_, m)| *m))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(audit.winner_metric, min_full);
    }
}
