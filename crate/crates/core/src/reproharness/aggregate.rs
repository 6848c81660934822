//! Exact aggregation over run records: per-trial best/average for stage 2
//! and per-seed mean/std/best for stage 3, recomputable by hand.

use super::records::{RunRecord, Stage};
use crate::{Error, Result};
use serde::Serialize;

/// Stage-2 style summary across trials.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialStats {
    pub per_trial: Vec<(u64, f64)>,
    pub best: f64,
    pub average: f64,
}

/// Stage-3 style summary across seeds (population standard deviation, so
/// a single record reports zero spread).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedStats {
    pub per_seed: Vec<(u64, f64)>,
    pub mean: f64,
    pub std: f64,
    pub best: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub stage2: Option<TrialStats>,
    pub stage3: Option<SeedStats>,
}

fn trial_stats(rows: Vec<(u64, f64)>) -> TrialStats {
    let best = rows.iter().map(|&(_, m)| m).fold(f64::INFINITY, f64::min);
    let average = rows.iter().map(|&(_, m)| m).sum::<f64>() / rows.len() as f64;
    TrialStats { per_trial: rows, best, average }
}

fn seed_stats(rows: Vec<(u64, f64)>) -> SeedStats {
    let n = rows.len() as f64;
    let mean = rows.iter().map(|&(_, m)| m).sum::<f64>() / n;
    let var = rows.iter().map(|&(_, m)| (m - mean) * (m - mean)).sum::<f64>() / n;
    let best = rows.iter().map(|&(_, m)| m).fold(f64::INFINITY, f64::min);
    SeedStats { per_seed: rows, mean, std: var.sqrt(), best }
}

/// Aggregates stage-2 (`val_loss` per trial) and stage-3 (`test_loss`
/// per seed) records. Best = min, average = arithmetic mean in record
/// order, std = population standard deviation.
pub fn aggregate(records: &[RunRecord]) -> Result<Aggregate> {
    if records.is_empty() {
        return Err(Error::Config("aggregate: no records".into()));
    }
    for r in records {
        r.validate()?;
    }
    let stage2_rows: Vec<(u64, f64)> = records
        .iter()
        .filter(|r| r.stage == Stage::Stage2 && r.metric_name == "val_loss")
        .map(|r| (r.trial, r.metric))
        .collect();
    let stage3_rows: Vec<(u64, f64)> = records
        .iter()
        .filter(|r| r.stage == Stage::Stage3 && r.metric_name == "test_loss")
        .map(|r| (r.seed, r.metric))
        .collect();
    Ok(Aggregate {
        stage2: (!stage2_rows.is_empty()).then(|| trial_stats(stage2_rows)),
        stage3: (!stage3_rows.is_empty()).then(|| seed_stats(stage3_rows)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(stage: Stage, trial: u64, seed: u64, name: &str, metric: f64) -> RunRecord {
        RunRecord {
            run_id: "r".into(),
            stage,
            trial,
            seed,
            genotype: String::new(),
            epoch: 1,
            metric_name: name.into(),
            metric,
            wall_seconds: 0.0,
        }
    }

    #[test]
    fn best_and_average() {
        let records = vec![
            record(Stage::Stage2, 0, 0, "val_loss", 2.0),
            record(Stage::Stage2, 1, 0, "val_loss", 4.0),
        ];
        let agg = aggregate(&records).unwrap().stage2.unwrap();
        assert_eq!(agg.best, 2.0);
        assert_eq!(agg.average, 3.0);
    }

    #[test]
    fn single_seed_zero_std() {
        let records = vec![record(Stage::Stage3, 0, 5, "test_loss", 0.4)];
        let agg = aggregate(&records).unwrap().stage3.unwrap();
        assert_eq!(agg.std, 0.0);
        assert_eq!(agg.mean, 0.4);
        assert_eq!(agg.best, 0.4);
    }

    #[test]
    fn non_finite_metric_rejected() {
        let records = vec![record(Stage::Stage3, 0, 0, "test_loss", f64::NAN)];
        assert!(aggregate(&records).is_err());
    }
}
