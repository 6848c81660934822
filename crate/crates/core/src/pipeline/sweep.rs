//! Meta-hyperparameter sweep: stage 1 + stage 2 per labeled setting,
//! reported as one table row per setting.

use super::stages::{run_stage1, run_stage2};
use super::{PipelineConfig, SeedLedger};
use crate::reproharness::{RunRecord, Stage};
use crate::searchspace::Architecture;
use crate::tasks::{gen_dataset, Dataset};
use crate::{Result, Scalar};
use serde::Serialize;

/// One sweep row: the familiar per-trial / Best / Average shape.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub label: String,
    pub per_trial: Vec<f64>,
    pub best: f64,
    pub average: f64,
    pub winner_genotype: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

/// Runs stage 1 + stage 2 for each labeled setting, in input order.
/// Returns the comparative report and the per-setting run records.
pub fn run_sweep(
    settings: &[(String, PipelineConfig)],
) -> Result<(SweepReport, Vec<RunRecord>)> {
    let mut rows = Vec::with_capacity(settings.len());
    let mut records = Vec::new();
    for (label, cfg) in settings {
        cfg.validate()?;
        let run_id = format!("sweep/{label}-seed{}", cfg.master_seed);
        let data: Dataset<Scalar> = gen_dataset(&cfg.task)?;
        let mut ledger = SeedLedger::new();
        let outcomes = run_stage1(cfg, &data, &mut ledger)?;
        let candidates: Vec<(u64, Architecture)> =
            outcomes.iter().map(|o| (o.trial, o.arch.clone())).collect();
        let (stage2, _winner) = run_stage2(&candidates, cfg, &data, &mut ledger)?;
        for row in &stage2.rows {
            records.push(RunRecord {
                run_id: run_id.clone(),
                stage: Stage::Stage2,
                trial: row.trial,
                seed: cfg.master_seed,
                genotype: row.genotype.clone(),
                epoch: u64::from(cfg.stage2_epochs),
                metric_name: "val_loss".into(),
                metric: row.val_metric,
                wall_seconds: 0.0,
            });
        }
        rows.push(SweepRow {
            label: label.clone(),
            per_trial: stage2.rows.iter().map(|r| r.val_metric).collect(),
            best: stage2.best,
            average: stage2.average,
            winner_genotype: stage2.winner_genotype,
        });
    }
    Ok((SweepReport { rows }, records))
}
