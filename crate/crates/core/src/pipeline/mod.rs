//! Three-stage search/select/evaluate orchestration for both methods,
//! the meta-hyperparameter sweep, cost accounting, and seed hygiene.

mod report;
mod stages;
mod sweep;

pub use report::{render_report_json, render_report_text};
pub use stages::{
    execute_mode, run_asha_baseline, run_oracle_mode, run_pipeline, run_stage1, run_stage1_only,
    run_stage2, run_stage2_only, run_stage3, run_stage3_only, run_sweep_mode, AshaSummary,
    PipelineArtifacts, Stage2Report, Stage2Row, Stage3Report, TrialOutcome,
};
pub use sweep::{run_sweep, SweepReport, SweepRow};

use crate::cellnet::{SelectConfig, TrainConfig};
use crate::numcore::{split_stream, Rng};
use crate::searchspace::{validate_space, SearchSpace};
use crate::tasks::TaskSpec;
use crate::{Error, Result};
use serde::Serialize;
use std::collections::BTreeSet;

/// ASHA baseline settings carried alongside the pipeline config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AshaSettings {
    pub r: u64,
    pub eta: u64,
    pub max_resource: u64,
    pub workers: usize,
    pub budget_epochs: u64,
}

impl AshaSettings {
    pub fn validate(&self) -> Result<()> {
        if self.eta < 2 {
            return Err(Error::Config("asha.eta must be >= 2".into()));
        }
        if self.r < 1 {
            return Err(Error::Config("asha.r must be >= 1".into()));
        }
        if self.max_resource < self.r {
            return Err(Error::Config("asha.max_resource must be >= asha.r".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("asha.workers must be >= 1".into()));
        }
        if self.budget_epochs == 0 {
            return Err(Error::Config("asha.budget_epochs must be >= 1".into()));
        }
        Ok(())
    }
}

/// Everything a full run needs. Stage 1 searches at `proxy_width`; stages
/// 2 and 3 (and the ASHA baseline) evaluate at `proxyless_width`.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub space: SearchSpace,
    pub task: TaskSpec,
    pub trials: u32,
    pub train: TrainConfig,
    pub select: SelectConfig,
    pub proxy_width: usize,
    pub proxyless_width: usize,
    pub stage2_epochs: u32,
    pub stage3_seeds: u32,
    /// Long-epochs mode for stage 3; defaults to `stage2_epochs`.
    pub stage3_epochs: Option<u32>,
    pub asha: AshaSettings,
    pub master_seed: u64,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let violations = validate_space(&self.space);
        if !violations.is_empty() {
            let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
            return Err(Error::InvalidSpace(msgs.join("; ")));
        }
        self.task.validate()?;
        self.train.validate()?;
        self.select.validate()?;
        self.asha.validate()?;
        if self.trials == 0 {
            return Err(Error::Config("pipeline.trials must be >= 1".into()));
        }
        if self.stage3_seeds == 0 {
            return Err(Error::Config("stage3.seeds must be >= 1".into()));
        }
        if self.stage2_epochs == 0 {
            return Err(Error::Config("stage2.epochs must be >= 1".into()));
        }
        if self.proxy_width == 0 || self.proxyless_width == 0 {
            return Err(Error::Config("net widths must be >= 1".into()));
        }
        if self.proxy_width >= self.proxyless_width {
            return Err(Error::Config(
                "net.proxy_width must be smaller than net.proxyless_width".into(),
            ));
        }
        Ok(())
    }

    pub fn stage3_epochs(&self) -> u32 {
        self.stage3_epochs.unwrap_or(self.stage2_epochs)
    }
}

/// Search cost summary: `amortized = total / num_archs`, exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostReport {
    pub total_search_seconds: f64,
    pub num_archs_evaluated: u64,
    pub amortized_seconds_per_arch: f64,
}

pub fn amortized_cost(total_search_seconds: f64, num_archs_evaluated: u64) -> Result<CostReport> {
    if num_archs_evaluated == 0 {
        return Err(Error::Config("amortized cost needs num_archs >= 1".into()));
    }
    Ok(CostReport {
        total_search_seconds,
        num_archs_evaluated,
        amortized_seconds_per_arch: total_search_seconds / num_archs_evaluated as f64,
    })
}

/// Stream-usage ledger: every stochastic consumer claims its label once;
/// a second claim of the same label is a seed-hygiene bug.
#[derive(Debug, Default, Clone)]
pub struct SeedLedger {
    used: BTreeSet<String>,
}

impl SeedLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a label without materializing the stream (for consumers
    /// that derive their own streams from it).
    pub fn claim(&mut self, label: &str) -> Result<()> {
        if !self.used.insert(label.to_string()) {
            return Err(Error::Config(format!(
                "seed stream {label:?} claimed twice"
            )));
        }
        Ok(())
    }

    /// Claims a label and returns its stream.
    pub fn stream(&mut self, master_seed: u64, label: &str) -> Result<Rng> {
        self.claim(label)?;
        Ok(split_stream(master_seed, label))
    }

    /// Sorted list of every claimed label.
    pub fn labels(&self) -> Vec<String> {
        self.used.iter().cloned().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn amortized_cost_division() {
        let c = amortized_cost(100.0, 50).unwrap();
        assert_eq!(c.amortized_seconds_per_arch, 2.0);
        assert!(amortized_cost(1.0, 0).is_err());
    }

    #[test]
    fn ledger_rejects_duplicate_labels() {
        let mut ledger = SeedLedger::new();
        ledger.claim("stage1/t0/init").unwrap();
        assert!(ledger.claim("stage1/t0/init").is_err());
        assert_eq!(ledger.labels(), vec!["stage1/t0/init".to_string()]);
    }
}
