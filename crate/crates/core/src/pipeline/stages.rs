//! The three-stage protocol and the ASHA baseline, emitting run records
//! and a sealed manifest.

use super::{amortized_cost, CostReport, PipelineConfig, SeedLedger};
use crate::asha::{run_asha, AshaParams, AshaRunConfig, StopRule, TraceEvent};
use crate::cellnet::{
    init_shared, select_final, train_from_scratch, train_shared, NetConfig, ScratchConfig,
    SelectAudit, SharedWeights, TrainLog,
};
use crate::numcore::split_stream;
use crate::reproharness::{records_digest, Manifest, RunRecord, Stage};
use crate::searchspace::{parse_genotype, serialize_genotype, Architecture};
use crate::tasks::{gen_dataset, Dataset};
use crate::{Error, Result, Scalar};
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;

/// One stage-1 trial: the selected architecture and how it was chosen.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub trial: u64,
    pub genotype: String,
    pub arch: Architecture,
    pub audit: SelectAudit,
    pub train_log: TrainLog,
    pub wall_seconds: f64,
}

/// Stage 1: per trial, train the shared weights on the proxy network and
/// select a final architecture through the sharded procedure. Trials use
/// disjoint stream labels, so the outcome is independent of trial
/// execution order.
pub fn run_stage1(
    cfg: &PipelineConfig,
    data: &Dataset<Scalar>,
    ledger: &mut SeedLedger,
) -> Result<Vec<TrialOutcome>> {
    cfg.validate()?;
    let mut outcomes = Vec::with_capacity(cfg.trials as usize);
    for t in 0..u64::from(cfg.trials) {
        let started = Instant::now();
        let scope = format!("stage1/t{t}");
        let mut train_cfg = cfg.train.clone();
        train_cfg.labels = crate::cellnet::StreamLabels::scoped(&scope);
        ledger.claim(&train_cfg.labels.arch)?;
        ledger.claim(&train_cfg.labels.data)?;
        let mut init_rng = ledger.stream(cfg.master_seed, &train_cfg.labels.init)?;

        let mut weights: SharedWeights<Scalar> = init_shared(
            &cfg.space,
            NetConfig::proxy(cfg.proxy_width, data.out_dim),
            data.in_dim,
            &mut init_rng,
        )?;
        let train_log = train_shared(&mut weights, &data.train, data.loss, &train_cfg, cfg.master_seed)?;
        let mut select_rng = ledger.stream(cfg.master_seed, &format!("{scope}/select"))?;
        let (arch, audit) = select_final(
            &weights,
            &data.val,
            data.loss,
            cfg.train.batch_size,
            &cfg.select,
            &mut select_rng,
        )?;
        outcomes.push(TrialOutcome {
            trial: t,
            genotype: serialize_genotype(&cfg.space, &arch)?,
            arch,
            audit,
            train_log,
            wall_seconds: started.elapsed().as_secs_f64(),
        });
    }
    Ok(outcomes)
}

#[derive(Debug, Clone, Serialize)]
pub struct Stage2Row {
    pub trial: u64,
    pub genotype: String,
    pub val_metric: f64,
}

/// Table-shaped stage-2 summary: one row per trial plus Best and Average.
#[derive(Debug, Clone, Serialize)]
pub struct Stage2Report {
    pub rows: Vec<Stage2Row>,
    pub best: f64,
    pub average: f64,
    pub winner_genotype: String,
}

/// Stage 2: retrain each trial's architecture from scratch at proxyless
/// width and keep the best final-epoch validation metric. Ties break on
/// the canonical genotype string, so permuting trials cannot change the
/// winner.
pub fn run_stage2(
    candidates: &[(u64, Architecture)],
    cfg: &PipelineConfig,
    data: &Dataset<Scalar>,
    ledger: &mut SeedLedger,
) -> Result<(Stage2Report, Architecture)> {
    if candidates.is_empty() {
        return Err(Error::Config("stage 2 needs at least one architecture".into()));
    }
    let scratch = ScratchConfig {
        epochs: cfg.stage2_epochs,
        batch_size: cfg.train.batch_size,
        lr: cfg.train.lr,
        clip: cfg.train.clip,
    };
    let mut rows = Vec::with_capacity(candidates.len());
    let mut winner: Option<(f64, String, Architecture)> = None;
    for (trial, arch) in candidates {
        let label = format!("stage2/t{trial}");
        ledger.claim(&label)?;
        let seed = split_stream(cfg.master_seed, &label).state();
        let (val, _test, _) = train_from_scratch(
            &cfg.space,
            arch,
            &data.train,
            &data.val,
            &data.test,
            data.loss,
            NetConfig::proxyless(cfg.proxyless_width, data.out_dim),
            data.in_dim,
            &scratch,
            seed,
        )?;
        let genotype = serialize_genotype(&cfg.space, arch)?;
        let better = match &winner {
            None => true,
            Some((m, g, _)) => (val, &genotype) < (*m, g),
        };
        if better {
            winner = Some((val, genotype.clone(), arch.clone()));
        }
        rows.push(Stage2Row { trial: *trial, genotype, val_metric: val });
    }
    let best = rows.iter().map(|r| r.val_metric).fold(f64::INFINITY, f64::min);
    let average = rows.iter().map(|r| r.val_metric).sum::<f64>() / rows.len() as f64;
    let (_, winner_genotype, winner_arch) = winner.expect("non-empty candidates");
    Ok((
        Stage2Report { rows, best, average, winner_genotype },
        winner_arch,
    ))
}

/// Stage-3 summary: mean, population std, and best over seeds.
#[derive(Debug, Clone, Serialize)]
pub struct Stage3Report {
    pub genotype: String,
    pub per_seed: Vec<(u64, f64)>,
    pub mean: f64,
    pub std: f64,
    pub best: f64,
    pub epochs: u32,
}

/// Stage 3: the final evaluation of one architecture over
/// `stage3_seeds` independent from-scratch runs.
pub fn run_stage3(
    arch: &Architecture,
    cfg: &PipelineConfig,
    data: &Dataset<Scalar>,
    ledger: &mut SeedLedger,
) -> Result<Stage3Report> {
    let epochs = cfg.stage3_epochs();
    let scratch = ScratchConfig {
        epochs,
        batch_size: cfg.train.batch_size,
        lr: cfg.train.lr,
        clip: cfg.train.clip,
    };
    let mut per_seed = Vec::with_capacity(cfg.stage3_seeds as usize);
    for s in 0..u64::from(cfg.stage3_seeds) {
        let label = format!("stage3/s{s}");
        ledger.claim(&label)?;
        let seed = split_stream(cfg.master_seed, &label).state();
        let (_val, test, _) = train_from_scratch(
            &cfg.space,
            arch,
            &data.train,
            &data.val,
            &data.test,
            data.loss,
            NetConfig::proxyless(cfg.proxyless_width, data.out_dim),
            data.in_dim,
            &scratch,
            seed,
        )?;
        per_seed.push((seed, test));
    }
    let n = per_seed.len() as f64;
    let mean = per_seed.iter().map(|&(_, m)| m).sum::<f64>() / n;
    let var = per_seed.iter().map(|&(_, m)| (m - mean) * (m - mean)).sum::<f64>() / n;
    let best = per_seed.iter().map(|&(_, m)| m).fold(f64::INFINITY, f64::min);
    Ok(Stage3Report {
        genotype: serialize_genotype(&cfg.space, arch)?,
        per_seed,
        mean,
        std: var.sqrt(),
        best,
        epochs,
    })
}

/// Serializable summary of an ASHA search.
#[derive(Debug, Clone, Serialize)]
pub struct AshaSummary {
    pub best_genotype: String,
    pub best_metric: f64,
    pub best_rung: usize,
    pub best_epochs: u64,
    pub distinct_configs: u64,
    pub total_epochs: u64,
    pub workers: usize,
}

/// Everything a run produced, ready to be written to an output directory.
#[derive(Debug, Clone)]
pub struct PipelineArtifacts {
    pub mode: String,
    pub records: Vec<RunRecord>,
    pub stage1_genotypes: Vec<String>,
    pub stage2: Option<Stage2Report>,
    pub stage3: Option<Stage3Report>,
    pub sweep: Option<super::SweepReport>,
    pub asha: Option<AshaSummary>,
    pub trace: Option<Vec<TraceEvent>>,
    pub oracle: Option<crate::tasks::OracleTable>,
    pub cost: CostReport,
    pub manifest: Manifest,
}

impl PipelineArtifacts {
    pub fn output_genotypes(&self) -> &[String] {
        &self.manifest.output_genotypes
    }
}

pub(crate) fn build_manifest(
    mode: &str,
    flat_config: &BTreeMap<String, String>,
    cfg: &PipelineConfig,
    ledger: &SeedLedger,
    input_genotypes: Vec<String>,
    output_genotypes: Vec<String>,
    records: &[RunRecord],
) -> Manifest {
    Manifest {
        artifact_version: crate::ARTIFACT_VERSION.to_string(),
        mode: mode.to_string(),
        config: flat_config.clone(),
        master_seed: Some(cfg.master_seed),
        stream_labels: ledger.labels(),
        space: cfg.space.canonical_doc(),
        input_genotypes,
        output_genotypes,
        tuning_docs: Some("README.md#default-configuration".to_string()),
        records_digest: records_digest(records),
        content_hash: String::new(),
    }
    .seal()
}

fn stage1_records(run_id: &str, cfg: &PipelineConfig, outcomes: &[TrialOutcome]) -> Vec<RunRecord> {
    let mut records = Vec::new();
    for o in outcomes {
        for (e, loss) in o.train_log.epoch_losses.iter().enumerate() {
            records.push(RunRecord {
                run_id: run_id.to_string(),
                stage: Stage::Stage1,
                trial: o.trial,
                seed: cfg.master_seed,
                genotype: String::new(),
                epoch: e as u64,
                metric_name: "train_loss".into(),
                metric: *loss,
                wall_seconds: o.train_log.wall_seconds,
            });
        }
        records.push(RunRecord {
            run_id: run_id.to_string(),
            stage: Stage::Stage1,
            trial: o.trial,
            seed: cfg.master_seed,
            genotype: o.genotype.clone(),
            epoch: u64::from(cfg.train.epochs),
            metric_name: "select_val".into(),
            metric: o.audit.winner_metric,
            wall_seconds: o.wall_seconds,
        });
    }
    records
}

/// The full protocol: stage 1 search, stage 2 selection across trials,
/// stage 3 multi-seed evaluation. Deterministic per master seed.
pub fn run_pipeline(
    cfg: &PipelineConfig,
    flat_config: &BTreeMap<String, String>,
) -> Result<PipelineArtifacts> {
    cfg.validate()?;
    let run_id = format!("pipeline-seed{}", cfg.master_seed);
    let data: Dataset<Scalar> = gen_dataset(&cfg.task)?;
    let mut ledger = SeedLedger::new();

    let outcomes = run_stage1(cfg, &data, &mut ledger)?;
    let mut records = stage1_records(&run_id, cfg, &outcomes);

    let candidates: Vec<(u64, Architecture)> =
        outcomes.iter().map(|o| (o.trial, o.arch.clone())).collect();
    let (stage2, winner) = run_stage2(&candidates, cfg, &data, &mut ledger)?;
    for row in &stage2.rows {
        records.push(RunRecord {
            run_id: run_id.clone(),
            stage: Stage::Stage2,
            trial: row.trial,
            seed: split_stream(cfg.master_seed, &format!("stage2/t{}", row.trial)).state(),
            genotype: row.genotype.clone(),
            epoch: u64::from(cfg.stage2_epochs),
            metric_name: "val_loss".into(),
            metric: row.val_metric,
            wall_seconds: 0.0,
        });
    }

    let stage3 = run_stage3(&winner, cfg, &data, &mut ledger)?;
    for (seed, metric) in &stage3.per_seed {
        records.push(RunRecord {
            run_id: run_id.clone(),
            stage: Stage::Stage3,
            trial: 0,
            seed: *seed,
            genotype: stage3.genotype.clone(),
            epoch: u64::from(stage3.epochs),
            metric_name: "test_loss".into(),
            metric: *metric,
            wall_seconds: 0.0,
        });
    }
    crate::reproharness::check_unique_keys(&records)?;

    let total_seconds: f64 = outcomes.iter().map(|o| o.wall_seconds).sum();
    let num_archs: u64 = outcomes.iter().map(|o| o.audit.sampled as u64).sum();
    let cost = amortized_cost(total_seconds, num_archs)?;

    let mut output_genotypes: Vec<String> =
        outcomes.iter().map(|o| o.genotype.clone()).collect();
    output_genotypes.push(stage2.winner_genotype.clone());
    let manifest = build_manifest("pipeline", flat_config, cfg, &ledger, Vec::new(), output_genotypes, &records);

    Ok(PipelineArtifacts {
        mode: "pipeline".into(),
        records,
        stage1_genotypes: outcomes.into_iter().map(|o| o.genotype).collect(),
        stage2: Some(stage2),
        stage3: Some(stage3),
        sweep: None,
        asha: None,
        trace: None,
        oracle: None,
        cost,
        manifest,
    })
}

/// The early-stopping baseline: ASHA at proxyless width followed by a
/// stage-3 evaluation of its winner. The cost report counts every
/// partially trained config.
pub fn run_asha_baseline(
    cfg: &PipelineConfig,
    flat_config: &BTreeMap<String, String>,
) -> Result<PipelineArtifacts> {
    cfg.validate()?;
    let run_id = format!("asha-seed{}", cfg.master_seed);
    let data: Dataset<Scalar> = gen_dataset(&cfg.task)?;
    let mut ledger = SeedLedger::new();
    ledger.claim("asha")?; // the asha/* namespace is derived internally

    let run_cfg = AshaRunConfig {
        params: AshaParams {
            r: cfg.asha.r,
            eta: cfg.asha.eta,
            max_resource: cfg.asha.max_resource,
            stop: StopRule::MaxTotalEpochs(cfg.asha.budget_epochs),
        },
        workers: cfg.asha.workers,
        width: cfg.proxyless_width,
        batch_size: cfg.train.batch_size,
        lr: cfg.train.lr,
        clip: cfg.train.clip,
    };
    let outcome = run_asha(&cfg.space, &data, &run_cfg, cfg.master_seed)?;

    let mut records = Vec::new();
    for event in &outcome.trace {
        if event.event == crate::asha::EventKind::Complete {
            records.push(RunRecord {
                run_id: run_id.clone(),
                stage: Stage::Asha,
                trial: event.config,
                seed: cfg.master_seed,
                genotype: outcome
                    .genotypes
                    .get(event.config as usize)
                    .cloned()
                    .unwrap_or_default(),
                epoch: event.epochs,
                metric_name: "val_loss".into(),
                metric: event.metric.expect("completion carries metric"),
                wall_seconds: event.wall_seconds,
            });
        }
    }

    let winner = outcome.best_arch.clone();
    let stage3 = run_stage3(&winner, cfg, &data, &mut ledger)?;
    for (seed, metric) in &stage3.per_seed {
        records.push(RunRecord {
            run_id: run_id.clone(),
            stage: Stage::Stage3,
            trial: 0,
            seed: *seed,
            genotype: stage3.genotype.clone(),
            epoch: u64::from(stage3.epochs),
            metric_name: "test_loss".into(),
            metric: *metric,
            wall_seconds: 0.0,
        });
    }
    crate::reproharness::check_unique_keys(&records)?;

    let cost = amortized_cost(outcome.wall_seconds, outcome.distinct_configs)?;
    let output_genotypes = vec![outcome.best_genotype.clone()];
    let manifest = build_manifest("asha", flat_config, cfg, &ledger, Vec::new(), output_genotypes, &records);

    Ok(PipelineArtifacts {
        mode: "asha".into(),
        records,
        stage1_genotypes: Vec::new(),
        stage2: None,
        stage3: Some(stage3),
        sweep: None,
        asha: Some(AshaSummary {
            best_genotype: outcome.best_genotype,
            best_metric: outcome.best_metric,
            best_rung: outcome.best_rung,
            best_epochs: outcome.best_epochs,
            distinct_configs: outcome.distinct_configs,
            total_epochs: outcome.total_epochs,
            workers: cfg.asha.workers,
        }),
        trace: Some(outcome.trace),
        oracle: None,
        cost,
        manifest,
    })
}

/// Re-parses an output genotype into its architecture.
pub(crate) fn arch_from_genotype(genotype: &str) -> Result<Architecture> {
    parse_genotype(genotype).map(|(_, arch)| arch)
}

/// Stage 1 alone: search per trial, no retraining.
pub fn run_stage1_only(
    cfg: &PipelineConfig,
    flat_config: &BTreeMap<String, String>,
) -> Result<PipelineArtifacts> {
    cfg.validate()?;
    let run_id = format!("stage1-seed{}", cfg.master_seed);
    let data: Dataset<Scalar> = gen_dataset(&cfg.task)?;
    let mut ledger = SeedLedger::new();
    let outcomes = run_stage1(cfg, &data, &mut ledger)?;
    let records = stage1_records(&run_id, cfg, &outcomes);
    crate::reproharness::check_unique_keys(&records)?;
    let total_seconds: f64 = outcomes.iter().map(|o| o.wall_seconds).sum();
    let num_archs: u64 = outcomes.iter().map(|o| o.audit.sampled as u64).sum();
    let cost = amortized_cost(total_seconds, num_archs)?;
    let output_genotypes: Vec<String> = outcomes.iter().map(|o| o.genotype.clone()).collect();
    let manifest = build_manifest(
        "stage1",
        flat_config,
        cfg,
        &ledger,
        Vec::new(),
        output_genotypes,
        &records,
    );
    Ok(PipelineArtifacts {
        mode: "stage1".into(),
        records,
        stage1_genotypes: outcomes.into_iter().map(|o| o.genotype).collect(),
        stage2: None,
        stage3: None,
        sweep: None,
        asha: None,
        trace: None,
        oracle: None,
        cost,
        manifest,
    })
}

/// Stage 2 alone over explicit input genotypes (trial index = position).
pub fn run_stage2_only(
    cfg: &PipelineConfig,
    flat_config: &BTreeMap<String, String>,
    genotypes: &[String],
) -> Result<PipelineArtifacts> {
    cfg.validate()?;
    let started = Instant::now();
    let run_id = format!("stage2-seed{}", cfg.master_seed);
    let data: Dataset<Scalar> = gen_dataset(&cfg.task)?;
    let mut ledger = SeedLedger::new();
    let candidates: Vec<(u64, Architecture)> = genotypes
        .iter()
        .enumerate()
        .map(|(i, g)| Ok((i as u64, arch_from_genotype(g)?)))
        .collect::<Result<_>>()?;
    let (stage2, _winner) = run_stage2(&candidates, cfg, &data, &mut ledger)?;
    let mut records = Vec::new();
    for row in &stage2.rows {
        records.push(RunRecord {
            run_id: run_id.clone(),
            stage: Stage::Stage2,
            trial: row.trial,
            seed: split_stream(cfg.master_seed, &format!("stage2/t{}", row.trial)).state(),
            genotype: row.genotype.clone(),
            epoch: u64::from(cfg.stage2_epochs),
            metric_name: "val_loss".into(),
            metric: row.val_metric,
            wall_seconds: 0.0,
        });
    }
    crate::reproharness::check_unique_keys(&records)?;
    let cost = amortized_cost(started.elapsed().as_secs_f64(), candidates.len() as u64)?;
    let manifest = build_manifest(
        "stage2",
        flat_config,
        cfg,
        &ledger,
        genotypes.to_vec(),
        vec![stage2.winner_genotype.clone()],
        &records,
    );
    Ok(PipelineArtifacts {
        mode: "stage2".into(),
        records,
        stage1_genotypes: Vec::new(),
        stage2: Some(stage2),
        stage3: None,
        sweep: None,
        asha: None,
        trace: None,
        oracle: None,
        cost,
        manifest,
    })
}

/// Stage 3 alone over one input genotype.
pub fn run_stage3_only(
    cfg: &PipelineConfig,
    flat_config: &BTreeMap<String, String>,
    genotype: &str,
) -> Result<PipelineArtifacts> {
    cfg.validate()?;
    let started = Instant::now();
    let run_id = format!("stage3-seed{}", cfg.master_seed);
    let data: Dataset<Scalar> = gen_dataset(&cfg.task)?;
    let mut ledger = SeedLedger::new();
    let arch = arch_from_genotype(genotype)?;
    let stage3 = run_stage3(&arch, cfg, &data, &mut ledger)?;
    let mut records = Vec::new();
    for (seed, metric) in &stage3.per_seed {
        records.push(RunRecord {
            run_id: run_id.clone(),
            stage: Stage::Stage3,
            trial: 0,
            seed: *seed,
            genotype: stage3.genotype.clone(),
            epoch: u64::from(stage3.epochs),
            metric_name: "test_loss".into(),
            metric: *metric,
            wall_seconds: 0.0,
        });
    }
    crate::reproharness::check_unique_keys(&records)?;
    let cost = amortized_cost(started.elapsed().as_secs_f64(), 1)?;
    let manifest = build_manifest(
        "stage3",
        flat_config,
        cfg,
        &ledger,
        vec![genotype.to_string()],
        vec![stage3.genotype.clone()],
        &records,
    );
    Ok(PipelineArtifacts {
        mode: "stage3".into(),
        records,
        stage1_genotypes: Vec::new(),
        stage2: None,
        stage3: Some(stage3),
        sweep: None,
        asha: None,
        trace: None,
        oracle: None,
        cost,
        manifest,
    })
}

/// The sweep as a run mode: every labeled setting through stage 1 + 2.
pub fn run_sweep_mode(
    base: &PipelineConfig,
    settings: &[(String, PipelineConfig)],
    flat_config: &BTreeMap<String, String>,
) -> Result<PipelineArtifacts> {
    if settings.is_empty() {
        return Err(Error::Config("sweep.settings is empty".into()));
    }
    let started = Instant::now();
    let (report, records) = super::run_sweep(settings)?;
    crate::reproharness::check_unique_keys(&records)?;
    let num_archs: u64 = settings
        .iter()
        .map(|(_, cfg)| u64::from(cfg.trials) * cfg.select.num_archs as u64)
        .sum();
    let cost = amortized_cost(started.elapsed().as_secs_f64(), num_archs)?;
    let output_genotypes: Vec<String> =
        report.rows.iter().map(|r| r.winner_genotype.clone()).collect();
    let ledger = SeedLedger::new();
    let manifest = build_manifest(
        "sweep",
        flat_config,
        base,
        &ledger,
        Vec::new(),
        output_genotypes,
        &records,
    );
    Ok(PipelineArtifacts {
        mode: "sweep".into(),
        records,
        stage1_genotypes: Vec::new(),
        stage2: None,
        stage3: None,
        sweep: Some(report),
        asha: None,
        trace: None,
        oracle: None,
        cost,
        manifest,
    })
}

/// Brute-force oracle over the configured (enumerable) space: trains
/// every architecture under a fixed protocol derived from the stage-2
/// settings.
pub fn run_oracle_mode(
    cfg: &PipelineConfig,
    flat_config: &BTreeMap<String, String>,
    limit: u64,
) -> Result<PipelineArtifacts> {
    cfg.validate()?;
    let started = Instant::now();
    let data: Dataset<Scalar> = gen_dataset(&cfg.task)?;
    let protocol = crate::tasks::OracleProtocol {
        width: cfg.proxyless_width,
        epochs: cfg.stage2_epochs,
        batch_size: cfg.train.batch_size,
        lr: cfg.train.lr,
        clip: cfg.train.clip,
        seed: cfg.master_seed,
    };
    let table = crate::tasks::oracle_train_all(&cfg.space, &data, &protocol, limit)?;
    let cost = amortized_cost(started.elapsed().as_secs_f64(), table.len() as u64)?;
    let best = table.sorted_by_val().first().map(|(g, _, _)| g.clone());
    let ledger = SeedLedger::new();
    let manifest = build_manifest(
        "oracle",
        flat_config,
        cfg,
        &ledger,
        Vec::new(),
        best.into_iter().collect(),
        &[],
    );
    Ok(PipelineArtifacts {
        mode: "oracle".into(),
        records: Vec::new(),
        stage1_genotypes: Vec::new(),
        stage2: None,
        stage3: None,
        sweep: None,
        asha: None,
        trace: None,
        oracle: Some(table),
        cost,
        manifest,
    })
}

/// Dispatches a resolved configuration to the artifact builder for
/// `mode`; used by the CLI and by reproduction re-runs.
pub fn execute_mode(
    mode: &str,
    resolved: &crate::config::Resolved,
    input_genotypes: &[String],
) -> Result<PipelineArtifacts> {
    match mode {
        "pipeline" => run_pipeline(&resolved.pipeline, &resolved.map),
        "asha" => run_asha_baseline(&resolved.pipeline, &resolved.map),
        "stage1" => run_stage1_only(&resolved.pipeline, &resolved.map),
        "stage2" => run_stage2_only(&resolved.pipeline, &resolved.map, input_genotypes),
        "stage3" => {
            let genotype = input_genotypes
                .first()
                .ok_or_else(|| Error::Config("stage3 requires one input genotype".into()))?;
            run_stage3_only(&resolved.pipeline, &resolved.map, genotype)
        }
        "sweep" => run_sweep_mode(&resolved.pipeline, &resolved.sweep, &resolved.map),
        "oracle" => run_oracle_mode(&resolved.pipeline, &resolved.map, 500),
        other => Err(Error::Config(format!("unknown run mode {other:?}"))),
    }
}
