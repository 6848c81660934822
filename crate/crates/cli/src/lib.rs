//! Command implementations behind the `nanonas` binary. Each command
//! returns a process exit code: 0 success, 1 reproduction mismatch,
//! 2 usage or configuration error.

use nanonas::asha::write_trace_jsonl;
use nanonas::config::{self, Resolved};
use nanonas::numcore::split_stream;
use nanonas::pipeline::{execute_mode, render_report_json, render_report_text, PipelineArtifacts};
use nanonas::reproharness::{
    aggregate, checklist_report, load_manifest, read_records_jsonl, render_checklist,
    verify_exact, write_manifest, write_records_jsonl, CodePresence,
};
use nanonas::searchspace::{
    count_architectures, enumerate_architectures, sample_architecture, serialize_genotype,
    validate_space,
};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// What to run and where to put it.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub command: RunCommand,
    pub config_path: Option<PathBuf>,
    /// `key=value` overrides; they beat the config file, which beats the
    /// built-in defaults.
    pub sets: Vec<String>,
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub enum RunCommand {
    Space { action: SpaceAction, limit: u64 },
    SearchWs,
    Asha,
    Stage2 { genotypes: Vec<String>, from: Option<PathBuf> },
    Stage3 { genotype: Option<String>, from: Option<PathBuf> },
    Pipeline,
    Sweep,
    Oracle { limit: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceAction {
    Count,
    Enumerate,
    Sample,
    Validate,
}

fn parse_sets(sets: &[String]) -> Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for raw in sets {
        let (k, v) = raw
            .split_once('=')
            .ok_or_else(|| format!("--set expects key=value, got {raw:?}"))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn load_resolved(inv: &Invocation) -> Result<Resolved, String> {
    let overrides = parse_sets(&inv.sets)?;
    let file_text = match &inv.config_path {
        Some(path) => Some(
            std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read config {}: {e}", path.display()))?,
        ),
        None => None,
    };
    config::load(file_text.as_deref(), &overrides).map_err(|e| e.to_string())
}

/// Reads genotypes out of a previous run's manifest.
fn genotypes_from_dir(dir: &Path) -> Result<Vec<String>, String> {
    let manifest = load_manifest(&dir.join("manifest.json")).map_err(|e| e.to_string())?;
    if manifest.output_genotypes.is_empty() {
        return Err(format!("{} has no output genotypes", dir.display()));
    }
    Ok(manifest.output_genotypes)
}

fn write_artifacts(artifacts: &PipelineArtifacts, out: &Path) -> Result<(), String> {
    std::fs::create_dir_all(out).map_err(|e| e.to_string())?;
    write_manifest(&artifacts.manifest, &out.join("manifest.json")).map_err(|e| e.to_string())?;
    write_records_jsonl(&artifacts.records, &out.join("results.jsonl")).map_err(|e| e.to_string())?;
    if let Some(trace) = &artifacts.trace {
        write_trace_jsonl(trace, &out.join("trace.jsonl")).map_err(|e| e.to_string())?;
    }
    if let Some(oracle) = &artifacts.oracle {
        oracle.write_jsonl(&out.join("oracle.jsonl")).map_err(|e| e.to_string())?;
    }
    let text = render_report_text(artifacts);
    std::fs::write(out.join("report.txt"), &text).map_err(|e| e.to_string())?;
    let json = render_report_json(artifacts);
    std::fs::write(
        out.join("report.json"),
        serde_json::to_string_pretty(&json).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    Ok(())
}

fn usage_err(msg: &str) -> i32 {
    eprintln!("error: {msg}");
    EXIT_USAGE
}

fn run_space(action: SpaceAction, limit: u64, resolved: &Resolved) -> i32 {
    let space = &resolved.pipeline.space;
    match action {
        SpaceAction::Count => match count_architectures(space) {
            Ok(count) => {
                println!("{count}");
                EXIT_OK
            }
            Err(e) => usage_err(&e.to_string()),
        },
        SpaceAction::Enumerate => match enumerate_architectures(space, limit) {
            Ok(archs) => {
                for arch in &archs {
                    match serialize_genotype(space, arch) {
                        Ok(text) => println!("{text}"),
                        Err(e) => return usage_err(&e.to_string()),
                    }
                }
                EXIT_OK
            }
            Err(e) => usage_err(&e.to_string()),
        },
        SpaceAction::Sample => {
            let mut rng = split_stream(resolved.pipeline.master_seed, "space-sample");
            match sample_architecture(space, &mut rng)
                .and_then(|arch| serialize_genotype(space, &arch))
            {
                Ok(text) => {
                    println!("{text}");
                    EXIT_OK
                }
                Err(e) => usage_err(&e.to_string()),
            }
        }
        SpaceAction::Validate => {
            let violations = validate_space(space);
            if violations.is_empty() {
                println!("ok");
                EXIT_OK
            } else {
                for v in violations {
                    eprintln!("violation: {v}");
                }
                EXIT_USAGE
            }
        }
    }
}

/// Runs a command, writing `manifest.json`, `results.jsonl`,
/// `report.txt`, and `report.json` into the output directory. A
/// directory that already holds a manifest is treated as a completed run
/// and never overwritten.
pub fn cmd_run(inv: &Invocation) -> i32 {
    let resolved = match load_resolved(inv) {
        Ok(r) => r,
        Err(msg) => return usage_err(&msg),
    };

    let (mode, inputs): (&str, Vec<String>) = match &inv.command {
        RunCommand::Space { action, limit } => return run_space(*action, *limit, &resolved),
        RunCommand::SearchWs => ("stage1", Vec::new()),
        RunCommand::Asha => ("asha", Vec::new()),
        RunCommand::Pipeline => ("pipeline", Vec::new()),
        RunCommand::Sweep => ("sweep", Vec::new()),
        RunCommand::Oracle { .. } => ("oracle", Vec::new()),
        RunCommand::Stage2 { genotypes, from } => {
            let mut inputs = genotypes.clone();
            if let Some(dir) = from {
                match genotypes_from_dir(dir) {
                    Ok(mut found) => {
                        // a pipeline manifest lists trial winners then the
                        // stage-2 winner; stage 2 re-evaluates the trials
                        if found.len() > 1 {
                            found.pop();
                        }
                        inputs.extend(found);
                    }
                    Err(msg) => return usage_err(&msg),
                }
            }
            if inputs.is_empty() {
                return usage_err("stage2 needs --genotype or --from");
            }
            ("stage2", inputs)
        }
        RunCommand::Stage3 { genotype, from } => {
            let input = match (genotype, from) {
                (Some(g), _) => g.clone(),
                (None, Some(dir)) => match genotypes_from_dir(dir) {
                    Ok(found) => found.last().cloned().unwrap_or_default(),
                    Err(msg) => return usage_err(&msg),
                },
                (None, None) => return usage_err("stage3 needs --genotype or --from"),
            };
            ("stage3", vec![input])
        }
    };

    let out = match &inv.out_dir {
        Some(out) => out.clone(),
        None => return usage_err("this command requires --out DIR"),
    };
    if out.join("manifest.json").exists() {
        return usage_err(&format!(
            "{} already contains a completed run; choose a fresh directory",
            out.display()
        ));
    }

    let artifacts = match &inv.command {
        RunCommand::Oracle { limit } => {
            nanonas::pipeline::run_oracle_mode(&resolved.pipeline, &resolved.map, *limit)
        }
        _ => execute_mode(mode, &resolved, &inputs),
    };
    let artifacts = match artifacts {
        Ok(a) => a,
        Err(e) => return usage_err(&e.to_string()),
    };
    if let Err(msg) = write_artifacts(&artifacts, &out) {
        return usage_err(&msg);
    }
    print!("{}", render_report_text(&artifacts));
    println!("artifacts written to {}", out.display());
    EXIT_OK
}

/// Re-executes the run behind a manifest and compares outputs byte for
/// byte. Exit 0 only on zero diffs.
pub fn cmd_reproduce(manifest_path: &Path) -> i32 {
    if !manifest_path.exists() {
        return usage_err(&format!("manifest {} not found", manifest_path.display()));
    }
    let manifest = match load_manifest(manifest_path) {
        Ok(m) => m,
        Err(e) => return usage_err(&e.to_string()),
    };
    let dir = manifest_path.parent().unwrap_or(Path::new("."));
    match verify_exact(&manifest, dir) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            if report.exact() {
                println!("exact reproduction: zero diffs");
                EXIT_OK
            } else {
                for d in &report.diffs {
                    println!("diff: {d}");
                }
                EXIT_MISMATCH
            }
        }
        Err(e) => usage_err(&e.to_string()),
    }
}

/// Renders the stage reports, sweep table, cost section, and checklist
/// from a results directory.
pub fn cmd_report(dir: &Path) -> i32 {
    let results = dir.join("results.jsonl");
    let manifest_path = dir.join("manifest.json");
    if !results.exists() || !manifest_path.exists() {
        return usage_err(&format!(
            "{} does not contain results.jsonl and manifest.json",
            dir.display()
        ));
    }
    let manifest = match load_manifest(&manifest_path) {
        Ok(m) => m,
        Err(e) => return usage_err(&e.to_string()),
    };
    let records = match read_records_jsonl(&results) {
        Ok(r) => r,
        Err(e) => return usage_err(&e.to_string()),
    };

    println!("== report for {} (mode: {}) ==", dir.display(), manifest.mode);
    if !records.is_empty() {
        match aggregate(&records) {
            Ok(agg) => {
                if let Some(stage2) = agg.stage2 {
                    println!("\n-- stage 2: validation metric across trials --");
                    let header: Vec<String> =
                        (1..=stage2.per_trial.len()).map(|t| format!("Trial {t}")).collect();
                    println!("{} | Best | Average", header.join(" | "));
                    let vals: Vec<String> =
                        stage2.per_trial.iter().map(|(_, m)| format!("{m:.6}")).collect();
                    println!("{} | {:.6} | {:.6}", vals.join(" | "), stage2.best, stage2.average);
                }
                if let Some(stage3) = agg.stage3 {
                    println!("\n-- stage 3: test metric over {} seeds --", stage3.per_seed.len());
                    println!(
                        "mean {:.6} +- {:.6} | best {:.6}",
                        stage3.mean, stage3.std, stage3.best
                    );
                }
            }
            Err(e) => return usage_err(&e.to_string()),
        }
    }

    // sweep rows and cost live in report.json, written at run time
    if let Ok(text) = std::fs::read_to_string(dir.join("report.json")) {
        if let Ok(json) = serde_json::from_str::<serde_json::Value>(&text) {
            if let Some(rows) = json.pointer("/sweep/rows").and_then(|v| v.as_array()) {
                println!("\n-- sweep --");
                for row in rows {
                    let label = row.pointer("/label").and_then(|v| v.as_str()).unwrap_or("?");
                    let best = row.pointer("/best").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
                    let avg = row.pointer("/average").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
                    println!("{label}: best {best:.6} average {avg:.6}");
                }
            }
            if let Some(cost) = json.pointer("/cost") {
                let total = cost.pointer("/total_search_seconds").and_then(|v| v.as_f64());
                let num = cost.pointer("/num_archs_evaluated").and_then(|v| v.as_u64());
                let amort = cost.pointer("/amortized_seconds_per_arch").and_then(|v| v.as_f64());
                if let (Some(total), Some(num), Some(amort)) = (total, num, amort) {
                    println!("\n-- search cost --");
                    println!("total {total:.3} s / {num} architectures = {amort:.6} s per architecture");
                }
            }
        }
    }

    let checklist = checklist_report(
        &manifest,
        CodePresence { search_code: true, evaluation_code: true },
    );
    println!("\n-- reproducibility checklist --");
    print!("{}", render_checklist(&checklist));
    EXIT_OK
}
