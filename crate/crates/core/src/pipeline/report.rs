//! Report rendering: plain-text tables and a machine-readable mirror.

use super::stages::PipelineArtifacts;
use crate::reproharness::{checklist_report, render_checklist, CodePresence};
use serde_json::json;
use std::fmt::Write;

/// This artifact ships search and evaluation in one binary.
const SELF_CODE: CodePresence = CodePresence { search_code: true, evaluation_code: true };

/// Renders the stage tables, cost section, and checklist as plain text.
pub fn render_report_text(artifacts: &PipelineArtifacts) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "== run mode: {} ==", artifacts.mode);

    if !artifacts.stage1_genotypes.is_empty() {
        let _ = writeln!(out, "\n-- stage 1: selected architectures --");
        for (t, g) in artifacts.stage1_genotypes.iter().enumerate() {
            let _ = writeln!(out, "Trial {}: {}", t + 1, g);
        }
    }

    if let Some(stage2) = &artifacts.stage2 {
        let _ = writeln!(out, "\n-- stage 2: validation metric across trials --");
        let header: Vec<String> = (1..=stage2.rows.len()).map(|t| format!("Trial {t}")).collect();
        let _ = writeln!(out, "{} | Best | Average", header.join(" | "));
        let values: Vec<String> = stage2.rows.iter().map(|r| format!("{:.6}", r.val_metric)).collect();
        let _ = writeln!(
            out,
            "{} | {:.6} | {:.6}",
            values.join(" | "),
            stage2.best,
            stage2.average
        );
        let _ = writeln!(out, "winner: {}", stage2.winner_genotype);
    }

    if let Some(sweep) = &artifacts.sweep {
        let _ = writeln!(out, "\n-- sweep: per-setting stage-2 results --");
        let trials = sweep.rows.first().map_or(0, |r| r.per_trial.len());
        let header: Vec<String> = (1..=trials).map(|t| format!("Trial {t}")).collect();
        let _ = writeln!(out, "Setting | {} | Best | Average", header.join(" | "));
        for row in &sweep.rows {
            let values: Vec<String> = row.per_trial.iter().map(|v| format!("{v:.6}")).collect();
            let _ = writeln!(
                out,
                "{} | {} | {:.6} | {:.6}",
                row.label,
                values.join(" | "),
                row.best,
                row.average
            );
        }
    }

    if let Some(asha) = &artifacts.asha {
        let _ = writeln!(out, "\n-- asha search --");
        let _ = writeln!(
            out,
            "distinct configs: {} | total epochs: {} | workers: {}",
            asha.distinct_configs, asha.total_epochs, asha.workers
        );
        let _ = writeln!(
            out,
            "winner (rung {} @ {} epochs, val {:.6}): {}",
            asha.best_rung, asha.best_epochs, asha.best_metric, asha.best_genotype
        );
    }

    if let Some(stage3) = &artifacts.stage3 {
        let _ = writeln!(out, "\n-- stage 3: test metric over {} seeds --", stage3.per_seed.len());
        let _ = writeln!(
            out,
            "mean {:.6} +- {:.6} | best {:.6} | epochs {}",
            stage3.mean, stage3.std, stage3.best, stage3.epochs
        );
        let _ = writeln!(out, "architecture: {}", stage3.genotype);
    }

    let cost = &artifacts.cost;
    let _ = writeln!(out, "\n-- search cost --");
    let _ = writeln!(
        out,
        "total {:.3} s / {} architectures = {:.6} s per architecture (amortized)",
        cost.total_search_seconds, cost.num_archs_evaluated, cost.amortized_seconds_per_arch
    );

    let checklist = checklist_report(&artifacts.manifest, SELF_CODE);
    let _ = writeln!(out, "\n-- reproducibility checklist --");
    out.push_str(&render_checklist(&checklist));
    out
}

/// The same content as JSON.
pub fn render_report_json(artifacts: &PipelineArtifacts) -> serde_json::Value {
    let checklist = checklist_report(&artifacts.manifest, SELF_CODE);
    json!({
        "mode": artifacts.mode,
        "stage1": { "genotypes": artifacts.stage1_genotypes },
        "stage2": artifacts.stage2,
        "stage3": artifacts.stage3,
        "sweep": artifacts.sweep,
        "asha": artifacts.asha,
        "cost": artifacts.cost,
        "checklist": checklist,
        "manifest_hash": artifacts.manifest.content_hash,
    })
}
