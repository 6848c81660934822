//! Line-oriented `key = value` configuration with dotted keys. Flags
//! override file values, which override built-in defaults; unknown keys
//! are rejected with the offending key named.

use crate::cellnet::{SelectConfig, StreamLabels, TrainConfig};
use crate::pipeline::{AshaSettings, PipelineConfig};
use crate::searchspace::{Family, OpKind, SearchSpace};
use crate::tasks::{TaskKind, TaskSpec};
use crate::{Error, Result};
use std::collections::BTreeMap;

const KNOWN_KEYS: &[&str] = &[
    "space.family",
    "space.num_nodes",
    "space.ops",
    "space.num_cells",
    "train.epochs",
    "train.batch_size",
    "train.lr",
    "train.clip",
    "net.proxy_width",
    "net.proxyless_width",
    "select.num_archs",
    "select.cheap_batches",
    "select.shard_size",
    "select.top_per_shard",
    "asha.r",
    "asha.eta",
    "asha.max_resource",
    "asha.workers",
    "asha.budget_epochs",
    "pipeline.trials",
    "stage2.epochs",
    "stage3.seeds",
    "stage3.epochs",
    "task.kind",
    "task.dim",
    "task.n_train",
    "task.n_val",
    "task.n_test",
    "task.noise",
    "task.teacher_nodes",
    "task.teacher_width",
    "task.teacher_seed",
    "task.data_seed",
    "seeds.master",
    "sweep.settings",
];

fn is_known_key(key: &str) -> bool {
    if KNOWN_KEYS.contains(&key) {
        return true;
    }
    // sweep.<label>.<base key>
    if let Some(rest) = key.strip_prefix("sweep.") {
        if let Some((_, base)) = rest.split_once('.') {
            return KNOWN_KEYS.contains(&base) && base != "sweep.settings";
        }
    }
    false
}

/// Built-in defaults for every key (stage3.epochs is intentionally
/// absent: stage 3 defaults to the more-seeds mode at stage-2 epochs).
pub fn default_config() -> BTreeMap<String, String> {
    let defaults: &[(&str, &str)] = &[
        ("space.family", "single"),
        ("space.num_nodes", "2"),
        ("space.ops", "tanh,relu,sigmoid,identity"),
        ("space.num_cells", "1"),
        ("train.epochs", "30"),
        ("train.batch_size", "16"),
        ("train.lr", "0.05"),
        ("train.clip", "0.25"),
        ("net.proxy_width", "8"),
        ("net.proxyless_width", "24"),
        ("select.num_archs", "64"),
        ("select.cheap_batches", "10"),
        ("select.shard_size", "1000"),
        ("select.top_per_shard", "10"),
        ("asha.r", "1"),
        ("asha.eta", "4"),
        ("asha.max_resource", "64"),
        ("asha.workers", "1"),
        ("asha.budget_epochs", "256"),
        ("pipeline.trials", "4"),
        ("stage2.epochs", "40"),
        ("stage3.seeds", "10"),
        ("task.kind", "teacher-regression"),
        ("task.dim", "4"),
        ("task.n_train", "256"),
        ("task.n_val", "128"),
        ("task.n_test", "128"),
        ("task.noise", "0.05"),
        ("task.teacher_nodes", "3"),
        ("task.teacher_width", "8"),
        ("task.teacher_seed", "12"),
        ("task.data_seed", "42"),
        ("seeds.master", "0"),
    ];
    defaults
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are
/// skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {raw:?}", i + 1)))?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        map.insert(key, value);
    }
    Ok(map)
}

/// Applies overrides on top of `base`, rejecting unknown keys.
pub fn merge(base: &mut BTreeMap<String, String>, overrides: &BTreeMap<String, String>) -> Result<()> {
    for (key, value) in overrides {
        if !is_known_key(key) {
            return Err(Error::Config(format!("unknown config key {key:?}")));
        }
        base.insert(key.clone(), value.clone());
    }
    Ok(())
}

fn get<'a>(map: &'a BTreeMap<String, String>, key: &str) -> Result<&'a str> {
    map.get(key)
        .map(String::as_str)
        .ok_or_else(|| Error::Config(format!("missing config key {key:?}")))
}

fn parse_num<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    let raw = get(map, key)?;
    raw.parse::<T>()
        .map_err(|_| Error::Config(format!("{key} has invalid value {raw:?}")))
}

fn parse_space(map: &BTreeMap<String, String>) -> Result<SearchSpace> {
    let family = Family::parse(get(map, "space.family")?)
        .map_err(|e| Error::Config(format!("space.family: {e}")))?;
    let ops = get(map, "space.ops")?
        .split(',')
        .map(|t| OpKind::parse(t.trim()))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Config(format!("space.ops: {e}")))?;
    Ok(SearchSpace::new(
        family,
        parse_num(map, "space.num_nodes")?,
        ops,
        parse_num(map, "space.num_cells")?,
    ))
}

fn parse_task(map: &BTreeMap<String, String>) -> Result<TaskSpec> {
    Ok(TaskSpec {
        kind: TaskKind::parse(get(map, "task.kind")?)
            .map_err(|e| Error::Config(format!("task.kind: {e}")))?,
        dim: parse_num(map, "task.dim")?,
        n_train: parse_num(map, "task.n_train")?,
        n_val: parse_num(map, "task.n_val")?,
        n_test: parse_num(map, "task.n_test")?,
        noise: parse_num(map, "task.noise")?,
        teacher_nodes: parse_num(map, "task.teacher_nodes")?,
        teacher_width: parse_num(map, "task.teacher_width")?,
        teacher_seed: parse_num(map, "task.teacher_seed")?,
        data_seed: parse_num(map, "task.data_seed")?,
    })
}

/// A fully resolved run configuration: the flat map that goes into the
/// manifest plus the typed views the pipeline consumes.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub map: BTreeMap<String, String>,
    pub pipeline: PipelineConfig,
    /// Labeled sweep settings, resolved in `sweep.settings` order.
    pub sweep: Vec<(String, PipelineConfig)>,
}

fn resolve_pipeline(map: &BTreeMap<String, String>) -> Result<PipelineConfig> {
    let cfg = PipelineConfig {
        space: parse_space(map)?,
        task: parse_task(map)?,
        trials: parse_num(map, "pipeline.trials")?,
        train: TrainConfig {
            epochs: parse_num(map, "train.epochs")?,
            batch_size: parse_num(map, "train.batch_size")?,
            lr: parse_num(map, "train.lr")?,
            clip: parse_num(map, "train.clip")?,
            labels: StreamLabels::default(),
        },
        select: SelectConfig {
            num_archs: parse_num(map, "select.num_archs")?,
            cheap_batches: parse_num(map, "select.cheap_batches")?,
            shard_size: parse_num(map, "select.shard_size")?,
            top_per_shard: parse_num(map, "select.top_per_shard")?,
        },
        proxy_width: parse_num(map, "net.proxy_width")?,
        proxyless_width: parse_num(map, "net.proxyless_width")?,
        stage2_epochs: parse_num(map, "stage2.epochs")?,
        stage3_seeds: parse_num(map, "stage3.seeds")?,
        stage3_epochs: match map.get("stage3.epochs") {
            Some(_) => Some(parse_num(map, "stage3.epochs")?),
            None => None,
        },
        asha: AshaSettings {
            r: parse_num(map, "asha.r")?,
            eta: parse_num(map, "asha.eta")?,
            max_resource: parse_num(map, "asha.max_resource")?,
            workers: parse_num(map, "asha.workers")?,
            budget_epochs: parse_num(map, "asha.budget_epochs")?,
        },
        master_seed: parse_num(map, "seeds.master")?,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Resolves a merged flat map into typed configuration, including any
/// sweep settings (`sweep.settings = a,b` plus `sweep.a.<key> = value`
/// overlays over the base).
pub fn resolve(map: &BTreeMap<String, String>) -> Result<Resolved> {
    for key in map.keys() {
        if !is_known_key(key) {
            return Err(Error::Config(format!("unknown config key {key:?}")));
        }
    }
    let pipeline = resolve_pipeline(map)?;
    let mut sweep = Vec::new();
    if let Some(settings) = map.get("sweep.settings") {
        for label in settings.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let prefix = format!("sweep.{label}.");
            let mut overlay = map.clone();
            overlay.remove("sweep.settings");
            overlay.retain(|k, _| !k.starts_with("sweep."));
            for (k, v) in map.iter() {
                if let Some(base_key) = k.strip_prefix(&prefix) {
                    overlay.insert(base_key.to_string(), v.clone());
                }
            }
            sweep.push((label.to_string(), resolve_pipeline(&overlay)?));
        }
    }
    Ok(Resolved { map: map.clone(), pipeline, sweep })
}

/// Defaults, then file content, then `--set` overrides.
pub fn load(
    file_text: Option<&str>,
    overrides: &BTreeMap<String, String>,
) -> Result<Resolved> {
    let mut map = default_config();
    if let Some(text) = file_text {
        let file_map = parse_config_text(text)?;
        merge(&mut map, &file_map)?;
    }
    merge(&mut map, overrides)?;
    resolve(&map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let resolved = load(None, &BTreeMap::new()).unwrap();
        assert_eq!(resolved.pipeline.trials, 4);
        assert_eq!(resolved.pipeline.stage3_seeds, 10);
        assert_eq!(resolved.pipeline.space.num_nodes, 2);
        assert!(resolved.sweep.is_empty());
    }

    #[test]
    fn unknown_key_rejected_by_name() {
        let mut overrides = BTreeMap::new();
        overrides.insert("train.epoch".to_string(), "3".to_string());
        let err = load(None, &overrides).unwrap_err();
        assert!(err.to_string().contains("train.epoch"), "{err}");
    }

    #[test]
    fn eta_one_rejected() {
        let mut overrides = BTreeMap::new();
        overrides.insert("asha.eta".to_string(), "1".to_string());
        let err = load(None, &overrides).unwrap_err();
        assert!(err.to_string().contains("asha.eta must be >= 2"), "{err}");
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let file = "train.epochs = 7\ntrain.lr = 0.1\n";
        let mut overrides = BTreeMap::new();
        overrides.insert("train.epochs".to_string(), "9".to_string());
        let resolved = load(Some(file), &overrides).unwrap();
        assert_eq!(resolved.pipeline.train.epochs, 9); // flag wins
        assert_eq!(resolved.pipeline.train.lr, 0.1); // file beats default
        assert_eq!(resolved.pipeline.train.batch_size, 16); // default
    }

    #[test]
    fn comments_and_blanks_skipped() {
        let file = "# a comment\n\n  space.num_nodes = 3  \n";
        let resolved = load(Some(file), &BTreeMap::new()).unwrap();
        assert_eq!(resolved.pipeline.space.num_nodes, 3);
    }

    #[test]
    fn malformed_line_rejected() {
        assert!(parse_config_text("not-a-kv-line\n").is_err());
    }

    #[test]
    fn sweep_settings_overlay() {
        let file = "sweep.settings = tight, loose\nsweep.tight.train.clip = 0.1\nsweep.loose.train.clip = 1.0\n";
        let resolved = load(Some(file), &BTreeMap::new()).unwrap();
        assert_eq!(resolved.sweep.len(), 2);
        assert_eq!(resolved.sweep[0].0, "tight");
        assert_eq!(resolved.sweep[0].1.train.clip, 0.1);
        assert_eq!(resolved.sweep[1].1.train.clip, 1.0);
        // base untouched
        assert_eq!(resolved.pipeline.train.clip, 0.25);
    }

    #[test]
    fn sweep_with_unknown_base_key_rejected() {
        let file = "sweep.settings = x\nsweep.x.train.epoch = 1\n";
        assert!(load(Some(file), &BTreeMap::new()).is_err());
    }
}
