//! Brute-force ground truth: train every architecture of an enumerable
//! space from scratch under one fixed protocol and tabulate the metrics.

use super::Dataset;
use crate::cellnet::{train_from_scratch, NetConfig, ScratchConfig};
use crate::numcore::{split_stream, Real};
use crate::searchspace::{enumerate_architectures, serialize_genotype, SearchSpace};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

/// The fixed training protocol behind an oracle table. Each
/// architecture's run seed derives from `(seed, genotype)`, so the policy
/// is deterministic and order-independent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleProtocol {
    pub width: usize,
    pub epochs: u32,
    pub batch_size: usize,
    pub lr: f64,
    pub clip: f64,
    pub seed: u64,
}

impl Default for OracleProtocol {
    fn default() -> Self {
        OracleProtocol { width: 16, epochs: 40, batch_size: 16, lr: 0.05, clip: 1.0, seed: 1000 }
    }
}

/// Ground-truth (validation, test) metric per canonical genotype;
/// covers every architecture of its space exactly once.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleTable {
    pub protocol: OracleProtocol,
    pub rows: BTreeMap<String, (f64, f64)>,
}

#[derive(Serialize, Deserialize)]
struct OracleRow {
    genotype: String,
    val: f64,
    test: f64,
}

impl OracleTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows sorted ascending by validation metric (ties by genotype).
    pub fn sorted_by_val(&self) -> Vec<(String, f64, f64)> {
        let mut rows: Vec<(String, f64, f64)> = self
            .rows
            .iter()
            .map(|(g, (v, t))| (g.clone(), *v, *t))
            .collect();
        rows.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| a.0.cmp(&b.0)));
        rows
    }

    /// 1-based rank of a genotype by validation metric.
    pub fn rank_of(&self, genotype: &str) -> Option<usize> {
        self.sorted_by_val()
            .iter()
            .position(|(g, _, _)| g == genotype)
            .map(|p| p + 1)
    }

    /// Protocol on the first line, one row per line after.
    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "{}", serde_json::to_string(&self.protocol)?)?;
        for (genotype, (val, test)) in &self.rows {
            let row = OracleRow { genotype: genotype.clone(), val: *val, test: *test };
            writeln!(w, "{}", serde_json::to_string(&row)?)?;
        }
        Ok(())
    }

    pub fn read_jsonl(path: &Path) -> Result<OracleTable> {
        let reader = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines();
        let protocol: OracleProtocol = serde_json::from_str(
            &lines
                .next()
                .ok_or_else(|| Error::Parse("empty oracle file".into()))??,
        )?;
        let mut rows = BTreeMap::new();
        for line in lines {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let row: OracleRow = serde_json::from_str(&line)?;
            rows.insert(row.genotype, (row.val, row.test));
        }
        Ok(OracleTable { protocol, rows })
    }
}

/// Trains every architecture of the space (refusing above `limit`) from
/// scratch under `protocol` and returns the completed table.
pub fn oracle_train_all<R: Real>(
    space: &SearchSpace,
    dataset: &Dataset<R>,
    protocol: &OracleProtocol,
    limit: u64,
) -> Result<OracleTable> {
    let archs = enumerate_architectures(space, limit)?;
    let cfg = ScratchConfig {
        epochs: protocol.epochs,
        batch_size: protocol.batch_size,
        lr: protocol.lr,
        clip: protocol.clip,
    };
    let mut rows = BTreeMap::new();
    for arch in &archs {
        let genotype = serialize_genotype(space, arch)?;
        let run_seed = split_stream(protocol.seed, &format!("oracle/{genotype}")).state();
        let (val, test, _) = train_from_scratch(
            space,
            arch,
            &dataset.train,
            &dataset.val,
            &dataset.test,
            dataset.loss,
            NetConfig::proxyless(protocol.width, dataset.out_dim),
            dataset.in_dim,
            &cfg,
            run_seed,
        )?;
        rows.insert(genotype, (val, test));
    }
    Ok(OracleTable { protocol: protocol.clone(), rows })
}

/// Spearman rank correlation between two paired score lists.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < 2 {
        return 1.0;
    }
    let rank = |xs: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..xs.len()).collect();
        idx.sort_by(|&i, &j| xs[i].partial_cmp(&xs[j]).unwrap().then(i.cmp(&j)));
        let mut r = vec![0.0; xs.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64;
        }
        r
    };
    let ra = rank(a);
    let rb = rank(b);
    let mean = (n as f64 - 1.0) / 2.0;
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for i in 0..n {
        let xa = ra[i] - mean;
        let xb = rb[i] - mean;
        num += xa * xb;
        da += xa * xa;
        db += xb * xb;
    }
    num / (da.sqrt() * db.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::searchspace::{Family, OpKind};
    use crate::tasks::{gen_teacher_regression, TaskSpec};

    fn small_protocol() -> OracleProtocol {
        OracleProtocol { width: 8, epochs: 10, batch_size: 16, lr: 0.05, clip: 1.0, seed: 7 }
    }

    #[test]
    fn trivial_space_gives_one_row() {
        let space = SearchSpace::new(Family::Single, 1, vec![OpKind::Tanh], 1);
        let spec = TaskSpec { dim: 2, n_train: 32, n_val: 16, n_test: 16, ..TaskSpec::default() };
        let data: Dataset<f64> = gen_teacher_regression(&spec).unwrap();
        let table = oracle_train_all(&space, &data, &small_protocol(), 500).unwrap();
        assert_eq!(table.len(), 1);
    }

    #[test]
    fn oracle_covers_space_exactly_once() {
        let space = SearchSpace::single(2);
        let spec = TaskSpec { dim: 2, n_train: 64, n_val: 32, n_test: 32, ..TaskSpec::default() };
        let data: Dataset<f64> = gen_teacher_regression(&spec).unwrap();
        let table = oracle_train_all(&space, &data, &small_protocol(), 500).unwrap();
        assert_eq!(table.len(), 32); // all genotypes distinct, BTreeMap keys
        assert!(table.rank_of(table.sorted_by_val()[0].0.as_str()) == Some(1));
    }

    #[test]
    fn oracle_refuses_large_space() {
        let space = SearchSpace::single(8);
        let spec = TaskSpec::default();
        let data: Dataset<f64> = gen_teacher_regression(&spec).unwrap();
        assert!(oracle_train_all(&space, &data, &small_protocol(), 500).is_err());
    }

    #[test]
    fn spearman_bounds() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let up = [0.1, 0.2, 0.3, 0.4];
        let down = [4.0, 3.0, 2.0, 1.0];
        assert!((spearman(&a, &up) - 1.0).abs() < 1e-12);
        assert!((spearman(&a, &down) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn jsonl_round_trip() {
        let mut rows = BTreeMap::new();
        rows.insert("g1".to_string(), (0.5, 0.6));
        rows.insert("g2".to_string(), (0.3, 0.4));
        let table = OracleTable { protocol: small_protocol(), rows };
        let dir = std::env::temp_dir().join(format!("nanonas-oracle-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("oracle.jsonl");
        table.write_jsonl(&path).unwrap();
        let loaded = OracleTable::read_jsonl(&path).unwrap();
        assert_eq!(table, loaded);
        std::fs::remove_dir_all(&dir).ok();
    }
}
