//! Dataset generators and the CSV cache format.

use super::{TaskKind, TaskSpec};
use crate::cellnet::{LossKind, NetConfig, Split, StandaloneNet};
use crate::numcore::{split_stream, Matrix, Real};
use crate::searchspace::{sample_architecture, SearchSpace};
use crate::{Error, Result};
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

/// A generated benchmark: three disjoint splits plus the loss the task
/// is scored with.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<R> {
    pub kind: TaskKind,
    pub in_dim: usize,
    pub out_dim: usize,
    pub loss: LossKind,
    pub train: Split<R>,
    pub val: Split<R>,
    pub test: Split<R>,
}

impl<R: Real> Dataset<R> {
    pub fn split(&self, name: &str) -> &Split<R> {
        match name {
            "train" => &self.train,
            "val" => &self.val,
            "test" => &self.test,
            other => panic!("unknown split {other}"),
        }
    }
}

/// Generates the dataset named by the spec.
pub fn gen_dataset<R: Real>(spec: &TaskSpec) -> Result<Dataset<R>> {
    match spec.kind {
        TaskKind::TeacherRegression => gen_teacher_regression(spec),
        TaskKind::TwoSpirals => gen_two_spirals(spec),
    }
}

fn uniform_cube<R: Real>(n: usize, dim: usize, seed: u64, label: &str) -> Matrix<R> {
    let mut rng = split_stream(seed, label);
    let mut m = Matrix::zeros(n, dim);
    let two = R::one() + R::one();
    for i in 0..n {
        for j in 0..dim {
            let u: R = rng.unit();
            m.set(i, j, u * two - R::one());
        }
    }
    m
}

/// Teacher regression: inputs uniform on `[-1, 1]^d`, targets are a
/// seeded teacher cell's outputs plus gaussian label noise. Split inputs
/// and noise come from disjoint stream labels of `data_seed`.
pub fn gen_teacher_regression<R: Real>(spec: &TaskSpec) -> Result<Dataset<R>> {
    spec.validate()?;
    let teacher_space = SearchSpace::single(spec.teacher_nodes);
    let teacher_arch = sample_architecture(
        &teacher_space,
        &mut split_stream(spec.teacher_seed, "teacher/arch"),
    )?;
    let teacher: StandaloneNet<R> = StandaloneNet::new(
        &teacher_space,
        &teacher_arch,
        NetConfig::proxyless(spec.teacher_width, 1),
        spec.dim,
        spec.teacher_seed,
    )?;

    let sigma = R::from_f64_lossy(spec.noise);
    let make_split = |name: &str, n: usize| -> Result<Split<R>> {
        let x = uniform_cube(n, spec.dim, spec.data_seed, &format!("data/{name}/x"));
        let clean = teacher.forward(&x)?;
        let mut noise_rng = split_stream(spec.data_seed, &format!("data/{name}/noise"));
        let mut y = Matrix::zeros(n, 1);
        for i in 0..n {
            let eps: R = noise_rng.gaussian();
            y.set(i, 0, clean.at(i, 0) + sigma * eps);
        }
        Ok(Split { x, y })
    };

    Ok(Dataset {
        kind: TaskKind::TeacherRegression,
        in_dim: spec.dim,
        out_dim: 1,
        loss: LossKind::SquaredError,
        train: make_split("train", spec.n_train)?,
        val: make_split("val", spec.n_val)?,
        test: make_split("test", spec.n_test)?,
    })
}

/// Point `k` of `m` on spiral class `c`: angle `theta = 3.5*pi*k/m`
/// (plus angular noise), radius `r = 0.1 + 0.9*k/m`; class 1 is the
/// point-reflected spiral. Classes alternate, so counts stay balanced.
pub fn gen_two_spirals<R: Real>(spec: &TaskSpec) -> Result<Dataset<R>> {
    spec.validate()?;
    let make_split = |name: &str, n: usize| -> Split<R> {
        let mut rng = split_stream(spec.data_seed, &format!("data/{name}/angle"));
        let per_class = n.div_ceil(2);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        'outer: for k in 0..per_class {
            for class in 0..2usize {
                if xs.len() == n {
                    break 'outer;
                }
                let frac = k as f64 / per_class as f64;
                let noise: f64 = rng.gaussian::<f64>() * spec.noise;
                let theta = 3.5 * std::f64::consts::PI * frac + noise;
                let r = 0.1 + 0.9 * frac;
                let sign = if class == 0 { 1.0 } else { -1.0 };
                xs.push(vec![
                    R::from_f64_lossy(sign * r * theta.cos()),
                    R::from_f64_lossy(sign * r * theta.sin()),
                ]);
                ys.push(vec![R::from_f64_lossy(class as f64)]);
            }
        }
        Split { x: Matrix::from_rows(xs), y: Matrix::from_rows(ys) }
    };
    Ok(Dataset {
        kind: TaskKind::TwoSpirals,
        in_dim: 2,
        out_dim: 2,
        loss: LossKind::CrossEntropy,
        train: make_split("train", spec.n_train),
        val: make_split("val", spec.n_val),
        test: make_split("test", spec.n_test),
    })
}

fn kind_tag(loss: LossKind) -> &'static str {
    match loss {
        LossKind::SquaredError => "squared-error",
        LossKind::CrossEntropy => "cross-entropy",
    }
}

/// Writes the dataset as CSV: a `#` header carrying the metadata, then
/// one row per sample: `split,x...,y...`. Floats use shortest round-trip
/// formatting, so an f64 dataset reloads bit-exactly.
pub fn save_csv<R: Real>(dataset: &Dataset<R>, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(
        w,
        "# nanonas-dataset v1 kind={} in_dim={} out_dim={} loss={}",
        dataset.kind.as_str(),
        dataset.in_dim,
        dataset.out_dim,
        kind_tag(dataset.loss)
    )?;
    for name in ["train", "val", "test"] {
        let split = dataset.split(name);
        for i in 0..split.len() {
            let xs: Vec<String> = split.x.row(i).iter().map(|v| format!("{v}")).collect();
            let ys: Vec<String> = split.y.row(i).iter().map(|v| format!("{v}")).collect();
            writeln!(w, "{name},{},{}", xs.join(","), ys.join(","))?;
        }
    }
    Ok(())
}

/// Reads a dataset written by [`save_csv`].
pub fn load_csv<R: Real>(path: &Path) -> Result<Dataset<R>> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty dataset file".into()))??;
    let mut kind = None;
    let mut in_dim = None;
    let mut out_dim = None;
    let mut loss = None;
    for token in header.trim_start_matches('#').split_whitespace() {
        if let Some((k, v)) = token.split_once('=') {
            match k {
                "kind" => kind = Some(TaskKind::parse(v)?),
                "in_dim" => in_dim = v.parse().ok(),
                "out_dim" => out_dim = v.parse().ok(),
                "loss" => {
                    loss = Some(match v {
                        "squared-error" => LossKind::SquaredError,
                        "cross-entropy" => LossKind::CrossEntropy,
                        other => return Err(Error::Parse(format!("unknown loss {other}"))),
                    })
                }
                _ => {}
            }
        }
    }
    let (kind, in_dim, out_dim, loss) = match (kind, in_dim, out_dim, loss) {
        (Some(k), Some(i), Some(o), Some(l)) => (k, i, o, l),
        _ => return Err(Error::Parse("incomplete dataset header".into())),
    };
    let y_cols = if loss == LossKind::CrossEntropy { 1 } else { out_dim };

    let mut rows: std::collections::BTreeMap<&str, (Vec<Vec<R>>, Vec<Vec<R>>)> = Default::default();
    for name in ["train", "val", "test"] {
        rows.insert(name, (Vec::new(), Vec::new()));
    }
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 1 + in_dim + y_cols {
            return Err(Error::Parse(format!("bad dataset row: {line}")));
        }
        let parse = |s: &str| -> Result<R> {
            s.parse::<R>()
                .map_err(|_| Error::Parse(format!("bad float {s:?}")))
        };
        let x: Vec<R> = fields[1..1 + in_dim].iter().map(|s| parse(s)).collect::<Result<_>>()?;
        let y: Vec<R> = fields[1 + in_dim..].iter().map(|s| parse(s)).collect::<Result<_>>()?;
        let entry = rows
            .get_mut(fields[0])
            .ok_or_else(|| Error::Parse(format!("unknown split {:?}", fields[0])))?;
        entry.0.push(x);
        entry.1.push(y);
    }
    let take = |name: &str, rows: &mut std::collections::BTreeMap<&str, (Vec<Vec<R>>, Vec<Vec<R>>)>| {
        let (xs, ys) = rows.remove(name).unwrap();
        Split { x: Matrix::from_rows(xs), y: Matrix::from_rows(ys) }
    };
    let mut rows = rows;
    Ok(Dataset {
        kind,
        in_dim,
        out_dim,
        loss,
        train: take("train", &mut rows),
        val: take("val", &mut rows),
        test: take("test", &mut rows),
    })
}
