//! Standalone networks: one fixed architecture, only its active edges
//! allocated, trained from scratch. Training is resumable at epoch
//! boundaries because each epoch's data order comes from its own labeled
//! stream.

use super::net::{self, LossKind, NetDims, Split};
use super::shared::mean_loss_over;
use super::NetConfig;
use crate::numcore::{
    clip_global_norm, init_uniform, split_stream, sgd_step, Matrix, ParamStore, Real, TensorId,
};
use crate::searchspace::{validate_architecture, Architecture, SearchSpace};
use crate::{Error, Result};

/// From-scratch training settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ScratchConfig {
    pub epochs: u32,
    pub batch_size: usize,
    pub lr: f64,
    pub clip: f64,
}

impl ScratchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("scratch batch_size must be >= 1".into()));
        }
        if self.lr <= 0.0 {
            return Err(Error::Config("scratch lr must be > 0".into()));
        }
        if self.clip <= 0.0 {
            return Err(Error::Config("scratch clip must be > 0".into()));
        }
        Ok(())
    }
}

/// A network holding only the edges its architecture activates.
#[derive(Debug, Clone)]
pub struct StandaloneNet<R> {
    space: SearchSpace,
    arch: Architecture,
    dims: NetDims,
    store: ParamStore<R>,
    active: Vec<TensorId>,
    epochs_trained: u32,
    seed: u64,
}

impl<R: Real> StandaloneNet<R> {
    /// Allocates stems, the active (non-zero-op) edges, and the readout,
    /// initialized from the `init` stream of `seed`.
    pub fn new(
        space: &SearchSpace,
        arch: &Architecture,
        net: NetConfig,
        in_dim: usize,
        seed: u64,
    ) -> Result<Self> {
        validate_architecture(space, arch)?;
        let dims = NetDims { in_dim, width: net.width, out_dim: net.out_dim };
        let mut rng = split_stream(seed, "init");
        let mut store = ParamStore::new();
        let active = net::active_ids(space, arch);
        for &id in &active {
            let (rows, cols, fan_in) = match id.role {
                crate::numcore::Role::Stem => {
                    let input = if id.cell == 0 { dims.in_dim } else { dims.width };
                    (dims.width, input, input)
                }
                crate::numcore::Role::Edge => (dims.width, dims.width, dims.width),
                crate::numcore::Role::Readout => (dims.out_dim, dims.width, dims.width),
            };
            store.insert(init_uniform(id, rows, cols, fan_in, &mut rng)?);
        }
        Ok(StandaloneNet {
            space: space.clone(),
            arch: arch.clone(),
            dims,
            store,
            active,
            epochs_trained: 0,
            seed,
        })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }

    pub fn epochs_trained(&self) -> u32 {
        self.epochs_trained
    }

    pub fn num_params(&self) -> usize {
        self.store.num_params()
    }

    pub fn forward(&self, x: &Matrix<R>) -> Result<Matrix<R>> {
        net::forward(&self.space, &self.arch, &self.store, self.dims, x)
    }

    /// Trains up to `target_epochs`, resuming from wherever the net
    /// stopped. Epoch `e` always shuffles with the `data-order/epoch{e}`
    /// stream, so 0->4 in one call and 0->2 then 2->4 agree bit-exactly.
    pub fn train_to(
        &mut self,
        train: &Split<R>,
        kind: LossKind,
        cfg: &ScratchConfig,
        target_epochs: u32,
    ) -> Result<()> {
        cfg.validate()?;
        if train.is_empty() {
            return Err(Error::Config("empty training data".into()));
        }
        let n = train.len();
        let batches = n / cfg.batch_size;
        if batches == 0 {
            return Err(Error::Config(format!(
                "batch_size {} exceeds training set of {n}",
                cfg.batch_size
            )));
        }
        let lr = R::from_f64_lossy(cfg.lr);
        let clip = R::from_f64_lossy(cfg.clip);
        for epoch in self.epochs_trained..target_epochs {
            let mut order: Vec<usize> = (0..n).collect();
            split_stream(self.seed, &format!("data-order/epoch{epoch}")).shuffle(&mut order);
            for b in 0..batches {
                let idx = &order[b * cfg.batch_size..(b + 1) * cfg.batch_size];
                let x = train.x.gather(idx);
                let y = train.y.gather(idx);
                let (loss, active) = net::loss_and_grads(
                    &self.space,
                    &self.arch,
                    &mut self.store,
                    self.dims,
                    &x,
                    &y,
                    kind,
                )?;
                if !loss.is_finite() {
                    return Err(Error::non_finite("loss", format!("epoch {epoch} batch {b}")));
                }
                clip_global_norm(&mut self.store, &active, clip)?;
                sgd_step(&mut self.store, &active, lr);
            }
            self.epochs_trained = epoch + 1;
        }
        Ok(())
    }

    /// Mean loss over a split.
    pub fn evaluate(&self, split: &Split<R>, kind: LossKind, batch_size: usize) -> Result<f64> {
        mean_loss_over(|x| self.forward(x), split, kind, batch_size, None)
    }

    pub fn active_ids(&self) -> &[TensorId] {
        &self.active
    }
}

/// Trains `arch` from scratch for `cfg.epochs` and reports the
/// final-epoch validation and test metrics. Deterministic per seed.
pub fn train_from_scratch<R: Real>(
    space: &SearchSpace,
    arch: &Architecture,
    train: &Split<R>,
    val: &Split<R>,
    test: &Split<R>,
    kind: LossKind,
    net_cfg: NetConfig,
    in_dim: usize,
    cfg: &ScratchConfig,
    seed: u64,
) -> Result<(f64, f64, StandaloneNet<R>)> {
    let mut net = StandaloneNet::new(space, arch, net_cfg, in_dim, seed)?;
    net.train_to(train, kind, cfg, cfg.epochs)?;
    let val_metric = net.evaluate(val, kind, cfg.batch_size)?;
    let test_metric = net.evaluate(test, kind, cfg.batch_size)?;
    Ok((val_metric, test_metric, net))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::split_stream;
    use crate::searchspace::{sample_architecture, OpKind};

    fn toy_split(n: usize, seed: u64) -> Split<f64> {
        let mut rng = split_stream(seed, "toy");
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for _ in 0..n {
            let a: f64 = rng.unit::<f64>() * 2.0 - 1.0;
            let b: f64 = rng.unit::<f64>() * 2.0 - 1.0;
            xs.push(vec![a, b]);
            ys.push(vec![(a + b).tanh()]);
        }
        Split { x: Matrix::from_rows(xs), y: Matrix::from_rows(ys) }
    }

    #[test]
    fn epochs_zero_reports_init_metrics() {
        let space = SearchSpace::single(2);
        let arch = sample_architecture(&space, &mut split_stream(3, "a")).unwrap();
        let split = toy_split(32, 1);
        let cfg = ScratchConfig { epochs: 0, batch_size: 8, lr: 0.1, clip: 1.0 };
        let (v, t, net) = train_from_scratch(
            &space, &arch, &split, &split, &split,
            LossKind::SquaredError, NetConfig::proxyless(4, 1), 2, &cfg, 7,
        )
        .unwrap();
        assert_eq!(net.epochs_trained(), 0);
        assert_eq!(v, t); // same split, untouched weights
    }

    #[test]
    fn same_seed_same_metrics() {
        let space = SearchSpace::single(2);
        let arch = sample_architecture(&space, &mut split_stream(5, "b")).unwrap();
        let split = toy_split(40, 2);
        let cfg = ScratchConfig { epochs: 3, batch_size: 8, lr: 0.05, clip: 0.5 };
        let run = |seed| {
            train_from_scratch(
                &space, &arch, &split, &split, &split,
                LossKind::SquaredError, NetConfig::proxyless(6, 1), 2, &cfg, seed,
            )
            .map(|(v, t, _)| (v, t))
            .unwrap()
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11), run(12));
    }

    // Resuming at an epoch boundary reproduces the single-shot run.
    #[test]
    fn checkpoint_resume_is_bit_exact() {
        let space = SearchSpace::single(2);
        let arch = sample_architecture(&space, &mut split_stream(9, "c")).unwrap();
        let split = toy_split(40, 3);
        let cfg = ScratchConfig { epochs: 4, batch_size: 8, lr: 0.05, clip: 0.5 };

        let mut one_shot = StandaloneNet::<f64>::new(&space, &arch, NetConfig::proxyless(4, 1), 2, 21).unwrap();
        one_shot.train_to(&split, LossKind::SquaredError, &cfg, 4).unwrap();

        let mut resumed = StandaloneNet::<f64>::new(&space, &arch, NetConfig::proxyless(4, 1), 2, 21).unwrap();
        resumed.train_to(&split, LossKind::SquaredError, &cfg, 2).unwrap();
        resumed.train_to(&split, LossKind::SquaredError, &cfg, 4).unwrap();

        let a = one_shot.evaluate(&split, LossKind::SquaredError, 8).unwrap();
        let b = resumed.evaluate(&split, LossKind::SquaredError, 8).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn zero_op_edges_not_allocated() {
        let space = SearchSpace::new(
            crate::searchspace::Family::Dual,
            2,
            vec![OpKind::Tanh, OpKind::Zero],
            1,
        );
        // find an arch with at least one zero op
        let mut rng = split_stream(0, "zero-alloc");
        let arch = loop {
            let a = sample_architecture(&space, &mut rng).unwrap();
            let has_zero = a.cells[0].iter().any(|d| match d {
                crate::searchspace::NodeDecision::Dual(p) => {
                    p.iter().any(|&(_, op)| op == OpKind::Zero)
                }
                _ => false,
            });
            if has_zero {
                break a;
            }
        };
        let net = StandaloneNet::<f64>::new(&space, &arch, NetConfig::proxyless(3, 1), 2, 0).unwrap();
        let zero_edges: usize = arch.cells[0]
            .iter()
            .map(|d| match d {
                crate::searchspace::NodeDecision::Dual(p) => {
                    p.iter().filter(|&&(_, op)| op == OpKind::Zero).count()
                }
                _ => 0,
            })
            .sum();
        // stems (2) + non-zero edges + readout
        assert_eq!(net.active_ids().len(), 2 + (4 - zero_edges) + 1);
    }
}
