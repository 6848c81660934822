//! Cell networks built from architectures: the shared-weights supernet
//! (every legal edge allocated), standalone networks (active edges only),
//! shared-weights training and evaluation, sharded final selection, and
//! from-scratch training.

mod net;
mod select;
mod shared;
mod standalone;
mod train;

pub use net::{LossKind, NetDims, Split};
pub use select::{select_final, SelectAudit, SelectConfig, ShardAudit};
pub use shared::{expected_num_params, init_shared, legal_edge_ids, SharedWeights};
pub use standalone::{train_from_scratch, ScratchConfig, StandaloneNet};
pub use train::{evaluate_with_shared, train_shared, BatchLimit, StreamLabels, TrainConfig, TrainLog};

/// Hidden width and output head used to build a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetConfig {
    pub width: usize,
    pub out_dim: usize,
    /// Marks the smaller search-stage network (the larger evaluation
    /// network is the proxyless one).
    pub proxy: bool,
}

impl NetConfig {
    pub fn proxy(width: usize, out_dim: usize) -> Self {
        NetConfig { width, out_dim, proxy: true }
    }

    pub fn proxyless(width: usize, out_dim: usize) -> Self {
        NetConfig { width, out_dim, proxy: false }
    }
}
