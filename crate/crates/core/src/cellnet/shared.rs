//! The supernet parameter store: a single set of weights covering every
//! legal edge of the search space. Any architecture is evaluated by
//! activating its subgraph; one training step touches only the active
//! parameters, so every inactive edge stays bit-identical.

use super::net::{self, LossKind, NetDims};
use super::NetConfig;
use crate::numcore::{init_uniform, Matrix, ParamStore, Real, Rng, TensorId};
use crate::searchspace::{validate_space, Architecture, Family, SearchSpace};
use crate::{Error, Result};

/// Every legal edge id of the space, in the documented allocation order:
/// (cell, node, pred, slot) ascending.
pub fn legal_edge_ids(space: &SearchSpace) -> Vec<TensorId> {
    let mut ids = Vec::new();
    let slots = match space.family {
        Family::Single => 1,
        Family::Dual => 2,
    };
    for cell in 0..space.num_cells {
        for node in 1..=space.num_nodes {
            let preds = match space.family {
                Family::Single => node,
                Family::Dual => node + 1,
            };
            for pred in 0..preds {
                for slot in 0..slots {
                    ids.push(TensorId::edge(cell, node, pred, slot));
                }
            }
        }
    }
    ids
}

/// Closed-form parameter count of the supernet: stems + all legal edges
/// (each width x width) + readout.
pub fn expected_num_params(space: &SearchSpace, dims: NetDims) -> usize {
    let stems_per_cell = match space.family {
        Family::Single => 1,
        Family::Dual => 2,
    };
    let mut total = 0usize;
    for cell in 0..space.num_cells {
        let input = if cell == 0 { dims.in_dim } else { dims.width };
        total += stems_per_cell * dims.width * input;
    }
    total += legal_edge_ids(space).len() * dims.width * dims.width;
    total += dims.out_dim * dims.width;
    total
}

/// Shared-weights supernet over one search space.
#[derive(Debug, Clone)]
pub struct SharedWeights<R> {
    pub space_id: String,
    space: SearchSpace,
    dims: NetDims,
    pub(crate) store: ParamStore<R>,
}

/// Allocates and initializes every legal edge, the stems, and the
/// readout, in a deterministic order: stems (cell, slot ascending), edges
/// per [`legal_edge_ids`], readout last.
pub fn init_shared<R: Real>(
    space: &SearchSpace,
    net: NetConfig,
    in_dim: usize,
    rng: &mut Rng,
) -> Result<SharedWeights<R>> {
    let violations = validate_space(space);
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::InvalidSpace(msgs.join("; ")));
    }
    let dims = NetDims { in_dim, width: net.width, out_dim: net.out_dim };
    let mut store = ParamStore::new();
    let stems = match space.family {
        Family::Single => 1,
        Family::Dual => 2,
    };
    for cell in 0..space.num_cells {
        let input = if cell == 0 { dims.in_dim } else { dims.width };
        for slot in 0..stems {
            store.insert(init_uniform(TensorId::stem(cell, slot), dims.width, input, input, rng)?);
        }
    }
    for id in legal_edge_ids(space) {
        store.insert(init_uniform(id, dims.width, dims.width, dims.width, rng)?);
    }
    store.insert(init_uniform(TensorId::readout(), dims.out_dim, dims.width, dims.width, rng)?);
    debug_assert_eq!(store.num_params(), expected_num_params(space, dims));
    Ok(SharedWeights { space_id: space.space_id(), space: space.clone(), dims, store })
}

impl<R: Real> SharedWeights<R> {
    pub fn space(&self) -> &SearchSpace {
        &self.space
    }

    pub fn dims(&self) -> NetDims {
        self.dims
    }

    pub fn num_params(&self) -> usize {
        self.store.num_params()
    }

    pub fn num_edge_tensors(&self) -> usize {
        legal_edge_ids(&self.space).len()
    }

    pub fn store(&self) -> &ParamStore<R> {
        &self.store
    }

    pub fn store_mut(&mut self) -> &mut ParamStore<R> {
        &mut self.store
    }

    pub fn forward(&self, arch: &Architecture, x: &Matrix<R>) -> Result<Matrix<R>> {
        net::forward(&self.space, arch, &self.store, self.dims, x)
    }

    /// Loss plus gradients on the active parameters only; returns the
    /// activated tensor ids.
    pub fn loss_and_grads(
        &mut self,
        arch: &Architecture,
        x: &Matrix<R>,
        y: &Matrix<R>,
        kind: LossKind,
    ) -> Result<(R, Vec<TensorId>)> {
        net::loss_and_grads(&self.space, arch, &mut self.store, self.dims, x, y, kind)
    }

    /// Central-difference audit of the analytic gradients for one batch:
    /// clones the store, fills analytic gradients, and returns the
    /// maximum relative error against `finite_diff_check`.
    pub fn gradient_check(
        &self,
        arch: &Architecture,
        x: &Matrix<R>,
        y: &Matrix<R>,
        kind: LossKind,
        eps: R,
        rng: &mut Rng,
    ) -> Result<f64> {
        let mut store = self.store.clone();
        store.zero_all_grads();
        let (_, active) =
            net::loss_and_grads(&self.space, arch, &mut store, self.dims, x, y, kind)?;
        let space = &self.space;
        let dims = self.dims;
        crate::numcore::finite_diff_check(
            &mut store,
            &active,
            &mut |s| {
                let preds = net::forward(space, arch, s, dims, x)?;
                Ok(net::loss_value(kind, &preds, y))
            },
            eps,
            rng,
        )
    }

    /// Mean loss of `arch` over a whole split, chunked at `batch_size`.
    pub fn mean_loss(
        &self,
        arch: &Architecture,
        split: &net::Split<R>,
        kind: LossKind,
        batch_size: usize,
        max_batches: Option<usize>,
    ) -> Result<f64> {
        mean_loss_over(
            |x| net::forward(&self.space, arch, &self.store, self.dims, x),
            split,
            kind,
            batch_size,
            max_batches,
        )
    }
}

/// Mean of per-minibatch losses over the first `max_batches` chunks (all
/// chunks when `None`); rows are visited in stored order, the final
/// partial chunk counts as a minibatch.
pub(crate) fn mean_loss_over<R: Real>(
    forward: impl Fn(&Matrix<R>) -> Result<Matrix<R>>,
    split: &net::Split<R>,
    kind: LossKind,
    batch_size: usize,
    max_batches: Option<usize>,
) -> Result<f64> {
    if split.is_empty() {
        return Err(Error::Config("empty evaluation data".into()));
    }
    if batch_size == 0 {
        return Err(Error::Config("batch_size must be >= 1".into()));
    }
    let n = split.len();
    let total_chunks = n.div_ceil(batch_size);
    let chunks = max_batches.map_or(total_chunks, |m| m.min(total_chunks));
    let mut acc = 0.0f64;
    for b in 0..chunks {
        let lo = b * batch_size;
        let hi = ((b + 1) * batch_size).min(n);
        let idx: Vec<usize> = (lo..hi).collect();
        let x = split.x.gather(&idx);
        let y = split.y.gather(&idx);
        let preds = forward(&x)?;
        let loss = net::loss_value(kind, &preds, &y)
            .to_f64()
            .ok_or_else(|| Error::non_finite("loss", "evaluation"))?;
        if !loss.is_finite() {
            return Err(Error::non_finite("loss", "evaluation"));
        }
        acc += loss;
    }
    Ok(acc / chunks as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::split_stream;
    use crate::searchspace::OpKind;

    #[test]
    fn single_n1_allocation() {
        let space = SearchSpace::new(Family::Single, 1, vec![OpKind::Tanh], 1);
        let mut rng = split_stream(0, "alloc");
        let w: SharedWeights<f64> =
            init_shared(&space, NetConfig::proxy(4, 1), 8, &mut rng).unwrap();
        assert_eq!(w.num_edge_tensors(), 1);
        // stem 4x8 + edge 4x4 + readout 1x4
        assert_eq!(w.num_params(), 4 * 8 + 4 * 4 + 4);
    }

    #[test]
    fn single_n8_has_36_edges() {
        let space = SearchSpace::single(8);
        assert_eq!(legal_edge_ids(&space).len(), (1..=8).sum::<usize>());
    }

    // Enumerating legal (node, pred, slot) triples: a dual N=4 cell has
    // sum_{i=1..4} (i+1)*2 = 28 edge tensors, 56 for the two-cell network.
    #[test]
    fn dual_n4_edge_enumeration() {
        let one_cell = SearchSpace::new(Family::Dual, 4, vec![OpKind::Tanh, OpKind::Zero], 1);
        assert_eq!(legal_edge_ids(&one_cell).len(), 28);
        let two_cells = SearchSpace::new(Family::Dual, 4, vec![OpKind::Tanh, OpKind::Zero], 2);
        assert_eq!(legal_edge_ids(&two_cells).len(), 56);
    }

    #[test]
    fn param_count_matches_closed_form() {
        let space = SearchSpace::new(Family::Dual, 3, vec![OpKind::Tanh, OpKind::Zero], 2);
        let mut rng = split_stream(4, "count");
        let w: SharedWeights<f64> =
            init_shared(&space, NetConfig::proxy(6, 2), 5, &mut rng).unwrap();
        assert_eq!(
            w.num_params(),
            expected_num_params(&space, NetDims { in_dim: 5, width: 6, out_dim: 2 })
        );
    }
}
