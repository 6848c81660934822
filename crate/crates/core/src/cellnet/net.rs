//! Forward and backward passes through a cell network.
//!
//! Only the edges and operations named by the architecture are touched.
//! A `single` cell computes `h0 = tanh(W_stem x)` and node outputs
//! `op(W_edge h_pred)`; a `dual` cell projects its input through two
//! identity stems and each node sums its two slot terms, where a zero op
//! contributes the zero vector. The cell output is the arithmetic mean of
//! the N node outputs (width-invariant, so proxy and proxyless networks
//! share one readout shape); with two cells, the second consumes the
//! first's output. The prediction is the readout of the final cell output.

use crate::numcore::{
    relu, relu_deriv, sigmoid, sigmoid_deriv_from_output, tanh, tanh_deriv_from_output, Matrix,
    ParamStore, ParamTensor, Real, TensorId,
};
use crate::searchspace::{Architecture, Family, NodeDecision, OpKind, SearchSpace};
use crate::{Error, Result};

/// Input/hidden/output dimensions of a built network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetDims {
    pub in_dim: usize,
    pub width: usize,
    pub out_dim: usize,
}

/// Training objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LossKind {
    /// Mean squared error over batch and output dims; targets are dense.
    SquaredError,
    /// Mean cross-entropy; targets hold the class index in column 0.
    CrossEntropy,
}

/// One data split: features and targets with matching row counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Split<R> {
    pub x: Matrix<R>,
    pub y: Matrix<R>,
}

impl<R: Real> Split<R> {
    pub fn len(&self) -> usize {
        self.x.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.x.rows() == 0
    }
}

/// `x (B,in) * W^T (in,h) -> (B,h)`
fn linear<R: Real>(x: &Matrix<R>, w: &ParamTensor<R>) -> Matrix<R> {
    debug_assert_eq!(x.cols(), w.cols());
    let mut out = Matrix::zeros(x.rows(), w.rows());
    for b in 0..x.rows() {
        let xr = x.row(b);
        let or = out.row_mut(b);
        for j in 0..w.rows() {
            let mut acc = R::zero();
            for (k, &xv) in xr.iter().enumerate() {
                acc += xv * w.at(j, k);
            }
            or[j] = acc;
        }
    }
    out
}

/// `dW[j,k] += sum_b dz[b,j] * x[b,k]`
fn add_weight_grad<R: Real>(w: &mut ParamTensor<R>, dz: &Matrix<R>, x: &Matrix<R>) {
    let cols = w.cols();
    for b in 0..dz.rows() {
        let dzr = dz.row(b);
        let xr = x.row(b);
        for (j, &d) in dzr.iter().enumerate() {
            let g = w.grad_mut();
            for (k, &xv) in xr.iter().enumerate() {
                g[j * cols + k] += d * xv;
            }
        }
    }
}

/// `dX[b,k] += sum_j dz[b,j] * W[j,k]`
fn add_input_grad<R: Real>(dx: &mut Matrix<R>, dz: &Matrix<R>, w: &ParamTensor<R>) {
    for b in 0..dz.rows() {
        let dzr = dz.row(b);
        for j in 0..w.rows() {
            let d = dzr[j];
            let xr = dx.row_mut(b);
            for (k, x) in xr.iter_mut().enumerate() {
                *x += d * w.at(j, k);
            }
        }
    }
}

fn apply_op<R: Real>(op: OpKind, z: &Matrix<R>) -> Matrix<R> {
    let mut out = Matrix::zeros(z.rows(), z.cols());
    for b in 0..z.rows() {
        let zr = z.row(b);
        let or = out.row_mut(b);
        for (o, &v) in or.iter_mut().zip(zr.iter()) {
            *o = match op {
                OpKind::Tanh => tanh(v),
                OpKind::Relu => relu(v),
                OpKind::Sigmoid => sigmoid(v),
                OpKind::Identity => v,
                OpKind::Zero => R::zero(),
            };
        }
    }
    out
}

/// `dz = d * op'`, derivative taken from pre-activation `z` or output `y`.
fn op_backward<R: Real>(op: OpKind, d: &Matrix<R>, z: &Matrix<R>, y: &Matrix<R>) -> Matrix<R> {
    let mut out = Matrix::zeros(d.rows(), d.cols());
    for b in 0..d.rows() {
        let dr = d.row(b);
        let zr = z.row(b);
        let yr = y.row(b);
        let or = out.row_mut(b);
        for k in 0..dr.len() {
            let deriv = match op {
                OpKind::Tanh => tanh_deriv_from_output(yr[k]),
                OpKind::Relu => relu_deriv(zr[k]),
                OpKind::Sigmoid => sigmoid_deriv_from_output(yr[k]),
                OpKind::Identity => R::one(),
                OpKind::Zero => R::zero(),
            };
            or[k] = dr[k] * deriv;
        }
    }
    out
}

struct TermCache<R> {
    tid: TensorId,
    pred: usize,
    op: OpKind,
    pre: Matrix<R>,
    post: Matrix<R>,
}

struct CellCache<R> {
    input: Matrix<R>,
    /// Internal activations: stem outputs first, then node outputs.
    values: Vec<Matrix<R>>,
    /// Per search node, the non-zero-op terms (zero ops leave no trace).
    terms: Vec<Vec<TermCache<R>>>,
    output: Matrix<R>,
}

pub(crate) struct ForwardCache<R> {
    cells: Vec<CellCache<R>>,
}

fn stem_count(family: Family) -> usize {
    match family {
        Family::Single => 1,
        Family::Dual => 2,
    }
}

fn decision_terms(space: &SearchSpace, cell: usize, node: usize, d: &NodeDecision) -> Vec<(usize, OpKind, TensorId)> {
    match d {
        NodeDecision::Single(pred, op) => vec![(*pred, *op, TensorId::edge(cell, node, *pred, 0))],
        NodeDecision::Dual(pairs) => pairs
            .iter()
            .enumerate()
            .map(|(slot, &(pred, op))| (pred, op, TensorId::edge(cell, node, pred, slot)))
            .collect(),
    }
    .into_iter()
    .filter(|&(pred, _, _)| {
        debug_assert!(pred < space.num_nodes + stem_count(space.family));
        true
    })
    .collect()
}

/// Tensor ids activated by `arch`, in deterministic order: stems, then
/// edges by (cell, node, slot) skipping zero ops, then the readout.
pub(crate) fn active_ids(space: &SearchSpace, arch: &Architecture) -> Vec<TensorId> {
    let mut ids = Vec::new();
    for cell in 0..space.num_cells {
        for slot in 0..stem_count(space.family) {
            ids.push(TensorId::stem(cell, slot));
        }
    }
    for (cell, decisions) in arch.cells.iter().enumerate() {
        for (idx, d) in decisions.iter().enumerate() {
            for (_, op, tid) in decision_terms(space, cell, idx + 1, d) {
                if op != OpKind::Zero {
                    ids.push(tid);
                }
            }
        }
    }
    ids.push(TensorId::readout());
    ids
}

fn check_compat<R: Real>(
    space: &SearchSpace,
    arch: &Architecture,
    dims: NetDims,
    x: &Matrix<R>,
) -> Result<()> {
    if arch.space_id != space.space_id() {
        return Err(Error::Parse(format!(
            "architecture from space {} used with space {}",
            arch.space_id,
            space.space_id()
        )));
    }
    if x.cols() != dims.in_dim {
        return Err(Error::Config(format!(
            "input has {} columns, stem expects {}",
            x.cols(),
            dims.in_dim
        )));
    }
    Ok(())
}

/// Runs the network forward, returning predictions and the activation
/// cache needed for the backward pass.
pub(crate) fn forward_cached<R: Real>(
    space: &SearchSpace,
    arch: &Architecture,
    store: &ParamStore<R>,
    dims: NetDims,
    x: &Matrix<R>,
) -> Result<(Matrix<R>, ForwardCache<R>)> {
    check_compat(space, arch, dims, x)?;
    let stems = stem_count(space.family);
    let n = space.num_nodes;
    let batch = x.rows();
    let inv_n = R::one() / R::from_f64_lossy(n as f64);

    let mut cells = Vec::with_capacity(space.num_cells);
    let mut cell_input = x.clone();
    for (cell, decisions) in arch.cells.iter().enumerate() {
        let mut values: Vec<Matrix<R>> = Vec::with_capacity(stems + n);
        for slot in 0..stems {
            let z = linear(&cell_input, store.get(TensorId::stem(cell, slot)));
            let h = match space.family {
                Family::Single => apply_op(OpKind::Tanh, &z),
                Family::Dual => z,
            };
            values.push(h);
        }
        let mut terms: Vec<Vec<TermCache<R>>> = Vec::with_capacity(n);
        for (idx, d) in decisions.iter().enumerate() {
            let mut node_out = Matrix::zeros(batch, dims.width);
            let mut node_terms = Vec::new();
            for (pred, op, tid) in decision_terms(space, cell, idx + 1, d) {
                if op == OpKind::Zero {
                    continue; // contributes the zero vector, no weights touched
                }
                let z = linear(&values[pred], store.get(tid));
                let y = apply_op(op, &z);
                for b in 0..batch {
                    let yr = y.row(b);
                    let or = node_out.row_mut(b);
                    for (o, &v) in or.iter_mut().zip(yr.iter()) {
                        *o += v;
                    }
                }
                node_terms.push(TermCache { tid, pred, op, pre: z, post: y });
            }
            terms.push(node_terms);
            values.push(node_out);
        }
        let mut output = Matrix::zeros(batch, dims.width);
        for node in 0..n {
            let v = &values[stems + node];
            for b in 0..batch {
                let vr = v.row(b);
                let or = output.row_mut(b);
                for (o, &val) in or.iter_mut().zip(vr.iter()) {
                    *o += val * inv_n;
                }
            }
        }
        let next_input = output.clone();
        cells.push(CellCache { input: cell_input, values, terms, output });
        cell_input = next_input;
    }
    let preds = linear(&cell_input, store.get(TensorId::readout()));
    Ok((preds, ForwardCache { cells }))
}

/// Forward pass without gradient bookkeeping.
pub(crate) fn forward<R: Real>(
    space: &SearchSpace,
    arch: &Architecture,
    store: &ParamStore<R>,
    dims: NetDims,
    x: &Matrix<R>,
) -> Result<Matrix<R>> {
    forward_cached(space, arch, store, dims, x).map(|(p, _)| p)
}

fn mse<R: Real>(preds: &Matrix<R>, y: &Matrix<R>) -> (R, Matrix<R>) {
    let denom = R::from_f64_lossy((preds.rows() * preds.cols()) as f64);
    let mut loss = R::zero();
    let mut dpred = Matrix::zeros(preds.rows(), preds.cols());
    for b in 0..preds.rows() {
        for c in 0..preds.cols() {
            let e = preds.at(b, c) - y.at(b, c);
            loss += e * e;
            dpred.set(b, c, (e + e) / denom);
        }
    }
    (loss / denom, dpred)
}

fn cross_entropy<R: Real>(preds: &Matrix<R>, y: &Matrix<R>) -> (R, Matrix<R>) {
    let batch = preds.rows();
    let classes = preds.cols();
    let inv_b = R::one() / R::from_f64_lossy(batch as f64);
    let mut loss = R::zero();
    let mut dpred = Matrix::zeros(batch, classes);
    for b in 0..batch {
        let row = preds.row(b);
        let target = y.at(b, 0).to_f64().unwrap_or(f64::NAN) as usize;
        let max = row.iter().cloned().fold(R::neg_infinity(), R::max);
        let mut denom = R::zero();
        for &v in row {
            denom += (v - max).exp();
        }
        let log_denom = denom.ln() + max;
        loss += (log_denom - row[target]) * inv_b;
        for c in 0..classes {
            let softmax = ((row[c] - max).exp()) / denom;
            let indicator = if c == target { R::one() } else { R::zero() };
            dpred.set(b, c, (softmax - indicator) * inv_b);
        }
    }
    (loss, dpred)
}

pub(crate) fn loss_value<R: Real>(kind: LossKind, preds: &Matrix<R>, y: &Matrix<R>) -> R {
    match kind {
        LossKind::SquaredError => mse(preds, y).0,
        LossKind::CrossEntropy => cross_entropy(preds, y).0,
    }
}

/// Computes the batch loss and populates gradients for the active
/// parameters only. Every inactive edge gradient stays exactly zero.
/// Returns the loss and the activated tensor ids.
pub(crate) fn loss_and_grads<R: Real>(
    space: &SearchSpace,
    arch: &Architecture,
    store: &mut ParamStore<R>,
    dims: NetDims,
    x: &Matrix<R>,
    y: &Matrix<R>,
    kind: LossKind,
) -> Result<(R, Vec<TensorId>)> {
    let (preds, cache) = forward_cached(space, arch, store, dims, x)?;
    let (loss, dpred) = match kind {
        LossKind::SquaredError => mse(&preds, y),
        LossKind::CrossEntropy => cross_entropy(&preds, y),
    };
    if !loss.is_finite() {
        return Err(Error::non_finite("loss", "loss_and_grads"));
    }

    let stems = stem_count(space.family);
    let n = space.num_nodes;
    let inv_n = R::one() / R::from_f64_lossy(n as f64);

    // readout
    let final_out = &cache.cells.last().expect("at least one cell").output;
    let mut d_cell_out;
    {
        let readout = store.get_mut(TensorId::readout());
        add_weight_grad(readout, &dpred, final_out);
        d_cell_out = Matrix::zeros(x.rows(), dims.width);
        add_input_grad(&mut d_cell_out, &dpred, readout);
    }

    for (cell_idx, cell) in cache.cells.iter().enumerate().rev() {
        let mut d_values: Vec<Matrix<R>> = cell
            .values
            .iter()
            .map(|v| Matrix::zeros(v.rows(), v.cols()))
            .collect();
        // cell output is the mean of node outputs
        for node in 0..n {
            let dv = &mut d_values[stems + node];
            for b in 0..d_cell_out.rows() {
                let dr = d_cell_out.row(b);
                let vr = dv.row_mut(b);
                for (o, &d) in vr.iter_mut().zip(dr.iter()) {
                    *o += d * inv_n;
                }
            }
        }
        // nodes in reverse topological order
        for node in (0..n).rev() {
            let d_node = d_values[stems + node].clone();
            for term in &cell.terms[node] {
                let dz = op_backward(term.op, &d_node, &term.pre, &term.post);
                let w = store.get_mut(term.tid);
                add_weight_grad(w, &dz, &cell.values[term.pred]);
                add_input_grad(&mut d_values[term.pred], &dz, w);
            }
        }
        // stems
        let mut d_input = Matrix::zeros(cell.input.rows(), cell.input.cols());
        for slot in 0..stems {
            let dz = match space.family {
                Family::Single => {
                    // h = tanh(z): derivative through the cached output
                    op_backward(OpKind::Tanh, &d_values[slot], &cell.values[slot], &cell.values[slot])
                }
                Family::Dual => d_values[slot].clone(),
            };
            let w = store.get_mut(TensorId::stem(cell_idx, slot));
            add_weight_grad(w, &dz, &cell.input);
            add_input_grad(&mut d_input, &dz, w);
        }
        d_cell_out = d_input; // previous cell's output gradient
    }

    Ok((loss, active_ids(space, arch)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{split_stream, ParamTensor};
    use crate::searchspace::{sample_architecture, Architecture, NodeDecision};

    fn identity_tensor(id: TensorId, n: usize) -> ParamTensor<f64> {
        let mut t = ParamTensor::zeros(id, n, n);
        for i in 0..n {
            t.values_mut()[i * n + i] = 1.0;
        }
        t
    }

    // N=1 single cell with identity op and identity weights computes
    // readout(tanh(x)).
    #[test]
    fn identity_composition() {
        let space = SearchSpace::new(Family::Single, 1, vec![OpKind::Identity], 1);
        let arch = Architecture {
            space_id: space.space_id(),
            cells: vec![vec![NodeDecision::Single(0, OpKind::Identity)]],
        };
        let dims = NetDims { in_dim: 3, width: 3, out_dim: 3 };
        let mut store = ParamStore::new();
        store.insert(identity_tensor(TensorId::stem(0, 0), 3));
        store.insert(identity_tensor(TensorId::edge(0, 1, 0, 0), 3));
        store.insert(identity_tensor(TensorId::readout(), 3));
        let x = Matrix::from_rows(vec![vec![0.3, -0.7, 1.2]]);
        let preds = forward(&space, &arch, &store, dims, &x).unwrap();
        for c in 0..3 {
            assert!((preds.at(0, c) - x.at(0, c).tanh()).abs() < 1e-15);
        }
    }

    // A dual node whose two slots are both zero ops outputs the zero
    // vector; with N=1 the whole cell output is zero.
    #[test]
    fn dual_zero_node_is_zero() {
        let space = SearchSpace::new(Family::Dual, 1, vec![OpKind::Tanh, OpKind::Zero], 1);
        let arch = Architecture {
            space_id: space.space_id(),
            cells: vec![vec![NodeDecision::Dual([(0, OpKind::Zero), (1, OpKind::Zero)])]],
        };
        let dims = NetDims { in_dim: 2, width: 2, out_dim: 1 };
        let mut rng = split_stream(0, "zero");
        let mut store = ParamStore::new();
        for slot in 0..2 {
            store.insert(
                crate::numcore::init_uniform(TensorId::stem(0, slot), 2, 2, 2, &mut rng).unwrap(),
            );
        }
        for slot in 0..2 {
            store.insert(
                crate::numcore::init_uniform(TensorId::edge(0, 1, slot, slot), 2, 2, 2, &mut rng)
                    .unwrap(),
            );
        }
        store.insert(crate::numcore::init_uniform(TensorId::readout(), 1, 2, 2, &mut rng).unwrap());
        let x = Matrix::from_rows(vec![vec![0.5, -0.25]]);
        let preds = forward(&space, &arch, &store, dims, &x).unwrap();
        assert_eq!(preds.at(0, 0), 0.0);
    }

    // Mean aggregation: two nodes producing the same vector leave the
    // cell output equal to that vector.
    #[test]
    fn mean_of_equal_nodes() {
        let space = SearchSpace::new(Family::Single, 2, vec![OpKind::Identity], 1);
        let arch = Architecture {
            space_id: space.space_id(),
            cells: vec![vec![
                NodeDecision::Single(0, OpKind::Identity),
                NodeDecision::Single(0, OpKind::Identity),
            ]],
        };
        let dims = NetDims { in_dim: 2, width: 2, out_dim: 2 };
        let mut store = ParamStore::new();
        store.insert(identity_tensor(TensorId::stem(0, 0), 2));
        store.insert(identity_tensor(TensorId::edge(0, 1, 0, 0), 2));
        store.insert(identity_tensor(TensorId::edge(0, 2, 0, 0), 2));
        store.insert(identity_tensor(TensorId::readout(), 2));
        let x = Matrix::from_rows(vec![vec![0.4, 0.9]]);
        let preds = forward(&space, &arch, &store, dims, &x).unwrap();
        for c in 0..2 {
            assert!((preds.at(0, c) - x.at(0, c).tanh()).abs() < 1e-15);
        }
    }

    #[test]
    fn mismatched_space_rejected() {
        let space = SearchSpace::single(2);
        let other = SearchSpace::single(3);
        let mut rng = split_stream(1, "mm");
        let arch = sample_architecture(&other, &mut rng).unwrap();
        let dims = NetDims { in_dim: 2, width: 2, out_dim: 1 };
        let store: ParamStore<f64> = ParamStore::new();
        let x = Matrix::from_rows(vec![vec![0.0, 0.0]]);
        assert!(forward(&space, &arch, &store, dims, &x).is_err());
    }

    #[test]
    fn cross_entropy_matches_uniform_baseline() {
        // equal logits -> loss = ln(#classes)
        let preds = Matrix::from_rows(vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        let y = Matrix::from_rows(vec![vec![0.0], vec![1.0]]);
        let (loss, dpred) = cross_entropy(&preds, &y);
        assert!((loss - 2f64.ln()).abs() < 1e-12);
        // gradient rows sum to zero
        for b in 0..2 {
            let s: f64 = dpred.row(b).iter().sum();
            assert!(s.abs() < 1e-12);
        }
    }
}
