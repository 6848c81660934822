//! Dense parameter tensors keyed by their place in a cell network, plus a
//! plain matrix type for batches and activations.

use super::{Real, Rng};
use crate::{Error, Result};
use std::fmt;

/// Where a parameter tensor sits in the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    Stem,
    Edge,
    Readout,
}

/// Structured tensor key. For stems, `slot` selects the input projection
/// (dual-input cells have two); for edges, `(cell, node, pred, slot)`
/// identify the connection. The readout uses the zero key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TensorId {
    pub role: Role,
    pub cell: usize,
    pub node: usize,
    pub pred: usize,
    pub slot: usize,
}

impl TensorId {
    pub fn stem(cell: usize, slot: usize) -> Self {
        TensorId { role: Role::Stem, cell, node: 0, pred: 0, slot }
    }

    pub fn edge(cell: usize, node: usize, pred: usize, slot: usize) -> Self {
        TensorId { role: Role::Edge, cell, node, pred, slot }
    }

    pub fn readout() -> Self {
        TensorId { role: Role::Readout, cell: 0, node: 0, pred: 0, slot: 0 }
    }
}

impl fmt::Display for TensorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.role {
            Role::Stem => write!(f, "stem[c{} s{}]", self.cell, self.slot),
            Role::Edge => write!(
                f,
                "edge[c{} n{} p{} s{}]",
                self.cell, self.node, self.pred, self.slot
            ),
            Role::Readout => write!(f, "readout"),
        }
    }
}

/// A dense `(rows, cols)` parameter tensor with a gradient buffer of the
/// same shape. The shape is immutable after creation.
#[derive(Debug, Clone)]
pub struct ParamTensor<R> {
    pub id: TensorId,
    rows: usize,
    cols: usize,
    values: Vec<R>,
    grad: Vec<R>,
}

impl<R: Real> ParamTensor<R> {
    pub fn zeros(id: TensorId, rows: usize, cols: usize) -> Self {
        ParamTensor {
            id,
            rows,
            cols,
            values: vec![R::zero(); rows * cols],
            grad: vec![R::zero(); rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, r: usize, c: usize) -> R {
        self.values[r * self.cols + c]
    }

    pub fn values(&self) -> &[R] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [R] {
        &mut self.values
    }

    pub fn grad(&self) -> &[R] {
        &self.grad
    }

    pub fn grad_mut(&mut self) -> &mut [R] {
        &mut self.grad
    }

    pub fn zero_grads(&mut self) {
        for g in &mut self.grad {
            *g = R::zero();
        }
    }
}

/// Fills a fresh tensor with iid uniform entries in
/// `(-1/sqrt(fan_in), +1/sqrt(fan_in))`, row-major order.
pub fn init_uniform<R: Real>(
    id: TensorId,
    rows: usize,
    cols: usize,
    fan_in: usize,
    rng: &mut Rng,
) -> Result<ParamTensor<R>> {
    if rows == 0 || cols == 0 {
        return Err(Error::Config(format!(
            "init_uniform: zero-sized shape ({rows}, {cols})"
        )));
    }
    if fan_in == 0 {
        return Err(Error::Config("init_uniform: fan_in must be >= 1".into()));
    }
    let bound = R::one() / R::from_f64_lossy(fan_in as f64).sqrt();
    let mut t = ParamTensor::zeros(id, rows, cols);
    for v in t.values_mut() {
        let u: R = rng.open_unit();
        *v = (u + u - R::one()) * bound;
    }
    Ok(t)
}

/// Ordered collection of parameter tensors. Insertion order is the
/// documented deterministic allocation order; lookups go through a sorted
/// index so iteration and access never depend on hash state.
#[derive(Debug, Clone, Default)]
pub struct ParamStore<R> {
    tensors: Vec<ParamTensor<R>>,
    index: std::collections::BTreeMap<TensorId, usize>,
}

impl<R: Real> ParamStore<R> {
    pub fn new() -> Self {
        ParamStore { tensors: Vec::new(), index: std::collections::BTreeMap::new() }
    }

    pub fn insert(&mut self, tensor: ParamTensor<R>) {
        assert!(
            !self.index.contains_key(&tensor.id),
            "duplicate tensor id {}",
            tensor.id
        );
        self.index.insert(tensor.id, self.tensors.len());
        self.tensors.push(tensor);
    }

    pub fn contains(&self, id: TensorId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn get(&self, id: TensorId) -> &ParamTensor<R> {
        &self.tensors[*self.index.get(&id).unwrap_or_else(|| panic!("missing tensor {id}"))]
    }

    pub fn get_mut(&mut self, id: TensorId) -> &mut ParamTensor<R> {
        let i = *self.index.get(&id).unwrap_or_else(|| panic!("missing tensor {id}"));
        &mut self.tensors[i]
    }

    /// Tensors in allocation order.
    pub fn iter(&self) -> impl Iterator<Item = &ParamTensor<R>> {
        self.tensors.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = &mut ParamTensor<R>> {
        self.tensors.iter_mut()
    }

    pub fn ids(&self) -> Vec<TensorId> {
        self.tensors.iter().map(|t| t.id).collect()
    }

    pub fn num_tensors(&self) -> usize {
        self.tensors.len()
    }

    /// Total parameter count over all tensors.
    pub fn num_params(&self) -> usize {
        self.tensors.iter().map(|t| t.len()).sum()
    }

    pub fn zero_all_grads(&mut self) {
        for t in &mut self.tensors {
            t.zero_grads();
        }
    }
}

/// Dense row-major matrix for data batches and activations.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<R>,
}

impl<R: Real> Matrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![R::zero(); rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<R>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row);
        }
        Matrix { rows: r, cols: c, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[R] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [R] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn at(&self, r: usize, c: usize) -> R {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: R) {
        self.data[r * self.cols + c] = v;
    }

    pub fn data(&self) -> &[R] {
        &self.data
    }

    /// Copies the given sample rows into a new matrix, in index order.
    pub fn gather(&self, indices: &[usize]) -> Matrix<R> {
        let mut out = Matrix::zeros(indices.len(), self.cols);
        for (k, &i) in indices.iter().enumerate() {
            out.row_mut(k).copy_from_slice(self.row(i));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::split_stream;

    #[test]
    fn init_uniform_bounds_fan_in_one() {
        let mut rng = split_stream(0, "init-b");
        let t: ParamTensor<f64> =
            init_uniform(TensorId::readout(), 20, 20, 1, &mut rng).unwrap();
        for &v in t.values() {
            assert!(v > -1.0 && v < 1.0);
        }
    }

    // CLT bound: mean of n iid uniform(-b, b) entries is within
    // 4 * b/sqrt(3n) of zero.
    #[test]
    fn init_uniform_mean_near_zero() {
        let mut rng = split_stream(1, "init-mean");
        let t: ParamTensor<f64> =
            init_uniform(TensorId::readout(), 100, 100, 4, &mut rng).unwrap();
        let n = t.len() as f64;
        let b = 0.5;
        let mean: f64 = t.values().iter().sum::<f64>() / n;
        assert!(mean.abs() < 4.0 * b / (3.0 * n).sqrt(), "mean {mean}");
    }

    #[test]
    fn init_uniform_deterministic() {
        let mut a = split_stream(9, "det");
        let mut b = split_stream(9, "det");
        let ta: ParamTensor<f64> = init_uniform(TensorId::readout(), 3, 5, 2, &mut a).unwrap();
        let tb: ParamTensor<f64> = init_uniform(TensorId::readout(), 3, 5, 2, &mut b).unwrap();
        assert_eq!(ta.values(), tb.values());
    }

    #[test]
    fn init_uniform_rejects_empty() {
        let mut rng = split_stream(0, "bad");
        assert!(init_uniform::<f64>(TensorId::readout(), 0, 3, 1, &mut rng).is_err());
    }

    #[test]
    fn store_orders_by_insertion() {
        let mut store: ParamStore<f64> = ParamStore::new();
        store.insert(ParamTensor::zeros(TensorId::readout(), 1, 2));
        store.insert(ParamTensor::zeros(TensorId::stem(0, 0), 2, 2));
        let ids = store.ids();
        assert_eq!(ids[0], TensorId::readout());
        assert_eq!(ids[1], TensorId::stem(0, 0));
        assert_eq!(store.num_params(), 6);
    }
}
