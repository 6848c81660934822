//! Global-norm gradient clipping, plain SGD, and the central-difference
//! gradient checker used as a correctness oracle.

use super::{ParamStore, Real, Rng, TensorId};
use crate::{Error, Result};

/// Rescales the gradients of `ids` so their joint L2 norm is at most
/// `max_norm`. Returns the scale applied (1 when untouched).
///
/// Norms within summation rounding error of `max_norm` count as already
/// clipped; this keeps clipping bitwise idempotent.
pub fn clip_global_norm<R: Real>(
    store: &mut ParamStore<R>,
    ids: &[TensorId],
    max_norm: R,
) -> Result<R> {
    let mut sum_sq = R::zero();
    let mut count = 0usize;
    for &id in ids {
        for &g in store.get(id).grad() {
            if !g.is_finite() {
                return Err(Error::non_finite("gradient", format!("{id}")));
            }
            sum_sq += g * g;
            count += 1;
        }
    }
    let norm = sum_sq.sqrt();
    let tolerance = R::epsilon() * R::from_f64_lossy(count as f64 + 8.0);
    if norm <= max_norm * (R::one() + tolerance) {
        return Ok(R::one());
    }
    let scale = max_norm / norm;
    for &id in ids {
        for g in store.get_mut(id).grad_mut() {
            *g *= scale;
        }
    }
    Ok(scale)
}

/// One SGD step over `ids`: `value -= lr * grad`, then gradients zeroed.
pub fn sgd_step<R: Real>(store: &mut ParamStore<R>, ids: &[TensorId], lr: R) {
    for &id in ids {
        let t = store.get_mut(id);
        let n = t.len();
        for i in 0..n {
            let g = t.grad()[i];
            t.values_mut()[i] = t.values_mut()[i] - lr * g;
        }
        t.zero_grads();
    }
}

/// Compares the analytic gradients stored in `store` (filled by the
/// caller) against central differences of `loss_fn` at `eps`, over at
/// least 50 coordinates sampled from the tensors in `ids`. Returns the
/// maximum of `|analytic - numeric| / max(1e-8, |numeric|)`.
pub fn finite_diff_check<R: Real>(
    store: &mut ParamStore<R>,
    ids: &[TensorId],
    loss_fn: &mut dyn FnMut(&ParamStore<R>) -> Result<R>,
    eps: R,
    rng: &mut Rng,
) -> Result<f64> {
    assert!(eps > R::zero(), "eps must be positive");
    let coords: Vec<(TensorId, usize)> = ids
        .iter()
        .flat_map(|&id| (0..store.get(id).len()).map(move |i| (id, i)))
        .collect();
    if coords.is_empty() {
        return Err(Error::Config("finite_diff_check: no coordinates".into()));
    }
    // All coordinates when the net is small, otherwise >= 50 sampled.
    let picks: Vec<(TensorId, usize)> = if coords.len() <= 64 {
        coords
    } else {
        (0..64)
            .map(|_| {
                let k = rng.uniform_int(coords.len() as u64).expect("nonzero") as usize;
                coords[k]
            })
            .collect()
    };

    let mut max_rel = 0.0f64;
    for (id, i) in picks {
        let analytic = store.get(id).grad()[i].to_f64().expect("finite grad");
        let original = store.get(id).values()[i];

        store.get_mut(id).values_mut()[i] = original + eps;
        let plus = loss_fn(store)?;
        store.get_mut(id).values_mut()[i] = original - eps;
        let minus = loss_fn(store)?;
        store.get_mut(id).values_mut()[i] = original;

        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::non_finite("loss", "finite_diff_check"));
        }
        let numeric = ((plus - minus) / (eps + eps)).to_f64().expect("finite");
        let rel = (analytic - numeric).abs() / numeric.abs().max(1e-8);
        if rel > max_rel {
            max_rel = rel;
        }
    }
    Ok(max_rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numcore::{split_stream, ParamTensor};

    fn single_tensor_store(values: &[f64], grads: &[f64]) -> (ParamStore<f64>, Vec<TensorId>) {
        let id = TensorId::readout();
        let mut t = ParamTensor::zeros(id, 1, values.len());
        t.values_mut().copy_from_slice(values);
        t.grad_mut().copy_from_slice(grads);
        let mut store = ParamStore::new();
        store.insert(t);
        (store, vec![id])
    }

    #[test]
    fn clip_untouched_below_max() {
        let (mut store, ids) = single_tensor_store(&[0.0, 0.0], &[3.0, 4.0]);
        let scale = clip_global_norm(&mut store, &ids, 10.0).unwrap();
        assert_eq!(scale, 1.0);
        assert_eq!(store.get(ids[0]).grad(), &[3.0, 4.0]);
    }

    #[test]
    fn clip_rescales_to_max() {
        let (mut store, ids) = single_tensor_store(&[0.0, 0.0], &[3.0, 4.0]);
        let scale = clip_global_norm(&mut store, &ids, 1.0).unwrap();
        assert!((scale - 0.2).abs() < 1e-15);
        let g = store.get(ids[0]).grad();
        assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn clip_is_idempotent() {
        let (mut store, ids) = single_tensor_store(&[0.0; 3], &[1.0, -2.0, 2.5]);
        clip_global_norm(&mut store, &ids, 0.7).unwrap();
        let once: Vec<f64> = store.get(ids[0]).grad().to_vec();
        clip_global_norm(&mut store, &ids, 0.7).unwrap();
        // Bitwise equal: norm after the first clip is <= max_norm.
        assert_eq!(once, store.get(ids[0]).grad());
    }

    #[test]
    fn clip_rejects_non_finite() {
        let (mut store, ids) = single_tensor_store(&[0.0], &[f64::NAN]);
        assert!(clip_global_norm(&mut store, &ids, 1.0).is_err());
    }

    #[test]
    fn sgd_basic_step() {
        let (mut store, ids) = single_tensor_store(&[1.0, 5.0], &[2.0, 0.0]);
        sgd_step(&mut store, &ids, 0.1);
        let v = store.get(ids[0]).values();
        assert!((v[0] - 0.8).abs() < 1e-15);
        assert_eq!(v[1], 5.0); // zero grad leaves the value unchanged
        assert_eq!(store.get(ids[0]).grad(), &[0.0, 0.0]);
    }

    #[test]
    fn sgd_zero_lr_is_identity() {
        let (mut store, ids) = single_tensor_store(&[1.25, -0.5], &[3.0, -1.0]);
        sgd_step(&mut store, &ids, 0.0);
        assert_eq!(store.get(ids[0]).values(), &[1.25, -0.5]);
    }

    #[test]
    fn finite_diff_quadratic() {
        // loss = theta^2 at theta = 3: analytic gradient 6.
        let (mut store, ids) = single_tensor_store(&[3.0], &[6.0]);
        let mut rng = split_stream(0, "fd");
        let err = finite_diff_check(
            &mut store,
            &ids,
            &mut |s: &ParamStore<f64>| {
                let v = s.get(TensorId::readout()).values()[0];
                Ok(v * v)
            },
            1e-5,
            &mut rng,
        )
        .unwrap();
        assert!(err < 1e-10, "rel err {err}");
    }
}
