//! Property tests: genotype round-trips, enumeration/count consistency,
//! dual-pair canonicalization, and optimizer invariants.

use nanonas::numcore::{
    clip_global_norm, split_stream, ParamStore, ParamTensor, TensorId,
};
use nanonas::searchspace::{
    canonical_pair, count_architectures, enumerate_architectures, parse_genotype,
    sample_architecture, serialize_genotype, Family, OpKind, SearchSpace,
};
use num_bigint::BigUint;
use proptest::prelude::*;

fn op_pool() -> Vec<OpKind> {
    vec![OpKind::Tanh, OpKind::Relu, OpKind::Sigmoid, OpKind::Identity, OpKind::Zero]
}

fn arb_space() -> impl Strategy<Value = SearchSpace> {
    (any::<bool>(), 1usize..=4, 1usize..=4, any::<bool>()).prop_map(
        |(dual, num_nodes, num_ops, two_cells)| {
            let pool = op_pool();
            if dual {
                let ops = pool[..num_ops.max(1)].to_vec();
                SearchSpace::new(Family::Dual, num_nodes, ops, if two_cells { 2 } else { 1 })
            } else {
                // single-input spaces exclude the zero op
                let ops = pool[..num_ops.min(4)].to_vec();
                SearchSpace::new(Family::Single, num_nodes, ops, 1)
            }
        },
    )
}

proptest! {
    // serialize . parse is the identity on sampled genotypes, and the
    // canonical text is byte-stable.
    #[test]
    fn genotype_round_trip(space in arb_space(), seed in 0u64..1_000) {
        let mut rng = split_stream(seed, "prop/sample");
        let arch = sample_architecture(&space, &mut rng).unwrap();
        let text = serialize_genotype(&space, &arch).unwrap();
        let (space2, arch2) = parse_genotype(&text).unwrap();
        prop_assert_eq!(&space2, &space);
        prop_assert_eq!(&arch2, &arch);
        prop_assert_eq!(serialize_genotype(&space2, &arch2).unwrap(), text);
    }

    // |enumerate| = count for every space small enough to enumerate.
    #[test]
    fn enumerate_matches_count(space in arb_space()) {
        let count = count_architectures(&space).unwrap();
        prop_assume!(count <= BigUint::from(4_000u32));
        let archs = enumerate_architectures(&space, 4_000).unwrap();
        prop_assert_eq!(BigUint::from(archs.len()), count);
    }

    // identical rng state implies identical serialized architecture
    #[test]
    fn sampling_deterministic(space in arb_space(), seed in 0u64..1_000) {
        let a = sample_architecture(&space, &mut split_stream(seed, "prop/det")).unwrap();
        let b = sample_architecture(&space, &mut split_stream(seed, "prop/det")).unwrap();
        prop_assert_eq!(
            serialize_genotype(&space, &a).unwrap(),
            serialize_genotype(&space, &b).unwrap()
        );
    }

    // pair order never matters after canonicalization
    #[test]
    fn dual_pairs_canonicalize(pred_a in 0usize..4, op_a in 0usize..5, pred_b in 0usize..4, op_b in 0usize..5) {
        let space = SearchSpace::new(Family::Dual, 3, op_pool(), 1);
        let a = (pred_a, op_pool()[op_a]);
        let b = (pred_b, op_pool()[op_b]);
        prop_assert_eq!(canonical_pair(&space, a, b), canonical_pair(&space, b, a));
    }

    // clipping twice equals clipping once, bitwise
    #[test]
    fn clip_idempotent(grads in proptest::collection::vec(-10.0f64..10.0, 1..32), max_norm in 0.01f64..5.0) {
        let id = TensorId::readout();
        let mut t = ParamTensor::zeros(id, 1, grads.len());
        t.grad_mut().copy_from_slice(&grads);
        let mut store = ParamStore::new();
        store.insert(t);
        let ids = vec![id];
        clip_global_norm(&mut store, &ids, max_norm).unwrap();
        let once: Vec<u64> = store.get(id).grad().iter().map(|g| g.to_bits()).collect();
        clip_global_norm(&mut store, &ids, max_norm).unwrap();
        let twice: Vec<u64> = store.get(id).grad().iter().map(|g| g.to_bits()).collect();
        prop_assert_eq!(once, twice);
    }
}
