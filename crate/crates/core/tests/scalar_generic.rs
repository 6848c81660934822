//! The numeric core is generic over the scalar type: instantiate the
//! supernet and a training step at f32 alongside the default f64.

use nanonas::cellnet::{
    init_shared, train_shared, LossKind, NetConfig, Split, StreamLabels, TrainConfig,
};
use nanonas::numcore::{split_stream, Matrix};
use nanonas::searchspace::SearchSpace;

fn toy_split<R: nanonas::numcore::Real>(n: usize) -> Split<R> {
    let mut rng = split_stream(8, "f32-smoke");
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for _ in 0..n {
        let a: R = rng.unit();
        let b: R = rng.unit();
        xs.push(vec![a, b]);
        ys.push(vec![a * b]);
    }
    Split { x: Matrix::from_rows(xs), y: Matrix::from_rows(ys) }
}

#[test]
fn f32_network_trains() {
    let space = SearchSpace::single(2);
    let split: Split<f32> = toy_split(64);
    let mut weights =
        init_shared::<f32>(&space, NetConfig::proxy(4, 1), 2, &mut split_stream(1, "init"))
            .unwrap();
    let cfg = TrainConfig {
        epochs: 2,
        batch_size: 8,
        lr: 0.05,
        clip: 1.0,
        labels: StreamLabels::default(),
    };
    let log = train_shared(&mut weights, &split, LossKind::SquaredError, &cfg, 1).unwrap();
    assert_eq!(log.iterations, 16);
    assert!(log.epoch_losses.iter().all(|l| l.is_finite()));
}

#[test]
fn f32_and_f64_agree_loosely() {
    let space = SearchSpace::single(2);
    let run = |_: ()| {
        let split: Split<f64> = toy_split(64);
        let mut weights =
            init_shared::<f64>(&space, NetConfig::proxy(4, 1), 2, &mut split_stream(1, "init"))
                .unwrap();
        let cfg = TrainConfig {
            epochs: 2,
            batch_size: 8,
            lr: 0.05,
            clip: 1.0,
            labels: StreamLabels::default(),
        };
        train_shared(&mut weights, &split, LossKind::SquaredError, &cfg, 1).unwrap()
    };
    let log64 = run(());
    let split32: Split<f32> = toy_split(64);
    let mut weights32 =
        init_shared::<f32>(&space, NetConfig::proxy(4, 1), 2, &mut split_stream(1, "init"))
            .unwrap();
    let cfg = TrainConfig {
        epochs: 2,
        batch_size: 8,
        lr: 0.05,
        clip: 1.0,
        labels: StreamLabels::default(),
    };
    let log32 = train_shared(&mut weights32, &split32, LossKind::SquaredError, &cfg, 1).unwrap();
    // same trajectory up to single-precision error
    for (a, b) in log64.epoch_losses.iter().zip(log32.epoch_losses.iter()) {
        assert!((a - b).abs() < 1e-3, "f64 {a} vs f32 {b}");
    }
}
