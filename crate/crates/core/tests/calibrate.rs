//! Calibration harness (ignored by default): measures where the
//! weight-sharing search's selections land in the oracle ranking, across
//! master seeds and meta-hyperparameter settings.

use nanonas::cellnet::{
    init_shared, select_final, train_shared, NetConfig, SelectConfig, StreamLabels, TrainConfig,
};
use nanonas::numcore::split_stream;
use nanonas::searchspace::SearchSpace;
use nanonas::tasks::{gen_teacher_regression, oracle_train_all, OracleProtocol, TaskSpec};

#[test]
#[ignore]
fn calibrate_ws_rank_quality() {
    let space = SearchSpace::single(2);
    let task = TaskSpec::default();
    let data = gen_teacher_regression::<f64>(&task).unwrap();

    let protocol = OracleProtocol {
        width: 24,
        epochs: 40,
        batch_size: 16,
        lr: 0.05,
        clip: 0.25,
        seed: 0,
    };
    let table = oracle_train_all(&space, &data, &protocol, 500).unwrap();
    println!("oracle spread:");
    for (i, (g, v, _)) in table.sorted_by_val().iter().enumerate() {
        if i < 5 || i >= 27 {
            println!("  rank {:2}: {v:.6}  {g}", i + 1);
        }
    }

    for (epochs, lr, clip, width) in [
        (30u32, 0.05, 0.25, 8usize),
        (40, 0.05, 0.25, 8),
        (50, 0.05, 0.25, 8),
        (30, 0.05, 0.25, 6),
        (30, 0.05, 0.25, 10),
        (40, 0.05, 0.25, 10),
        (30, 0.1, 0.25, 8),
        (40, 0.1, 0.25, 8),
    ] {
        let mut ranks = Vec::new();
        for seed in 0u64..10 {
            let labels = StreamLabels::scoped("stage1/t0");
            let mut weights = init_shared::<f64>(
                &space,
                NetConfig::proxy(width, 1),
                data.in_dim,
                &mut split_stream(seed, "stage1/t0/init"),
            )
            .unwrap();
            let cfg = TrainConfig { epochs, batch_size: 16, lr, clip, labels };
            train_shared(&mut weights, &data.train, data.loss, &cfg, seed).unwrap();
            let mut select_rng = split_stream(seed, "stage1/t0/select");
            let (_, audit) = select_final(
                &weights,
                &data.val,
                data.loss,
                16,
                &SelectConfig { num_archs: 64, ..Default::default() },
                &mut select_rng,
            )
            .unwrap();
            let rank = table.rank_of(&audit.winner).unwrap();
            ranks.push(rank);
        }
        let hits05 = ranks[..5].iter().filter(|&&r| r <= 8).count();
        let hits = ranks.iter().filter(|&&r| r <= 8).count();
        println!("epochs={epochs} lr={lr} clip={clip} width={width}: ranks {ranks:?} -> {hits05}/5 (seeds 0-4), {hits}/10 overall");
    }
}
