use keyattr::conformance::replay_fitness;
use keyattr::discovery::{mine_inductive, tree_to_net, MinerParams, TraceLog};
use keyattr::synthgen::{generate_log, SynthConfig};
use keyattr::{build_traces, parse_timestamp_column};

fn exact() -> MinerParams {
    MinerParams {
        im_noise_threshold: 0.0,
        ..Default::default()
    }
}

#[test]
fn im_rediscovers_playouts_of_random_trees() {
    for seed in 0..50 {
        let generated = generate_log(&SynthConfig {
            seed,
            n_cases: 40,
            tree_depth: 3,
            n_distractors: 0,
            ..Default::default()
        });
        let log = &generated.log;
        let labels = &generated.labels;
        let ts = parse_timestamp_column(&log.column(&labels.timestamp).unwrap().cells);
        let traces = build_traces(log, &labels.case, &labels.activity, &ts).unwrap();
        let tree = mine_inductive(&traces, &exact()).unwrap();
        let fitness = replay_fitness(&tree_to_net(&tree), &traces).unwrap();
        assert!(
            (fitness - 1.0).abs() < 1e-9,
            "seed {seed}: {fitness} for {tree} (source {})",
            generated.tree
        );
    }
}

#[test]
fn im_fits_arbitrary_small_logs() {
    let logs: Vec<Vec<Vec<&str>>> = vec![
        vec![vec!["a", "b", "a", "c"], vec!["c", "a"], vec!["b"]],
        vec![vec!["a", "a", "a"], vec!["b", "a"]],
        vec![vec!["x", "y", "z", "x", "y", "z"], vec!["z", "y", "x"]],
    ];
    for traces in logs {
        let traces = TraceLog::from_traces(&traces);
        let tree = mine_inductive(&traces, &exact()).unwrap();
        let fitness = replay_fitness(&tree_to_net(&tree), &traces).unwrap();
        assert!((fitness - 1.0).abs() < 1e-9, "{tree}: {fitness}");
    }
}
