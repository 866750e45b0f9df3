//! A small resumable sweep over N through the cli layer, followed by a
//! log-log fit of the median loser count.

use fpplab::cli::{execute, ExperimentConfig, ExperimentKind};

fn main() {
    let dir = std::env::temp_dir().join("fpplab_exponent_sweep");
    let sweep = ExperimentConfig {
        kind: Some(ExperimentKind::Sweep),
        sweep_kind: Some(ExperimentKind::RrgChain),
        seed: Some(42),
        trials: 100,
        n_grid: Some("4096:65536:x2".into()),
        beta: 2.0,
        b0: Some(1),
        r0: Some(1),
        out: Some(dir.clone()),
        ..Default::default()
    };
    let art = execute(&sweep).expect("sweep runs");
    print!("{}", art.csv.unwrap());
    println!("{}", art.json);
    println!("shards in {}", dir.display());
}
