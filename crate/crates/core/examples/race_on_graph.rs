//! Event-driven race on an explicit graph: compares the final blue count
//! with the half-edge chain on the same parameters.

use fpplab::race::race_on_configuration_model;
use fpplab::stats::{empirical_pmf, tv_distance};
use fpplab::{run_trials, ChainParams, HalfEdgeChain, SamplingMode};

fn main() {
    let (n, d, beta) = (40, 3, 1.5);
    let trials = 20_000;

    let graph: Vec<u64> = run_trials(1, trials, None, |_, _, rng| {
        race_on_configuration_model(n, d, 2, 1, beta, SamplingMode::Multigraph, rng).unwrap().b_bar as u64
    });
    let params = ChainParams::new(n as u64, d as u64, beta).unwrap();
    let chain: Vec<u64> = run_trials(2, trials, None, |_, _, rng| {
        HalfEdgeChain::init_uniform(params, 2, 1).unwrap().run_to_absorption(rng, None).0.b_bar
    });

    let mean = |v: &[u64]| v.iter().sum::<u64>() as f64 / v.len() as f64;
    println!("mean final blue: graph {:.3}, chain {:.3}", mean(&graph), mean(&chain));
    println!("TV = {:.4}", tv_distance(&empirical_pmf(&graph), &empirical_pmf(&chain)).unwrap());
}
