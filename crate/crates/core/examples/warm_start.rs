//! Blue grows alone to B0 vertices; then one red seed appears. Prints how
//! many blue half-edges are active at the switch and how red fares.

use fpplab::chain::ChainError;
use fpplab::stats::median;
use fpplab::{run_trials, ChainParams, HalfEdgeChain};

fn main() {
    let n = 100_000;
    let b0 = 316;
    let params = ChainParams::new(n, 3, 1.5).unwrap();

    let runs: Vec<Option<(u64, u64)>> = run_trials(7, 200, None, |_, _, rng| {
        match HalfEdgeChain::warmup_blue(params, 1, b0, 1, rng) {
            Ok(mut c) => {
                let active = c.state().blue;
                Some((active, c.run_to_absorption(rng, None).0.r_bar))
            }
            Err(ChainError::WarmupDied { .. }) => None,
            Err(e) => panic!("{e}"),
        }
    });
    let ok: Vec<(u64, u64)> = runs.iter().flatten().copied().collect();
    let active: Vec<f64> = ok.iter().map(|r| r.0 as f64).collect();
    let red: Vec<f64> = ok.iter().map(|r| r.1 as f64).collect();

    println!("warm-ups that survived: {} / {}", ok.len(), runs.len());
    println!("mean active blue half-edges: {:.1} (B0 = {b0})", active.iter().sum::<f64>() / active.len() as f64);
    println!("median final red: {}", median(&red));
}
