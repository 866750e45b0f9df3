//! Runs the half-edge chain on a random 3-regular graph and prints the final
//! coloring together with a few samples of the conserved quantity K.

use fpplab::{trial_rng, ChainParams, HalfEdgeChain, KMonitorConfig};

fn main() {
    let params = ChainParams::new(200_000, 3, 2.0).expect("valid parameters");
    let mut chain = HalfEdgeChain::init_uniform(params, 500, 500).expect("seeds fit");
    let mut rng = trial_rng(1, 0);

    let cfg = KMonitorConfig::for_total(params.half_edges());
    let (fin, monitor) = chain.run_to_absorption(&mut rng, Some(&cfg));
    let monitor = monitor.unwrap();

    println!("B = {}  R = {}  steps = {}", fin.b_bar, fin.r_bar, fin.steps);
    println!("K_0 = {:.4e}", monitor.k0);
    let every = (monitor.series.len() / 8).max(1);
    for (n, k) in monitor.series.iter().step_by(every) {
        println!("  n = {n:>7}  K_n / K_0 = {:.4}", k / monitor.k0);
    }
}
