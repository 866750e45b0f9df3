//! On the torus a slower red seed placed late still ends with a positive
//! fraction of the vertices.

use fpplab::{run_trials, simulate_torus_experiment};

fn main() {
    let side = 100;
    for beta in [1.2, 1.5, 2.0] {
        let shares: Vec<f64> = run_trials(9, 10, None, |_, _, rng| {
            let r = simulate_torus_experiment(side, 2, 0.05, beta, rng).unwrap();
            r.r_bar as f64 / (side * side) as f64
        });
        let min = shares.iter().copied().fold(f64::INFINITY, f64::min);
        println!("beta = {beta}: red share min {min:.4}, mean {:.4}", shares.iter().sum::<f64>() / 10.0);
    }
}
