//! Samples uniform d-regular multigraphs, estimates how often they are
//! simple, and writes one simple graph as an edge list.

use fpplab::{sample_configuration_multigraph, trial_rng, SamplingMode};

fn main() {
    let mut rng = trial_rng(3, 0);
    for d in [3usize, 4, 5] {
        let trials = 4000;
        let simple = (0..trials)
            .filter(|_| sample_configuration_multigraph(2_000, d, &mut rng, SamplingMode::Multigraph).unwrap().is_simple())
            .count();
        let limit = ((1.0 - (d * d) as f64) / 4.0).exp();
        println!("d = {d}: simple {:.3}  (limit {limit:.3})", simple as f64 / trials as f64);
    }

    let g = sample_configuration_multigraph(10, 3, &mut rng, SamplingMode::simple()).unwrap();
    print!("{}", g.to_edge_list_string());
}
