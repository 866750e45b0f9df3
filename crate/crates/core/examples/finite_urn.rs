//! The (2, 3) urn: exact absorption law on a small urn, then the K and L
//! monitors along one large run.

use fpplab::urn::{dp_urn_distribution, run_urn, FiniteUrnScheme, DEFAULT_DP_CAP};
use fpplab::trial_rng;

fn main() {
    let small = FiniteUrnScheme::new(2, 3, 6, 12).unwrap();
    let dist = dp_urn_distribution(&small, DEFAULT_DP_CAP).unwrap();
    println!("sigma law for S0 = 6, Z0 = 12:");
    for (n, p) in dist.sigma.iter().enumerate().filter(|(_, p)| **p > 0.0) {
        println!("  P(sigma = {n}) = {p:.5}");
    }
    println!("  P(never) = {:.5}", dist.sigma_never);

    let big = FiniteUrnScheme::new(2, 3, 100_000, 900_000).unwrap();
    let traj = run_urn(&big, 25_000, &mut trial_rng(4, 0));
    println!("\n{:>8} {:>8} {:>8} {:>7} {:>7}", "n", "S", "Z", "K", "L");
    for p in &traj.samples {
        println!(
            "{:>8} {:>8} {:>8} {:>7.4} {:>7.4}",
            p.n,
            p.s,
            p.z,
            big.k_monitor(p.n, p.z),
            big.l_monitor(p.n, p.s)
        );
    }
    println!("sigma = {:?}, absorbed after {} draws", traj.sigma, traj.absorbed_at);
}
