//! Diagonal urns: the Beta limit when both colors reinforce at the same rate,
//! and the mixed-Gamma limit when they do not.

use fpplab::stats::{beta_cdf, ks_statistic};
use fpplab::urn::{diag_urn_run, janson_sublinear_check, DiagUrnScheme};
use fpplab::{run_trials, trial_rng};

fn main() {
    let scheme = DiagUrnScheme::janson(1.0, 1.0, 2.0, 3.0);
    let fractions: Vec<f64> =
        run_trials(5, 4000, None, |_, _, rng| diag_urn_run(&scheme, 5000, rng).unwrap().s_fraction());
    let ks = ks_statistic(&fractions, |x| beta_cdf(2.0, 3.0, x).unwrap()).unwrap();
    println!("alpha = delta: KS vs Beta(2, 3) = {ks:.4}");

    let sub = janson_sublinear_check(1.0, 3.0, 1.0, 1.0, 5000, 4000, &mut trial_rng(6, 0)).unwrap();
    println!("alpha < delta: two-sample KS = {:.4}", sub.ks_distance);
    for (p, e, r) in &sub.quantiles {
        println!("  q{p:<4} empirical {e:.4}  limit {r:.4}");
    }
}
