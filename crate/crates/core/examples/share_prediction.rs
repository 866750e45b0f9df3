//! Predicted red share for a few rate ratios, with the exponent regimes for
//! polynomial seed sizes.

use fpplab::theory::{predict_exponents, predict_share, BoundConstants, ExponentCase, QuadratureConfig};

fn main() {
    let (n, d) = (1_000_000u64, 3u64);
    let m = n * d;
    let (b0, r0) = (3982u64, 3982u64);
    let q = QuadratureConfig::default();
    for beta in [0.5, 0.8, 1.0, 1.25, 2.0] {
        let p = predict_share(beta, d * b0, d * r0, m - d * (b0 + r0), m, d, &q, BoundConstants::default()).unwrap();
        println!("beta = {beta:<5} red share {:.4}  bounds ({:.3e}, {:.3e})", p.share_ratio, p.bounds.0, p.bounds.1);
    }

    for (alpha1, alpha2, beta) in [(0.3, 0.6, 1.0), (0.5, 0.5, 2.0), (0.2, 0.9, 1.5)] {
        let v = predict_exponents(ExponentCase::BothPolynomial { alpha1, alpha2 }, beta).unwrap();
        println!("alpha1 = {alpha1}, alpha2 = {alpha2}, beta = {beta}: {v:?}");
    }
    for beta in [0.5, 2.0] {
        println!("constant seeds, beta = {beta}: {:?}", predict_exponents(ExponentCase::BothConstant, beta).unwrap());
    }
}
