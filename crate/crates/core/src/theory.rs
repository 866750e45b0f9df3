//! Closed-form predictions: `φ_β` and its inverse, final share formulas and
//! bounds, exponent verdicts, the urn mean curve and `n₀`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("beta = 1 has no phi branch")]
    WrongBranch,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("bisection did not converge; bracket [{lo}, {hi}]")]
    NoConvergence { lo: f64, hi: f64 },
    #[error("quadrature did not reach tolerance on [{a}, {b}] within depth {depth}")]
    Quadrature { a: f64, b: f64, depth: u32 },
}

fn check_phi_beta(beta: f64) -> Result<(), TheoryError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(TheoryError::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    if beta == 1.0 {
        return Err(TheoryError::WrongBranch);
    }
    Ok(())
}

fn ln_phi(beta: f64, t: f64) -> f64 {
    (1.0 / (beta - 1.0)) * (-t).ln_1p() - (beta / (beta - 1.0)) * t.ln()
}

/// `φ_β(t) = (1 - t)^(1/(β-1)) / t^(β/(β-1))`.
pub fn phi(beta: f64, t: f64) -> Result<f64, TheoryError> {
    check_phi_beta(beta)?;
    if !(t > 0.0 && t < 1.0) {
        return Err(TheoryError::InvalidInput(format!("t must lie in (0, 1), got {t}")));
    }
    Ok(ln_phi(beta, t).exp())
}

const MAX_BISECTION: usize = 4000;
const LOGIT_RANGE: f64 = 745.0;

fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Solves `φ_β(t) = s` by bisection in logit coordinates, stopping once
/// `|φ_β(t) / s - 1| <= tol` or the bracket reaches machine resolution.
/// `s = 0` returns the limiting endpoint: 1 for `β > 1` and 0 for `β < 1`.
pub fn phi_inverse(beta: f64, s: f64, tol: f64) -> Result<f64, TheoryError> {
    check_phi_beta(beta)?;
    if !(s >= 0.0) || !s.is_finite() {
        return Err(TheoryError::InvalidInput(format!("s must be finite and non-negative, got {s}")));
    }
    if s == 0.0 {
        return Ok(if beta > 1.0 { 1.0 } else { 0.0 });
    }
    let target = s.ln();
    let decreasing = beta > 1.0;
    // f(x) > 0 means the root lies to the right of x.
    let f = |x: f64| {
        let t = logistic(x);
        let v = ln_phi(beta, t) - target;
        if decreasing {
            v
        } else {
            -v
        }
    };
    let (mut lo, mut hi) = (-LOGIT_RANGE, LOGIT_RANGE);
    if f(lo) < 0.0 || f(hi) > 0.0 {
        return Err(TheoryError::NoConvergence { lo: logistic(lo), hi: logistic(hi) });
    }
    for _ in 0..MAX_BISECTION {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v.abs().exp_m1() <= tol {
            return Ok(logistic(mid));
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * mid.abs().max(1.0) {
            return Ok(logistic(0.5 * (lo + hi)));
        }
    }
    Err(TheoryError::NoConvergence { lo: logistic(lo), hi: logistic(hi) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-8, rel_tol: 1e-6, max_depth: 50 }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<(), TheoryError> {
        if self.abs_tol > 0.0 && self.rel_tol > 0.0 {
            Ok(())
        } else {
            Err(TheoryError::InvalidInput("quadrature tolerances must be positive".into()))
        }
    }

    pub fn halved(&self) -> Self {
        Self { abs_tol: self.abs_tol / 2.0, rel_tol: self.rel_tol / 2.0, ..*self }
    }
}

const INITIAL_PANELS: usize = 16;

/// Adaptive Simpson on `[a, b]`.
pub fn integrate<F>(f: F, a: f64, b: f64, quad: &QuadratureConfig) -> Result<f64, TheoryError>
where
    F: Fn(f64) -> Result<f64, TheoryError>,
{
    quad.validate()?;
    let h = (b - a) / INITIAL_PANELS as f64;
    let mut panels = Vec::with_capacity(INITIAL_PANELS);
    let mut rough = 0.0;
    for i in 0..INITIAL_PANELS {
        let x0 = a + h * i as f64;
        let x1 = if i + 1 == INITIAL_PANELS { b } else { x0 + h };
        let (f0, f1) = (f(x0)?, f(x1)?);
        let fm = f(0.5 * (x0 + x1))?;
        let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
        rough += whole;
        panels.push((x0, x1, f0, fm, f1, whole));
    }
    let eps = quad.abs_tol.max(quad.rel_tol * rough.abs()) / INITIAL_PANELS as f64;
    let mut total = 0.0;
    for (x0, x1, f0, fm, f1, whole) in panels {
        total += simpson_rec(&f, x0, x1, f0, fm, f1, whole, eps, quad.max_depth)?;
    }
    Ok(total)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> Result<f64, TheoryError>
where
    F: Fn(f64) -> Result<f64, TheoryError>,
{
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm)?, f(rm)?);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(TheoryError::Quadrature { a, b, depth: 0 });
    }
    Ok(simpson_rec(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)?
        + simpson_rec(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    BlueMinority { exponent: f64 },
    RedMinority { exponent: f64 },
    Boundary { exponent: f64 },
}

impl Verdict {
    pub fn exponent(&self) -> f64 {
        match *self {
            Verdict::BlueMinority { exponent } | Verdict::RedMinority { exponent } | Verdict::Boundary { exponent } => {
                exponent
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    /// Predicted `(R̄ - R_0) / (N - R_0 - B_0)`.
    pub share_ratio: f64,
    pub bounds: (f64, f64),
    pub verdict: Option<Verdict>,
}

/// Constants `(c, C)` for [`eq4_bounds`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub c: f64,
    pub big_c: f64,
}

impl Default for BoundConstants {
    fn default() -> Self {
        Self { c: 0.1, big_c: 10.0 }
    }
}

/// `(c v ∧ c, C v ∧ 1)` with `v = (Y_0 / M) (M / X_0)^(1/β)`.
pub fn eq4_bounds(beta: f64, x0: f64, y0: f64, m: f64, c: f64, big_c: f64) -> (f64, f64) {
    let v = ((y0 / m).ln() + (m / x0).ln() / beta).exp();
    ((c * v).min(c), (big_c * v).min(1.0))
}

fn check_share_inputs(beta: f64, x0: u64, y0: u64, z0: u64, m: u64, d: u64) -> Result<(), TheoryError> {
    if x0 == 0 || y0 == 0 {
        return Err(TheoryError::InvalidInput("X0 and Y0 must be at least 1".into()));
    }
    if x0 + y0 + z0 != m {
        return Err(TheoryError::InvalidInput(format!("M = {m} differs from X0 + Y0 + Z0 = {}", x0 + y0 + z0)));
    }
    if d < 2 {
        return Err(TheoryError::InvalidInput("degree must be at least 2".into()));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(TheoryError::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}

/// `∫₀¹ g(φ_β⁻¹(M K_0^(1/(β-1)) (t^(1/d) - (Z_0/M) t^((d-1)/d)))) dt`, taken
/// after substituting `t = u^d`, which removes the branch point at 0.
#[allow(clippy::too_many_arguments)]
fn share_integral<G: Fn(f64) -> f64>(
    beta: f64,
    x0: u64,
    y0: u64,
    z0: u64,
    m: u64,
    d: u64,
    quad: &QuadratureConfig,
    g: G,
) -> Result<f64, TheoryError> {
    check_phi_beta(beta)?;
    let ln_k0 = (x0 as f64).ln() - beta * (y0 as f64).ln();
    let ln_scale = (m as f64).ln() + ln_k0 / (beta - 1.0);
    let zr = z0 as f64 / m as f64;
    let df = d as f64;
    let tol = (quad.abs_tol * 1e-3).max(1e-15);
    let integrand = |u: f64| -> Result<f64, TheoryError> {
        if u <= 0.0 {
            return Ok(0.0);
        }
        let inner = u * (1.0 - zr * u.powi(d as i32 - 2));
        let s = if inner > 0.0 { (ln_scale + inner.ln()).exp() } else { 0.0 };
        Ok(df * u.powi(d as i32 - 1) * g(phi_inverse(beta, s, tol)?))
    };
    Ok(integrate(integrand, 0.0, 1.0, quad)?.clamp(0.0, 1.0))
}

/// Time average of the red fraction `Y/(X+Y)` of colored half-edges along
/// the deterministic trajectory, weighted by the uncolored fraction `t`.
///
/// This is the integral of `φ_β⁻¹` alone. It is not the final red share for
/// `β ≠ 1`: a capture is red with probability `Y/(βX+Y)`, not `Y/(X+Y)`. See
/// [`predict_share`].
pub fn half_edge_share_integral(
    beta: f64,
    x0: u64,
    y0: u64,
    z0: u64,
    m: u64,
    d: u64,
    quad: &QuadratureConfig,
) -> Result<f64, TheoryError> {
    check_share_inputs(beta, x0, y0, z0, m, d)?;
    share_integral(beta, x0, y0, z0, m, d, quad, |r| r)
}

/// Predicted final red share `(R̄ - R_0) / (N - R_0 - B_0)`.
///
/// Half-edge counts `X_0`, `Y_0`, `Z_0` with `M = X_0 + Y_0 + Z_0` on a
/// `d`-regular graph. For `β = 1` this is `Y_0 / (X_0 + Y_0)`. Otherwise the
/// red half-edge fraction along the trajectory is
/// `r(t) = φ_β⁻¹(M K_0^(1/(β-1)) (t^(1/d) - (Z_0/M) t^((d-1)/d)))` and a
/// vertex captured at uncolored fraction `t` is red with probability
/// `r / (r + β (1 - r))`, so the share is the integral of that over
/// `t ∈ (0, 1)`.
#[allow(clippy::too_many_arguments)]
pub fn predict_share(
    beta: f64,
    x0: u64,
    y0: u64,
    z0: u64,
    m: u64,
    d: u64,
    quad: &QuadratureConfig,
    constants: BoundConstants,
) -> Result<Prediction, TheoryError> {
    check_share_inputs(beta, x0, y0, z0, m, d)?;
    let bounds = eq4_bounds(beta, x0 as f64, y0 as f64, m as f64, constants.c, constants.big_c);
    if beta == 1.0 {
        let share = y0 as f64 / (x0 + y0) as f64;
        return Ok(Prediction { share_ratio: share, bounds, verdict: None });
    }
    let share = share_integral(beta, x0, y0, z0, m, d, quad, |r| {
        let w = r + beta * (1.0 - r);
        if w > 0.0 {
            r / w
        } else {
            0.0
        }
    })?;
    Ok(Prediction { share_ratio: share, bounds, verdict: None })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case")]
pub enum ExponentCase {
    /// `B_0 = N^α1`, `R_0 = N^α2`.
    BothPolynomial { alpha1: f64, alpha2: f64 },
    /// `B_0`, `R_0` constant.
    BothConstant,
    /// `B_0` constant, `R_0 = N^α2`.
    BlueConstantRedPolynomial { alpha2: f64 },
}

const BOUNDARY_TOL: f64 = 1e-12;

fn check_exponent(name: &str, a: f64) -> Result<(), TheoryError> {
    if a > 0.0 && a < 1.0 {
        Ok(())
    } else {
        Err(TheoryError::InvalidInput(format!("{name} must lie in (0, 1), got {a}")))
    }
}

/// Which color ends with a vanishing share, and the exponent of its final
/// size.
pub fn predict_exponents(case: ExponentCase, beta: f64) -> Result<Verdict, TheoryError> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(TheoryError::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    match case {
        ExponentCase::BothPolynomial { alpha1, alpha2 } => {
            check_exponent("alpha1", alpha1)?;
            check_exponent("alpha2", alpha2)?;
            let gamma = 1.0 - alpha1 - beta * (1.0 - alpha2);
            let blue = alpha1 + beta * (1.0 - alpha2);
            let red = alpha2 + (1.0 - alpha1) / beta;
            Ok(if gamma.abs() <= BOUNDARY_TOL {
                Verdict::Boundary { exponent: 1.0 }
            } else if gamma > 0.0 {
                Verdict::BlueMinority { exponent: blue }
            } else {
                Verdict::RedMinority { exponent: red }
            })
        }
        ExponentCase::BothConstant => Ok(if beta < 1.0 {
            Verdict::BlueMinority { exponent: beta }
        } else if beta > 1.0 {
            Verdict::RedMinority { exponent: 1.0 / beta }
        } else {
            Verdict::Boundary { exponent: 1.0 }
        }),
        ExponentCase::BlueConstantRedPolynomial { alpha2 } => {
            check_exponent("alpha2", alpha2)?;
            let e = beta * (1.0 - alpha2);
            Ok(if (e - 1.0).abs() <= BOUNDARY_TOL {
                Verdict::Boundary { exponent: 1.0 }
            } else if e < 1.0 {
                Verdict::BlueMinority { exponent: e }
            } else {
                Verdict::RedMinority { exponent: alpha2 + 1.0 / beta }
            })
        }
    }
}

/// `Z_0 (1 - 2n/M)^(d/2)`.
pub fn urn_mean_curve(z0: f64, m: f64, d: f64, n: f64) -> f64 {
    let frac = 1.0 - 2.0 * n / m;
    if frac <= 0.0 {
        0.0
    } else {
        z0 * (frac.ln() * d / 2.0).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct N0 {
    pub n0: u64,
    pub threshold: f64,
    /// False when the threshold exceeds `M`; `n0` is then 0.
    pub feasible: bool,
}

/// Largest `n` with `M - 2n >= L_M (r ∨ 1/r)^(2/(1+β))`, where
/// `r = M^((1-β)/2) / K_0`.
pub fn compute_n0(x0: u64, y0: u64, beta: f64, m: u64, l_m: f64) -> Result<N0, TheoryError> {
    if x0 == 0 || y0 == 0 {
        return Err(TheoryError::InvalidInput("X0 and Y0 must be at least 1".into()));
    }
    if !(l_m > 0.0) || !(beta > 0.0) {
        return Err(TheoryError::InvalidInput("L_M and beta must be positive".into()));
    }
    let ln_k0 = (x0 as f64).ln() - beta * (y0 as f64).ln();
    let ln_r = (1.0 - beta) / 2.0 * (m as f64).ln() - ln_k0;
    let threshold = l_m * (ln_r.abs() * 2.0 / (1.0 + beta)).exp();
    let mf = m as f64;
    if threshold > mf {
        return Ok(N0 { n0: 0, threshold, feasible: false });
    }
    let mut n0 = ((mf - threshold) / 2.0).floor() as u64;
    // Guard the float floor and keep n0 < M/2.
    while n0 > 0 && (m as f64 - 2.0 * n0 as f64) < threshold {
        n0 -= 1;
    }
    while 2 * (n0 + 1) < m && (m as f64 - 2.0 * (n0 + 1) as f64) >= threshold {
        n0 += 1;
    }
    if 2 * n0 >= m {
        n0 = (m - 1) / 2;
    }
    Ok(N0 { n0, threshold, feasible: true })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_examples() {
        assert!((phi(2.0, 0.5).unwrap() - 2.0).abs() < 1e-12);
        assert!((phi(0.5, 0.5).unwrap() - 2.0).abs() < 1e-12);
        assert!(phi(2.0, 1.0 - 1e-12).unwrap() < 1e-10);
        assert_eq!(phi(1.0, 0.5), Err(TheoryError::WrongBranch));
        assert!(phi(2.0, 0.0).is_err());
    }

    #[test]
    fn phi_inverse_examples() {
        assert!((phi_inverse(2.0, 2.0, 1e-12).unwrap() - 0.5).abs() < 1e-10);
        assert_eq!(phi_inverse(2.0, 0.0, 1e-12).unwrap(), 1.0);
        assert_eq!(phi_inverse(0.5, 0.0, 1e-12).unwrap(), 0.0);
        // (1 - t)/t^2 = s
        for s in [0.01, 0.7, 5.0, 1e4] {
            let t = (-1.0 + (1.0f64 + 4.0 * s).sqrt()) / (2.0 * s);
            assert!((phi_inverse(2.0, s, 1e-13).unwrap() - t).abs() < 1e-9 * t.max(1e-3));
        }
    }

    #[test]
    fn round_trips() {
        for beta in [0.5, 2.0, 3.0] {
            for k in -3..=3 {
                let s = 10f64.powi(k);
                let t = phi_inverse(beta, s, 1e-12).unwrap();
                assert!((phi(beta, t).unwrap() / s - 1.0).abs() < 1e-9, "beta {beta} s {s}");
            }
            for t in [1e-3, 0.1, 0.5, 0.9, 0.999] {
                let s = phi(beta, t).unwrap();
                assert!((phi_inverse(beta, s, 1e-13).unwrap() - t).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn share_at_equal_rates() {
        let q = QuadratureConfig::default();
        let k = BoundConstants::default();
        assert_eq!(predict_share(1.0, 5, 5, 20, 30, 3, &q, k).unwrap().share_ratio, 0.5);
        assert_eq!(predict_share(1.0, 15, 5, 20, 40, 3, &q, k).unwrap().share_ratio, 0.25);
        assert!(predict_share(1.0, 15, 5, 20, 41, 3, &q, k).is_err());
    }

    #[test]
    fn share_swaps_colors_between_inverse_rates() {
        let q = QuadratureConfig::default();
        let k = BoundConstants::default();
        let a = predict_share(0.5, 300, 900, 8800, 10_000, 3, &q, k).unwrap().share_ratio;
        let b = predict_share(2.0, 900, 300, 8800, 10_000, 3, &q, k).unwrap().share_ratio;
        assert!((a + b - 1.0).abs() < 1e-5, "{a} {b}");
        let a = half_edge_share_integral(0.5, 300, 900, 8800, 10_000, 3, &q).unwrap();
        let b = half_edge_share_integral(2.0, 900, 300, 8800, 10_000, 3, &q).unwrap();
        assert!((a + b - 1.0).abs() < 1e-5, "{a} {b}");
    }

    #[test]
    fn capture_weighting_shrinks_the_slow_share() {
        let q = QuadratureConfig::default();
        let k = BoundConstants::default();
        let weighted = predict_share(2.0, 600, 600, 8800, 10_000, 3, &q, k).unwrap().share_ratio;
        let plain = half_edge_share_integral(2.0, 600, 600, 8800, 10_000, 3, &q).unwrap();
        assert!(weighted < plain && weighted > 0.0);
    }

    #[test]
    fn halving_tolerances_is_stable() {
        let q = QuadratureConfig::default();
        let k = BoundConstants::default();
        for beta in [0.5, 2.0, 3.0] {
            let a = predict_share(beta, 120, 450, 9430, 10_000, 3, &q, k).unwrap().share_ratio;
            let b = predict_share(beta, 120, 450, 9430, 10_000, 3, &q.halved(), k).unwrap().share_ratio;
            assert!((a - b).abs() < q.abs_tol.max(q.rel_tol * a));
        }
    }

    #[test]
    fn exponent_examples() {
        let v = predict_exponents(ExponentCase::BothPolynomial { alpha1: 0.3, alpha2: 0.6 }, 1.0).unwrap();
        assert!(matches!(v, Verdict::BlueMinority { .. }));
        assert!((v.exponent() - 0.7).abs() < 1e-12);
        assert_eq!(
            predict_exponents(ExponentCase::BothConstant, 2.0).unwrap(),
            Verdict::RedMinority { exponent: 0.5 }
        );
        let v = predict_exponents(ExponentCase::BlueConstantRedPolynomial { alpha2: 0.5 }, 3.0).unwrap();
        assert!(matches!(v, Verdict::RedMinority { .. }));
        assert!((v.exponent() - 5.0 / 6.0).abs() < 1e-12);
        assert!(predict_exponents(ExponentCase::BothPolynomial { alpha1: 1.2, alpha2: 0.5 }, 1.0).is_err());
    }

    #[test]
    fn exponent_formulas_agree_on_boundary() {
        for (a1, beta) in [(0.2f64, 0.5f64), (0.5, 2.0), (0.1, 1.3)] {
            // alpha2 solving 1 - a1 - beta (1 - a2) = 0
            let a2 = 1.0 - (1.0 - a1) / beta;
            if !(a2 > 0.0 && a2 < 1.0) {
                continue;
            }
            let blue = a1 + beta * (1.0 - a2);
            let red = a2 + (1.0 - a1) / beta;
            assert!((blue - red).abs() < 1e-12);
            assert!((blue - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mean_curve_examples() {
        assert_eq!(urn_mean_curve(7.0, 100.0, 3.0, 0.0), 7.0);
        assert!((urn_mean_curve(8.0, 100.0, 2.0, 25.0) - 4.0).abs() < 1e-12);
        assert!((urn_mean_curve(8.0, 100.0, 4.0, 25.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn n0_examples() {
        let m = 1_000_000u64;
        let l = (m as f64).ln();
        let r = compute_n0(500, 500, 1.0, m, l).unwrap();
        assert_eq!(r.n0, ((m as f64 - l) / 2.0).floor() as u64);
        let r = compute_n0(1000, 500, 1.0, m, l).unwrap();
        assert!((r.threshold - 2.0 * l).abs() < 1e-9);
        let r = compute_n0(1, 1_000_000, 1.0, 100, 1.0).unwrap();
        assert!(!r.feasible);
        assert_eq!(r.n0, 0);
    }

    #[test]
    fn n0_matches_direct_scan() {
        let (x0, y0, beta, m) = (1000u64, 10_000u64, 2.0, 100_000_000u64);
        let l = (m as f64).ln();
        let got = compute_n0(x0, y0, beta, m, l).unwrap();
        let k0 = x0 as f64 / (y0 as f64).powf(beta);
        let r = (m as f64).powf((1.0 - beta) / 2.0) / k0;
        let thr = l * r.max(1.0 / r).powf(2.0 / (1.0 + beta));
        let mut n = 0u64;
        // Coarse-then-fine monotone scan.
        let mut step = 1u64 << 40;
        while step > 0 {
            if 2 * (n + step) < m && (m - 2 * (n + step)) as f64 >= thr {
                n += step;
            } else {
                step /= 2;
            }
        }
        assert_eq!(got.n0, n);
    }

    #[test]
    fn eq4_examples() {
        assert_eq!(eq4_bounds(1.0, 50.0, 50.0, 100.0, 1.0, 1.0), (1.0, 1.0));
        let (lo, hi) = eq4_bounds(2.0, 10.0, 40.0, 1000.0, 0.5, 3.0);
        assert!(lo <= hi && hi <= 1.0);
    }

    #[test]
    fn prediction_json() {
        let p = Prediction { share_ratio: 0.25, bounds: (0.1, 0.9), verdict: Some(Verdict::Boundary { exponent: 1.0 }) };
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"kind\":\"boundary\""));
        let back: Prediction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }
}
