//! Exponent regression, distribution distances, deviation monitors and the
//! regularized incomplete beta function.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cli::TrialRecord;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("log-log fit needs positive values, got ({0}, {1})")]
    NonPositive(f64, f64),
    #[error("empty sample")]
    EmptySample,
    #[error("pmf sums to {0}, not 1")]
    Unnormalized(f64),
    #[error("pmf has a negative or non-finite entry")]
    InvalidPmf,
    #[error("reference vanishes at n = {0}")]
    ZeroReference(u64),
    #[error("beta cdf domain error: a = {a}, b = {b}, x = {x}")]
    BetaDomain { a: f64, b: f64, x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
}

/// Ordinary least squares of `ln y` on `ln N`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<LogLogFit, StatsError> {
    if points.len() < 3 {
        return Err(StatsError::TooFewPoints { needed: 3, got: points.len() });
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(StatsError::NonPositive(x, y));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = (sse / (n - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 { (1.0 - sse / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(LogLogFit { slope, intercept, slope_stderr, r_squared })
}

/// `sup |F̂ - F|` for a continuous reference cdf.
pub fn ks_statistic<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64, StatsError> {
    if sample.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let x = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == x {
            j += 1;
        }
        // Left limit via the preceding float, so step cdfs are handled too.
        d = d.max((cdf(x.next_down()) - i as f64 / n).abs()).max((j as f64 / n - cdf(x)).abs());
        i = j;
    }
    Ok(d)
}

/// Two-sample KS distance `sup |F̂_1 - F̂_2|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Asymptotic Kolmogorov tail `P(K > λ)`.
pub fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=200 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic p-value of a two-sample KS distance.
pub fn ks_two_sample_p_value(d: f64, n1: usize, n2: usize) -> f64 {
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    let sq = ne.sqrt();
    kolmogorov_tail((sq + 0.12 + 0.11 / sq) * d)
}

/// One-sample KS critical value at level 1%, `1.63 / sqrt(n)`.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

const NORMALIZATION_TOL: f64 = 1e-9;

fn check_pmf(p: &[f64]) -> Result<(), StatsError> {
    if p.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(StatsError::InvalidPmf);
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > NORMALIZATION_TOL {
        return Err(StatsError::Unnormalized(s));
    }
    Ok(())
}

/// `½ Σ |p - q|`; shorter vectors are padded with zeros.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64, StatsError> {
    check_pmf(p)?;
    check_pmf(q)?;
    let n = p.len().max(q.len());
    let at = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    Ok(0.5 * (0..n).map(|i| (at(p, i) - at(q, i)).abs()).sum::<f64>())
}

/// Empirical pmf of non-negative integer outcomes, indexed by value.
pub fn empirical_pmf(values: &[u64]) -> Vec<f64> {
    let Some(&max) = values.iter().max() else {
        return Vec::new();
    };
    let mut counts = vec![0u64; max as usize + 1];
    for &v in values {
        counts[v as usize] += 1;
    }
    let n = values.len() as f64;
    counts.into_iter().map(|c| c as f64 / n).collect()
}

/// `max |value / reference(n) - 1|` over sampled `n` in `range`.
pub fn sup_rel_deviation<F: Fn(u64) -> f64>(
    series: &[(u64, f64)],
    reference: F,
    range: RangeInclusive<u64>,
) -> Result<f64, StatsError> {
    let mut sup: f64 = 0.0;
    for &(n, v) in series.iter().filter(|(n, _)| range.contains(n)) {
        let r = reference(n);
        if r == 0.0 || !r.is_finite() {
            return Err(StatsError::ZeroReference(n));
        }
        sup = sup.max((v / r - 1.0).abs());
    }
    Ok(sup)
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn beta_cdf(a: f64, b: f64, x: f64) -> Result<f64, StatsError> {
    if !(a > 0.0 && b > 0.0 && (0.0..=1.0).contains(&x)) {
        return Err(StatsError::BetaDomain { a, b, x });
    }
    statrs::function::beta::checked_beta_reg(a, b, x).map_err(|_| StatsError::BetaDomain { a, b, x })
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub q05: f64,
    pub q25: f64,
    pub q75: f64,
    pub q95: f64,
    pub stderr: f64,
}

impl FieldSummary {
    /// Sorts before reducing, so the result does not depend on input order.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = if v.len() > 1 { v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Some(Self {
            count: v.len(),
            mean,
            median: quantile(&v, 0.5),
            q05: quantile(&v, 0.05),
            q25: quantile(&v, 0.25),
            q75: quantile(&v, 0.75),
            q95: quantile(&v, 0.95),
            stderr: (var / n).sqrt(),
        })
    }
}

pub type TrialSummary = BTreeMap<String, FieldSummary>;

/// Per-field summaries of the numeric outputs of a batch of trials.
pub fn summarize_trials(records: &[TrialRecord]) -> TrialSummary {
    let fields: [(&str, fn(&TrialRecord) -> f64); 5] = [
        ("b_bar", |r| r.b_bar as f64),
        ("r_bar", |r| r.r_bar as f64),
        ("uncolored", |r| r.uncolored as f64),
        ("steps", |r| r.steps as f64),
        ("red_share", |r| r.red_share()),
    ];
    let mut out = BTreeMap::new();
    for (name, get) in fields {
        let vals: Vec<f64> = records.iter().map(get).filter(|v| v.is_finite()).collect();
        if let Some(s) = FieldSummary::of(&vals) {
            out.insert(name.to_string(), s);
        }
    }
    out
}
