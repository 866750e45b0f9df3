//! Pólya urns.
//!
//! * [`FiniteUrnScheme`]: two colors with replacement matrix
//!   `(-a, 0; b - a, -b)`, `0 < a < b`. Drawing an `S` ball removes `a` of
//!   them; drawing a `Z` ball removes `b` `Z` balls and adds `b - a` `S`
//!   balls, so `S_n + Z_n = M - a n` and the urn empties in finitely many
//!   draws. With `a = 2`, `b = d`, `S_0 = X_0 + Y_0 - 1` and `Z_0` uncolored
//!   half-edges this is the total colored-vs-uncolored count of the
//!   half-edge chain.
//! * [`DiagUrnScheme`]: the growth-only diagonal urn with weighted draws.
//! * [`dp_urn_distribution`]: exact forward recursion over urn states.

use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats::ks_two_sample;
use crate::trials::run_trials;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum UrnError {
    #[error("scheme needs 0 < a < b, got a = {a}, b = {b}")]
    InvalidScheme { a: u64, b: u64 },
    #[error("urn is empty")]
    EmptyUrn,
    #[error("exact recursion capped at M = {cap}, got M = {m}")]
    CapExceeded { m: u64, cap: u64 },
    #[error("diagonal urn parameters must be positive and finite")]
    InvalidDiagScheme,
    #[error("sublinear branch needs alpha < delta, got alpha = {alpha}, delta = {delta}")]
    WrongBranch { alpha: f64, delta: f64 },
    #[error("need at least one trial and one draw")]
    NothingToRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteUrnScheme {
    pub a: u64,
    pub b: u64,
    pub s0: u64,
    pub z0: u64,
}

impl FiniteUrnScheme {
    pub fn new(a: u64, b: u64, s0: u64, z0: u64) -> Result<Self, UrnError> {
        let scheme = Self { a, b, s0, z0 };
        scheme.validate()?;
        Ok(scheme)
    }

    /// The urn tracking the half-edge chain started from `X_0 + Y_0`
    /// colored and `Z_0` uncolored half-edges on a `d`-regular graph.
    pub fn for_chain(colored: u64, uncolored: u64, degree: u64) -> Result<Self, UrnError> {
        if colored == 0 {
            return Err(UrnError::EmptyUrn);
        }
        Self::new(2, degree, colored - 1, uncolored)
    }

    pub fn validate(&self) -> Result<(), UrnError> {
        if self.a == 0 || self.a >= self.b {
            return Err(UrnError::InvalidScheme { a: self.a, b: self.b });
        }
        if self.total() == 0 {
            return Err(UrnError::EmptyUrn);
        }
        Ok(())
    }

    /// `M = S_0 + Z_0`.
    pub fn total(&self) -> u64 {
        self.s0 + self.z0
    }

    /// `Z_0 (1 - a n / M)^(b/a)`.
    pub fn mean_z(&self, n: u64) -> f64 {
        let frac = 1.0 - (self.a * n) as f64 / self.total() as f64;
        if frac <= 0.0 {
            return 0.0;
        }
        self.z0 as f64 * frac.powf(self.b as f64 / self.a as f64)
    }

    /// `K_n = Z_n / (Z_0 (1 - a n/M)^(b/a))`; NaN where the reference is zero.
    pub fn k_monitor(&self, n: u64, z: u64) -> f64 {
        let reference = self.mean_z(n);
        if reference > 0.0 {
            z as f64 / reference
        } else {
            f64::NAN
        }
    }

    /// `L_n = S_n / ((M - a n) - Z_0 (1 - a n/M)^(b/a))`; NaN where the
    /// reference is not positive.
    pub fn l_monitor(&self, n: u64, s: u64) -> f64 {
        let live = self.total() as f64 - (self.a * n) as f64;
        let reference = live - self.mean_z(n);
        if reference > 0.0 {
            s as f64 / reference
        } else {
            f64::NAN
        }
    }

    fn marker(&self, t: f64) -> u64 {
        let m = self.total() as f64;
        let v = m * (1.0 - t * (self.z0 as f64).powf(-(self.a as f64) / self.b as f64)) / self.a as f64;
        if v > 0.0 {
            v.floor() as u64
        } else {
            0
        }
    }

    /// `n_{1,t} = floor(M (1 - t Z_0^(-a/b)) / a)`, clamped at 0.
    pub fn n1(&self, t: f64) -> u64 {
        self.marker(t)
    }

    /// `n_{2,t} = floor(M (1 - t^(-1) Z_0^(-a/b)) / a)`, clamped at 0.
    pub fn n2(&self, t: f64) -> u64 {
        self.marker(1.0 / t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrnState {
    pub s: u64,
    pub z: u64,
    /// Draws applied so far.
    pub n: u64,
    pub absorbed: bool,
    /// First `n` with `Z_n = 0`.
    pub sigma: Option<u64>,
}

impl UrnState {
    pub fn initial(scheme: &FiniteUrnScheme) -> Self {
        Self {
            s: scheme.s0,
            z: scheme.z0,
            n: 0,
            absorbed: scheme.total() == 0,
            sigma: (scheme.z0 == 0).then_some(0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Draw {
    S,
    Z,
}

/// One draw. A draw whose update would make a count negative absorbs the urn
/// and leaves the counts unchanged.
pub fn urn_step<R: Rng + ?Sized>(state: &mut UrnState, scheme: &FiniteUrnScheme, rng: &mut R) -> Option<Draw> {
    if state.absorbed {
        return None;
    }
    let live = state.s + state.z;
    if live == 0 {
        state.absorbed = true;
        return None;
    }
    let draw = if rng.random_range(0..live) < state.s { Draw::S } else { Draw::Z };
    match draw {
        Draw::S if state.s >= scheme.a => state.s -= scheme.a,
        Draw::Z if state.z >= scheme.b => {
            state.z -= scheme.b;
            state.s += scheme.b - scheme.a;
        }
        _ => {
            state.absorbed = true;
            return None;
        }
    }
    state.n += 1;
    if state.z == 0 && state.sigma.is_none() {
        state.sigma = Some(state.n);
    }
    Some(draw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrnSample {
    pub n: u64,
    pub s: u64,
    pub z: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrnTrajectory {
    pub scheme: FiniteUrnScheme,
    pub stride: u64,
    /// `(n, S_n, Z_n)` every `stride` draws; the final state is always
    /// included.
    pub samples: Vec<UrnSample>,
    pub sigma: Option<u64>,
    /// Number of draws applied before absorption.
    pub absorbed_at: u64,
}

impl UrnTrajectory {
    pub fn final_sample(&self) -> UrnSample {
        *self.samples.last().expect("trajectory always holds the initial state")
    }

    pub fn k_series(&self) -> Vec<(u64, f64)> {
        self.samples.iter().map(|p| (p.n, self.scheme.k_monitor(p.n, p.z))).collect()
    }

    pub fn l_series(&self) -> Vec<(u64, f64)> {
        self.samples.iter().map(|p| (p.n, self.scheme.l_monitor(p.n, p.s))).collect()
    }

    /// `max |K_n - 1|` over sampled `n <= until`.
    pub fn max_k_deviation(&self, until: u64) -> f64 {
        self.samples
            .iter()
            .take_while(|p| p.n <= until)
            .map(|p| (self.scheme.k_monitor(p.n, p.z) - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `max |L_n - 1|` over all sampled `n`.
    pub fn max_l_deviation(&self) -> f64 {
        self.samples
            .iter()
            .map(|p| self.scheme.l_monitor(p.n, p.s))
            .filter(|l| l.is_finite())
            .map(|l| (l - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// `Z_n`, holding the final value after absorption. Requires stride 1.
    pub fn z_at(&self, n: u64) -> u64 {
        debug_assert_eq!(self.stride, 1);
        let i = (n as usize).min(self.samples.len() - 1);
        self.samples[i].z
    }

    /// CSV `n,S,Z,K,L`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,S,Z,K,L")?;
        for p in &self.samples {
            writeln!(
                out,
                "{},{},{},{},{}",
                p.n,
                p.s,
                p.z,
                self.scheme.k_monitor(p.n, p.z),
                self.scheme.l_monitor(p.n, p.s)
            )?;
        }
        Ok(())
    }
}

/// Runs the urn until absorption.
pub fn run_urn<R: Rng + ?Sized>(scheme: &FiniteUrnScheme, stride: u64, rng: &mut R) -> UrnTrajectory {
    let stride = stride.max(1);
    let mut state = UrnState::initial(scheme);
    let mut samples = vec![UrnSample { n: 0, s: state.s, z: state.z }];
    while urn_step(&mut state, scheme, rng).is_some() {
        if state.n % stride == 0 {
            samples.push(UrnSample { n: state.n, s: state.s, z: state.z });
        }
    }
    if samples.last().map(|p| p.n) != Some(state.n) {
        samples.push(UrnSample { n: state.n, s: state.s, z: state.z });
    }
    UrnTrajectory {
        scheme: *scheme,
        stride,
        samples,
        sigma: state.sigma,
        absorbed_at: state.n,
    }
}

/// Arithmetic the exact recursion runs in.
pub trait Probability:
    Clone + Zero + One + std::ops::AddAssign + std::ops::Sub<Output = Self> + std::ops::Mul<Output = Self>
{
    fn ratio(num: u64, den: u64) -> Self;
    fn from_count(k: u64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Probability for BigRational {
    fn ratio(num: u64, den: u64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_count(k: u64) -> Self {
        BigRational::from_integer(BigInt::from(k))
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

impl Probability for f64 {
    fn ratio(num: u64, den: u64) -> Self {
        num as f64 / den as f64
    }
    fn from_count(k: u64) -> Self {
        k as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UrnCell {
    pub s: u64,
    pub z: u64,
    pub absorbed: bool,
}

/// Exact law of the urn, step by step.
#[derive(Debug, Clone, PartialEq)]
pub struct UrnDistribution<P> {
    pub scheme: FiniteUrnScheme,
    /// `steps[n]` is the pmf of the state after `n` draws (absorbed states
    /// are frozen).
    pub steps: Vec<Vec<(UrnCell, P)>>,
    /// `sigma[n] = P(sigma = n)`.
    pub sigma: Vec<P>,
    /// Probability that the urn absorbs with `Z > 0`.
    pub sigma_never: P,
    pub mean_s: Vec<P>,
    pub mean_z: Vec<P>,
}

impl<P: Probability> UrnDistribution<P> {
    pub fn to_f64(&self) -> UrnDistribution<f64> {
        let conv = |v: &Vec<P>| v.iter().map(Probability::to_f64).collect::<Vec<_>>();
        UrnDistribution {
            scheme: self.scheme,
            steps: self
                .steps
                .iter()
                .map(|row| row.iter().map(|(c, p)| (*c, p.to_f64())).collect())
                .collect(),
            sigma: conv(&self.sigma),
            sigma_never: self.sigma_never.to_f64(),
            mean_s: conv(&self.mean_s),
            mean_z: conv(&self.mean_z),
        }
    }

    /// Mass at every step.
    pub fn masses(&self) -> Vec<P> {
        self.steps
            .iter()
            .map(|row| {
                let mut m = P::zero();
                for (_, p) in row {
                    m += p.clone();
                }
                m
            })
            .collect()
    }
}

impl UrnDistribution<f64> {
    /// `sigma` pmf with the "never" outcome appended as the last entry.
    pub fn sigma_with_never(&self) -> Vec<f64> {
        let mut v = self.sigma.clone();
        v.push(self.sigma_never);
        v
    }
}

/// Forward recursion over reachable `(S, Z)` states.
pub fn dp_urn<P: Probability>(scheme: &FiniteUrnScheme) -> Result<UrnDistribution<P>, UrnError> {
    scheme.validate()?;
    let (a, b) = (scheme.a, scheme.b);
    let mut row = vec![(
        UrnCell { s: scheme.s0, z: scheme.z0, absorbed: false },
        P::one(),
    )];
    let mut steps = Vec::new();
    let mut zero_mass_prev = P::zero();
    let mut sigma = Vec::new();
    loop {
        let mut zero_mass = P::zero();
        for (c, p) in &row {
            if c.z == 0 {
                zero_mass += p.clone();
            }
        }
        // Z is non-increasing, so P(sigma = n) = P(Z_n = 0) - P(Z_{n-1} = 0).
        sigma.push(zero_mass.clone() - zero_mass_prev);
        zero_mass_prev = zero_mass;
        let done = row.iter().all(|(c, _)| c.absorbed);
        steps.push(row.clone());
        if done {
            let mut never = P::zero();
            for (c, p) in &row {
                if c.z > 0 {
                    never += p.clone();
                }
            }
            let (mean_s, mean_z) = steps.iter().map(|r| means(r)).unzip();
            return Ok(UrnDistribution { scheme: *scheme, steps, sigma, sigma_never: never, mean_s, mean_z });
        }

        let mut next: std::collections::BTreeMap<UrnCell, P> = std::collections::BTreeMap::new();
        let mut push = |cell: UrnCell, p: P| {
            *next.entry(cell).or_insert_with(P::zero) += p;
        };
        for (c, p) in row {
            if c.absorbed {
                push(c, p);
                continue;
            }
            let live = c.s + c.z;
            if live == 0 {
                push(UrnCell { absorbed: true, ..c }, p);
                continue;
            }
            if c.s > 0 {
                let cell = if c.s >= a {
                    UrnCell { s: c.s - a, ..c }
                } else {
                    UrnCell { absorbed: true, ..c }
                };
                push(cell, p.clone() * P::ratio(c.s, live));
            }
            if c.z > 0 {
                let cell = if c.z >= b {
                    UrnCell { s: c.s + b - a, z: c.z - b, absorbed: false }
                } else {
                    UrnCell { absorbed: true, ..c }
                };
                push(cell, p * P::ratio(c.z, live));
            }
        }
        row = next.into_iter().collect();
    }
}

fn means<P: Probability>(row: &[(UrnCell, P)]) -> (P, P) {
    let mut ms = P::zero();
    let mut mz = P::zero();
    for (c, p) in row {
        ms += P::from_count(c.s) * p.clone();
        mz += P::from_count(c.z) * p.clone();
    }
    (ms, mz)
}

/// Exact urn law in f64. Rational arithmetic is used below `M = 64`.
pub fn dp_urn_distribution(scheme: &FiniteUrnScheme, cap: u64) -> Result<UrnDistribution<f64>, UrnError> {
    let m = scheme.total();
    if m > cap {
        return Err(UrnError::CapExceeded { m, cap });
    }
    if m < 64 {
        Ok(dp_urn::<BigRational>(scheme)?.to_f64())
    } else {
        dp_urn::<f64>(scheme)
    }
}

pub const DEFAULT_DP_CAP: u64 = 200;

/// Growth-only urn with weighted draws: with probability
/// `alpha1 X / (alpha1 X + alpha2 Y)` add `a1` to `X`, else add `a2` to `Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagUrnScheme {
    pub alpha1: f64,
    pub alpha2: f64,
    pub a1: f64,
    pub a2: f64,
    pub x0: f64,
    pub y0: f64,
}

impl DiagUrnScheme {
    /// Janson's urn `(alpha, 0; 0, delta)` with unweighted draws.
    pub fn janson(alpha: f64, delta: f64, s0: f64, z0: f64) -> Self {
        Self { alpha1: 1.0, alpha2: 1.0, a1: alpha, a2: delta, x0: s0, y0: z0 }
    }

    pub fn validate(&self) -> Result<(), UrnError> {
        let all = [self.alpha1, self.alpha2, self.a1, self.a2, self.x0, self.y0];
        if all.iter().all(|v| *v > 0.0 && v.is_finite()) {
            Ok(())
        } else {
            Err(UrnError::InvalidDiagScheme)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagUrnOutcome {
    pub x: f64,
    pub y: f64,
    pub alpha1: f64,
    pub alpha2: f64,
}

impl DiagUrnOutcome {
    /// `S_n = alpha1 X_n`.
    pub fn s(&self) -> f64 {
        self.alpha1 * self.x
    }

    /// `Z_n = alpha2 Y_n`.
    pub fn z(&self) -> f64 {
        self.alpha2 * self.y
    }

    pub fn s_fraction(&self) -> f64 {
        let (s, z) = (self.s(), self.z());
        s / (s + z)
    }
}

pub fn diag_urn_run<R: Rng + ?Sized>(
    scheme: &DiagUrnScheme,
    n_steps: u64,
    rng: &mut R,
) -> Result<DiagUrnOutcome, UrnError> {
    scheme.validate()?;
    let (mut x, mut y) = (scheme.x0, scheme.y0);
    for _ in 0..n_steps {
        let wx = scheme.alpha1 * x;
        if rng.random::<f64>() * (wx + scheme.alpha2 * y) < wx {
            x += scheme.a1;
        } else {
            y += scheme.a2;
        }
    }
    Ok(DiagUrnOutcome { x, y, alpha1: scheme.alpha1, alpha2: scheme.alpha2 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JansonSummary {
    pub alpha: f64,
    pub delta: f64,
    pub n: u64,
    /// Sorted samples of `n^(-alpha/delta) S_n`.
    pub empirical: Vec<f64>,
    /// Sorted samples of `alpha U V^(-alpha/delta)`.
    pub reference: Vec<f64>,
    /// `(p, empirical quantile, reference quantile)`.
    pub quantiles: Vec<(f64, f64, f64)>,
    pub ks_distance: f64,
}

fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let idx = ((sorted.len() - 1) as f64 * p).round() as usize;
    sorted[idx]
}

/// Compares `n^(-alpha/delta) S_n` for Janson's urn `(alpha, 0; 0, delta)`
/// with samples of its limit `alpha U V^(-alpha/delta)`, `U ~ Gamma(S_0 /
/// alpha)`, `V ~ Gamma(Z_0 / delta)`.
pub fn janson_sublinear_check<R: Rng + ?Sized>(
    alpha: f64,
    delta: f64,
    s0: f64,
    z0: f64,
    n: u64,
    trials: u64,
    rng: &mut R,
) -> Result<JansonSummary, UrnError> {
    if !(alpha < delta) {
        return Err(UrnError::WrongBranch { alpha, delta });
    }
    if trials == 0 || n == 0 {
        return Err(UrnError::NothingToRun);
    }
    let scheme = DiagUrnScheme::janson(alpha, delta, s0, z0);
    scheme.validate()?;
    let scale = (n as f64).powf(-alpha / delta);
    let master = rng.random::<u64>();
    let mut empirical: Vec<f64> = run_trials(master, trials, None, |_, _, r| {
        diag_urn_run(&scheme, n, r).map(|o| o.s() * scale).unwrap_or(f64::NAN)
    });
    let u = Gamma::new(s0 / alpha, 1.0).map_err(|_| UrnError::InvalidDiagScheme)?;
    let v = Gamma::new(z0 / delta, 1.0).map_err(|_| UrnError::InvalidDiagScheme)?;
    let mut reference: Vec<f64> = (0..trials)
        .map(|_| alpha * u.sample(rng) * v.sample(rng).powf(-alpha / delta))
        .collect();
    empirical.sort_by(f64::total_cmp);
    reference.sort_by(f64::total_cmp);
    let quantiles = [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95]
        .iter()
        .map(|&p| (p, quantile_sorted(&empirical, p), quantile_sorted(&reference, p)))
        .collect();
    let ks_distance = ks_two_sample(&empirical, &reference).unwrap_or(f64::NAN);
    Ok(JansonSummary { alpha, delta, n, empirical, reference, quantiles, ks_distance })
}
