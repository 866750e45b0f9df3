//! The half-edge exploration chain.
//!
//! A random `d`-regular multigraph is built lazily while the infection
//! spreads: each step pairs one colored half-edge `e` (blue ones weighted by
//! `beta`) with a uniformly chosen other live half-edge `g`. If `g` is
//! uncolored its vertex is captured by the color of `e` and the remaining
//! `d - 1` half-edges of that vertex take that color. Only counts are tracked:
//! the matching is exchangeable, so vertex identities carry no information.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChainError {
    #[error("degree must be at least 3, got {0}")]
    DegreeTooSmall(u64),
    #[error("need at least one vertex")]
    NoVertices,
    #[error("d*N = {0} is odd, no d-regular graph exists")]
    OddHalfEdges(u64),
    #[error("beta must be positive and finite, got {0}")]
    InvalidBeta(f64),
    #[error("seed sets need {needed} vertices but the graph has {available}")]
    SeedsExceedVertices { needed: u64, available: u64 },
    #[error("seed set sizes must be positive")]
    EmptySeedSet,
    #[error("warm-up needs 1 <= k < target <= N, got k = {k}, target = {target}")]
    InvalidWarmup { k: u64, target: u64 },
    #[error("blue died out at {blue_vertices} vertices after {steps} warm-up steps")]
    WarmupDied { blue_vertices: u64, steps: u64 },
    #[error("K_n is undefined without red half-edges")]
    NoRedHalfEdges,
    #[error("K_n is undefined for n >= M/2")]
    PastHalfway,
    #[error("inconsistent chain state: {0}")]
    InvalidState(String),
}

/// Graph size, degree and blue rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainParams {
    pub n_vertices: u64,
    pub degree: u64,
    pub beta: f64,
}

impl ChainParams {
    pub fn new(n_vertices: u64, degree: u64, beta: f64) -> Result<Self, ChainError> {
        let params = Self { n_vertices, degree, beta };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        if self.degree < 3 {
            return Err(ChainError::DegreeTooSmall(self.degree));
        }
        if self.n_vertices == 0 {
            return Err(ChainError::NoVertices);
        }
        let half_edges = self.half_edges();
        if half_edges % 2 == 1 {
            return Err(ChainError::OddHalfEdges(half_edges));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(ChainError::InvalidBeta(self.beta));
        }
        Ok(())
    }

    pub fn half_edges(&self) -> u64 {
        self.degree * self.n_vertices
    }
}

/// Counts of the chain after `step` steps.
///
/// `blue`, `red`, `uncolored` are the live half-edge counts `X`, `Y`, `Z`;
/// `total` is `M = X_0 + Y_0 + Z_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainState {
    pub blue: u64,
    pub red: u64,
    pub uncolored: u64,
    pub step: u64,
    pub total: u64,
    pub blue_vertices: u64,
    pub red_vertices: u64,
}

impl ChainState {
    pub fn live(&self) -> u64 {
        self.blue + self.red + self.uncolored
    }

    pub fn colored(&self) -> u64 {
        self.blue + self.red
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StepOutcome {
    ForwardBlue,
    ForwardRed,
    BackwardBlueBlue,
    BackwardBlueRed,
    BackwardRedRed,
}

impl StepOutcome {
    pub const ALL: [StepOutcome; 5] = [
        StepOutcome::ForwardBlue,
        StepOutcome::ForwardRed,
        StepOutcome::BackwardBlueBlue,
        StepOutcome::BackwardBlueRed,
        StepOutcome::BackwardRedRed,
    ];
}

/// Final vertex counts once no colored half-edge is left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinalCounts {
    pub b_bar: u64,
    pub r_bar: u64,
    /// Vertices never reached (components without a seed).
    pub uncolored: u64,
    pub steps: u64,
}

/// What the K monitor records during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMonitorConfig {
    /// Store `K_n` every `stride` steps.
    pub stride: u64,
    /// If set, track `max |K_n / K_0 - 1|` over every `n <= horizon`.
    pub horizon: Option<u64>,
}

impl KMonitorConfig {
    /// Stride `max(1, M / 2^14)`, no horizon.
    pub fn for_total(total: u64) -> Self {
        Self { stride: (total >> 14).max(1), horizon: None }
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = Some(horizon);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMonitor {
    /// `(n, K_n)` samples, taken while both colors have live half-edges.
    pub series: Vec<(u64, f64)>,
    pub k0: f64,
    pub sample_stride: u64,
    pub horizon: Option<u64>,
    /// `max |K_n / K_0 - 1|` over `n <= horizon`; `1` if blue died and
    /// infinite if red died inside the window.
    pub max_rel_deviation: f64,
}

/// `K_n = X_n / (Y_n^beta (1 - 2n/M)^((1 - beta)/2))`, evaluated in log space.
pub fn k_value(state: &ChainState, beta: f64) -> Result<f64, ChainError> {
    if state.red == 0 {
        return Err(ChainError::NoRedHalfEdges);
    }
    if 2 * state.step >= state.total {
        return Err(ChainError::PastHalfway);
    }
    if state.blue == 0 {
        return Ok(0.0);
    }
    Ok(ln_k(state, beta).exp())
}

fn ln_k(state: &ChainState, beta: f64) -> f64 {
    let remaining = (-2.0 * state.step as f64 / state.total as f64).ln_1p();
    (state.blue as f64).ln() - beta * (state.red as f64).ln() - 0.5 * (1.0 - beta) * remaining
}

/// One realization of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfEdgeChain {
    params: ChainParams,
    state: ChainState,
}

impl HalfEdgeChain {
    /// Disjoint uniform seed sets of sizes `b0` and `r0`.
    pub fn init_uniform(params: ChainParams, b0: u64, r0: u64) -> Result<Self, ChainError> {
        if b0 == 0 || r0 == 0 {
            return Err(ChainError::EmptySeedSet);
        }
        Self::init_counts(params, b0, r0)
    }

    /// Blue seeds only; red stays empty.
    pub fn init_single_color(params: ChainParams, b0: u64) -> Result<Self, ChainError> {
        if b0 == 0 {
            return Err(ChainError::EmptySeedSet);
        }
        Self::init_counts(params, b0, 0)
    }

    fn init_counts(params: ChainParams, b0: u64, r0: u64) -> Result<Self, ChainError> {
        params.validate()?;
        let n = params.n_vertices;
        let d = params.degree;
        if b0 + r0 > n {
            return Err(ChainError::SeedsExceedVertices { needed: b0 + r0, available: n });
        }
        let state = ChainState {
            blue: d * b0,
            red: d * r0,
            uncolored: d * (n - b0 - r0),
            step: 0,
            total: d * n,
            blue_vertices: b0,
            red_vertices: r0,
        };
        Ok(Self { params, state })
    }

    /// Resumes from an explicit state after checking its invariants.
    pub fn from_state(params: ChainParams, state: ChainState) -> Result<Self, ChainError> {
        params.validate()?;
        let chain = Self { params, state };
        chain.check_invariants()?;
        Ok(chain)
    }

    pub fn check_invariants(&self) -> Result<(), ChainError> {
        let s = &self.state;
        let d = self.params.degree;
        if s.live() + 2 * s.step != s.total {
            return Err(ChainError::InvalidState(format!(
                "X + Y + Z = {} but M - 2n = {}",
                s.live(),
                s.total as i128 - 2 * s.step as i128
            )));
        }
        if s.uncolored % d != 0 {
            return Err(ChainError::InvalidState(format!("Z = {} not divisible by d = {d}", s.uncolored)));
        }
        if s.blue_vertices + s.red_vertices + s.uncolored / d > self.params.n_vertices {
            return Err(ChainError::InvalidState("more vertices than N".into()));
        }
        Ok(())
    }

    pub fn params(&self) -> &ChainParams {
        &self.params
    }

    pub fn state(&self) -> &ChainState {
        &self.state
    }

    pub fn is_absorbed(&self) -> bool {
        self.state.colored() == 0
    }

    /// Unnormalized weights of the five branches, in [`StepOutcome::ALL`]
    /// order. They sum to `(beta X + Y)(M - 2n - 1)`.
    pub fn branch_weights(&self) -> [f64; 5] {
        let b = self.params.beta;
        let x = self.state.blue as f64;
        let y = self.state.red as f64;
        let z = self.state.uncolored as f64;
        [
            b * x * z,
            y * z,
            b * x * (x - 1.0).max(0.0),
            (1.0 + b) * x * y,
            y * (y - 1.0).max(0.0),
        ]
    }

    /// Advances one step; `None` once absorbed.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<StepOutcome> {
        let s = &mut self.state;
        if s.blue + s.red == 0 {
            return None;
        }
        let blue_pool = if s.red == 0 {
            true
        } else if s.blue == 0 {
            false
        } else {
            let wb = self.params.beta * s.blue as f64;
            rng.random::<f64>() * (wb + s.red as f64) < wb
        };
        // X + Y >= 1 and M - 2n is even, so at least one other live half-edge exists.
        let others = s.blue + s.red + s.uncolored - 1;
        let g = rng.random_range(0..others);
        let d = self.params.degree;
        let outcome = if g < s.uncolored {
            s.uncolored -= d;
            if blue_pool {
                s.blue += d - 2;
                s.blue_vertices += 1;
                StepOutcome::ForwardBlue
            } else {
                s.red += d - 2;
                s.red_vertices += 1;
                StepOutcome::ForwardRed
            }
        } else {
            let g = g - s.uncolored;
            let blue_others = if blue_pool { s.blue - 1 } else { s.blue };
            match (blue_pool, g < blue_others) {
                (true, true) => {
                    s.blue -= 2;
                    StepOutcome::BackwardBlueBlue
                }
                (false, false) => {
                    s.red -= 2;
                    StepOutcome::BackwardRedRed
                }
                _ => {
                    s.blue -= 1;
                    s.red -= 1;
                    StepOutcome::BackwardBlueRed
                }
            }
        };
        s.step += 1;
        debug_assert_eq!(s.live() + 2 * s.step, s.total);
        debug_assert_eq!(s.uncolored % d, 0);
        Some(outcome)
    }

    pub fn final_counts(&self) -> FinalCounts {
        FinalCounts {
            b_bar: self.state.blue_vertices,
            r_bar: self.state.red_vertices,
            uncolored: self.state.uncolored / self.params.degree,
            steps: self.state.step,
        }
    }

    pub fn k_value(&self) -> Result<f64, ChainError> {
        k_value(&self.state, self.params.beta)
    }

    /// Runs until no colored half-edge is left.
    pub fn run_to_absorption<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        monitor: Option<&KMonitorConfig>,
    ) -> (FinalCounts, Option<KMonitor>) {
        let Some(cfg) = monitor else {
            while self.step(rng).is_some() {}
            return (self.final_counts(), None);
        };
        let beta = self.params.beta;
        let stride = cfg.stride.max(1);
        let k0 = self.k_value().unwrap_or(f64::NAN);
        let ln_k0 = k0.ln();
        let mut mon = KMonitor {
            series: Vec::new(),
            k0,
            sample_stride: stride,
            horizon: cfg.horizon,
            max_rel_deviation: 0.0,
        };
        let horizon = cfg.horizon.unwrap_or(0);
        let mut tracking = cfg.horizon.is_some();
        loop {
            let s = self.state;
            let both = s.blue > 0 && s.red > 0 && 2 * s.step < s.total;
            if tracking {
                if s.step > horizon {
                    tracking = false;
                } else if both {
                    let dev = (ln_k(&s, beta) - ln_k0).exp_m1().abs();
                    mon.max_rel_deviation = mon.max_rel_deviation.max(dev);
                } else {
                    mon.max_rel_deviation =
                        if s.red == 0 { f64::INFINITY } else { mon.max_rel_deviation.max(1.0) };
                    tracking = false;
                }
            }
            if both && s.step % stride == 0 {
                mon.series.push((s.step, ln_k(&s, beta).exp()));
            }
            if self.step(rng).is_none() {
                break;
            }
        }
        (self.final_counts(), Some(mon))
    }

    /// Colors `r0` uniformly chosen uncolored vertices red.
    pub fn add_red_seeds(&mut self, r0: u64) -> Result<(), ChainError> {
        let d = self.params.degree;
        let free = self.state.uncolored / d;
        if r0 > free {
            return Err(ChainError::SeedsExceedVertices {
                needed: r0,
                available: free,
            });
        }
        self.state.uncolored -= d * r0;
        self.state.red += d * r0;
        self.state.red_vertices += r0;
        Ok(())
    }

    /// Blue spreads alone from `k` vertices until it holds `b0_target`
    /// vertices, then `r0` red seeds are placed among the uncolored vertices.
    ///
    /// The returned chain keeps its step counter and `M`, so `X + Y + Z =
    /// M - 2n` still holds.
    pub fn warmup_blue<R: Rng + ?Sized>(
        params: ChainParams,
        k: u64,
        b0_target: u64,
        r0: u64,
        rng: &mut R,
    ) -> Result<Self, ChainError> {
        params.validate()?;
        if k == 0 || k >= b0_target || b0_target > params.n_vertices {
            return Err(ChainError::InvalidWarmup { k, target: b0_target });
        }
        if b0_target + r0 > params.n_vertices {
            return Err(ChainError::SeedsExceedVertices {
                needed: b0_target + r0,
                available: params.n_vertices,
            });
        }
        let mut chain = Self::init_single_color(params, k)?;
        while chain.state.blue_vertices < b0_target {
            if chain.step(rng).is_none() {
                return Err(ChainError::WarmupDied {
                    blue_vertices: chain.state.blue_vertices,
                    steps: chain.state.step,
                });
            }
        }
        chain.add_red_seeds(r0)?;
        Ok(chain)
    }
}
