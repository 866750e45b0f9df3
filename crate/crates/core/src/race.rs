//! Event-driven two-type first passage percolation on an explicit graph.
//!
//! Exponential clocks are memoryless, so instead of simulating one clock per
//! edge end the race keeps, for every uncolored vertex, how many blue and how
//! many red edge ends point into it. The next capture is blue with
//! probability `beta * B / (beta * B + rho * R)` (aggregate multiplicities
//! `B`, `R`; red rate `rho`), and within a color the captured vertex is drawn
//! proportionally to its multiplicity. Both draws go through Fenwick trees,
//! so an event costs `O(degree * log N)`.

use std::io::Write;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{make_torus, sample_configuration_multigraph, GraphError, SamplingMode, SpreadGraph};

#[derive(Debug, Error)]
pub enum RaceError {
    #[error("rates must be positive and finite (beta = {beta}, red rate = {red_rate})")]
    InvalidRate { beta: f64, red_rate: f64 },
    #[error("vertex {0} is in both seed sets")]
    OverlappingSeeds(usize),
    #[error("vertex {0} listed twice")]
    DuplicateSeed(usize),
    #[error("no seed vertices")]
    NoSeeds,
    #[error("vertex {vertex} out of range for {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("red seed {0} was captured by blue during the head start")]
    RedSeedCaptured(usize),
    #[error("blue stopped at {reached} vertices before reaching {target}")]
    HeadStartStalled { reached: usize, target: usize },
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(f64),
    #[error("blue target {target} leaves no room for a red seed among {n} vertices")]
    NoRoomForRed { target: usize, n: usize },
    #[error("{b0} + {r0} seeds exceed {n} vertices")]
    SeedsExceedVertices { b0: usize, r0: usize, n: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Color {
    Uncolored,
    Blue,
    Red,
}

impl Color {
    pub fn as_str(self) -> &'static str {
        match self {
            Color::Uncolored => "uncolored",
            Color::Blue => "blue",
            Color::Red => "red",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum HeadStart {
    None,
    /// Blue spreads alone until it holds this many vertices.
    UntilBlueCount(usize),
    /// Blue spreads alone for this much continuous time.
    Duration(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RaceConfig {
    pub beta: f64,
    /// Rate of red clocks; only `beta / red_rate` affects final colorings.
    pub red_rate: f64,
    pub blue_seeds: Vec<usize>,
    pub red_seeds: Vec<usize>,
    pub head_start: HeadStart,
    pub record_times: bool,
}

impl RaceConfig {
    pub fn new(beta: f64, blue_seeds: Vec<usize>, red_seeds: Vec<usize>) -> Self {
        Self { beta, red_rate: 1.0, blue_seeds, red_seeds, head_start: HeadStart::None, record_times: false }
    }

    pub fn with_head_start(mut self, head_start: HeadStart) -> Self {
        self.head_start = head_start;
        self
    }

    pub fn with_red_rate(mut self, red_rate: f64) -> Self {
        self.red_rate = red_rate;
        self
    }

    pub fn recording_times(mut self) -> Self {
        self.record_times = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColoringResult {
    pub colors: Vec<Color>,
    pub b_bar: usize,
    pub r_bar: usize,
    pub uncolored: usize,
    pub events: u64,
    pub capture_times: Option<Vec<f64>>,
}

impl ColoringResult {
    /// CSV dump `vertex,color,capture_time`; the time is empty when not
    /// recorded or when the vertex stayed uncolored.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "vertex,color,capture_time")?;
        for (v, c) in self.colors.iter().enumerate() {
            let t = match (&self.capture_times, c) {
                (Some(times), Color::Blue | Color::Red) => times[v].to_string(),
                _ => String::new(),
            };
            writeln!(out, "{v},{},{t}", c.as_str())?;
        }
        Ok(())
    }
}

/// Fenwick tree over non-negative integer weights.
#[derive(Debug, Clone)]
struct Fenwick {
    tree: Vec<u64>,
    values: Vec<u64>,
    total: u64,
    top: usize,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        let top = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        Self { tree: vec![0; n + 1], values: vec![0; n], total: 0, top }
    }

    fn add(&mut self, i: usize, delta: u64) {
        self.values[i] += delta;
        self.total += delta;
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
    }

    fn clear(&mut self, i: usize) {
        let v = self.values[i];
        if v == 0 {
            return;
        }
        self.values[i] = 0;
        self.total -= v;
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] -= v;
            j += j & j.wrapping_neg();
        }
    }

    /// Index `i` with `prefix(i) <= target < prefix(i + 1)`.
    fn find(&self, mut target: u64) -> usize {
        let mut pos = 0;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}

/// A race in progress. Seeds can be added between phases, which is how head
/// starts are implemented.
pub struct Race<'g, G: SpreadGraph + ?Sized> {
    graph: &'g G,
    beta: f64,
    red_rate: f64,
    colors: Vec<Color>,
    blue_in: Fenwick,
    red_in: Fenwick,
    blue_count: usize,
    red_count: usize,
    time: f64,
    events: u64,
    capture_times: Option<Vec<f64>>,
}

impl<'g, G: SpreadGraph + ?Sized> Race<'g, G> {
    pub fn new(graph: &'g G, beta: f64, red_rate: f64, record_times: bool) -> Result<Self, RaceError> {
        let ok = |r: f64| r > 0.0 && r.is_finite();
        if !ok(beta) || !ok(red_rate) {
            return Err(RaceError::InvalidRate { beta, red_rate });
        }
        let n = graph.num_vertices();
        Ok(Self {
            graph,
            beta,
            red_rate,
            colors: vec![Color::Uncolored; n],
            blue_in: Fenwick::new(n),
            red_in: Fenwick::new(n),
            blue_count: 0,
            red_count: 0,
            time: 0.0,
            events: 0,
            capture_times: record_times.then(|| vec![f64::NAN; n]),
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn blue_count(&self) -> usize {
        self.blue_count
    }

    pub fn red_count(&self) -> usize {
        self.red_count
    }

    pub fn color(&self, v: usize) -> Color {
        self.colors[v]
    }

    pub fn uncolored_vertices(&self) -> Vec<usize> {
        (0..self.colors.len()).filter(|&v| self.colors[v] == Color::Uncolored).collect()
    }

    fn capture(&mut self, v: usize, c: Color) {
        self.colors[v] = c;
        self.blue_in.clear(v);
        self.red_in.clear(v);
        match c {
            Color::Blue => self.blue_count += 1,
            Color::Red => self.red_count += 1,
            Color::Uncolored => unreachable!(),
        }
        if let Some(times) = &mut self.capture_times {
            times[v] = self.time;
        }
        let colors = &self.colors;
        let tree = if c == Color::Blue { &mut self.blue_in } else { &mut self.red_in };
        self.graph.for_each_neighbor(v, &mut |w, m| {
            if colors[w] == Color::Uncolored {
                tree.add(w, m as u64);
            }
        });
    }

    /// Colors an uncolored vertex directly (a seed).
    pub fn place_seed(&mut self, v: usize, c: Color) -> Result<(), RaceError> {
        let n = self.colors.len();
        if v >= n {
            return Err(RaceError::VertexOutOfRange { vertex: v, n });
        }
        match self.colors[v] {
            Color::Uncolored => {
                self.capture(v, c);
                Ok(())
            }
            Color::Blue if c == Color::Red => Err(RaceError::RedSeedCaptured(v)),
            _ => Err(RaceError::DuplicateSeed(v)),
        }
    }

    fn rates(&self) -> (f64, f64) {
        (self.beta * self.blue_in.total as f64, self.red_rate * self.red_in.total as f64)
    }

    fn holding_time<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
        -(1.0 - rng.random::<f64>()).ln() / rate
    }

    fn capture_next<R: Rng + ?Sized>(&mut self, rng: &mut R, blue_rate: f64, red_rate: f64) -> (usize, Color) {
        let blue = rng.random::<f64>() * (blue_rate + red_rate) < blue_rate;
        let (tree, c) = if blue { (&self.blue_in, Color::Blue) } else { (&self.red_in, Color::Red) };
        let v = tree.find(rng.random_range(0..tree.total));
        self.events += 1;
        self.capture(v, c);
        (v, c)
    }

    /// Next capture, or `None` when no uncolored vertex touches a colored one.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<(usize, Color)> {
        let (b, r) = self.rates();
        if b + r == 0.0 {
            return None;
        }
        self.time += Self::holding_time(rng, b + r);
        Some(self.capture_next(rng, b, r))
    }

    /// Runs until blue holds `target` vertices; `false` if the race stalls.
    pub fn run_until_blue<R: Rng + ?Sized>(&mut self, target: usize, rng: &mut R) -> bool {
        while self.blue_count < target {
            if self.step(rng).is_none() {
                return false;
            }
        }
        true
    }

    /// Runs for `duration` units of continuous time.
    pub fn run_for<R: Rng + ?Sized>(&mut self, duration: f64, rng: &mut R) {
        let end = self.time + duration;
        loop {
            let (b, r) = self.rates();
            if b + r == 0.0 {
                break;
            }
            let t = self.time + Self::holding_time(rng, b + r);
            if t > end {
                break;
            }
            self.time = t;
            self.capture_next(rng, b, r);
        }
        self.time = end;
    }

    pub fn run_to_end<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        while self.step(rng).is_some() {}
    }

    pub fn finish(self) -> ColoringResult {
        let n = self.colors.len();
        ColoringResult {
            b_bar: self.blue_count,
            r_bar: self.red_count,
            uncolored: n - self.blue_count - self.red_count,
            events: self.events,
            capture_times: self.capture_times,
            colors: self.colors,
        }
    }
}

fn check_seeds(n: usize, config: &RaceConfig) -> Result<(), RaceError> {
    if config.blue_seeds.is_empty() && config.red_seeds.is_empty() {
        return Err(RaceError::NoSeeds);
    }
    let mut seen = vec![0u8; n];
    for (set, mark) in [(&config.blue_seeds, 1u8), (&config.red_seeds, 2u8)] {
        for &v in set {
            if v >= n {
                return Err(RaceError::VertexOutOfRange { vertex: v, n });
            }
            match seen[v] {
                0 => seen[v] = mark,
                m if m == mark => return Err(RaceError::DuplicateSeed(v)),
                _ => return Err(RaceError::OverlappingSeeds(v)),
            }
        }
    }
    Ok(())
}

/// Runs the race described by `config` to completion.
pub fn simulate_race<G, R>(graph: &G, config: &RaceConfig, rng: &mut R) -> Result<ColoringResult, RaceError>
where
    G: SpreadGraph + ?Sized,
    R: Rng + ?Sized,
{
    check_seeds(graph.num_vertices(), config)?;
    let mut race = Race::new(graph, config.beta, config.red_rate, config.record_times)?;
    for &v in &config.blue_seeds {
        race.place_seed(v, Color::Blue)?;
    }
    match config.head_start {
        HeadStart::None => {}
        HeadStart::UntilBlueCount(target) => {
            if !race.run_until_blue(target, rng) {
                return Err(RaceError::HeadStartStalled { reached: race.blue_count(), target });
            }
        }
        HeadStart::Duration(t) => race.run_for(t, rng),
    }
    for &v in &config.red_seeds {
        race.place_seed(v, Color::Red)?;
    }
    race.run_to_end(rng);
    Ok(race.finish())
}

/// Blue grows alone on the torus from one uniform vertex until it holds
/// `ceil(epsilon N)` vertices; then one uniform uncolored vertex turns red and
/// the race runs to completion.
pub fn simulate_torus_experiment<R: Rng + ?Sized>(
    side: usize,
    dim: usize,
    epsilon: f64,
    beta: f64,
    rng: &mut R,
) -> Result<ColoringResult, RaceError> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(RaceError::InvalidEpsilon(epsilon));
    }
    let torus = make_torus(side, dim)?;
    let n = torus.num_vertices();
    let target = ((epsilon * n as f64).ceil() as usize).max(1);
    if target >= n {
        return Err(RaceError::NoRoomForRed { target, n });
    }
    warm_start_race(&torus, beta, 1, target, 1, rng)
}

/// Blue grows alone from `k` uniform vertices until it holds `b0_target`;
/// then `r0` uniform uncolored vertices turn red and the race runs to
/// completion.
pub fn warm_start_race<G, R>(
    graph: &G,
    beta: f64,
    k: usize,
    b0_target: usize,
    r0: usize,
    rng: &mut R,
) -> Result<ColoringResult, RaceError>
where
    G: SpreadGraph + ?Sized,
    R: Rng + ?Sized,
{
    let n = graph.num_vertices();
    if k == 0 {
        return Err(RaceError::NoSeeds);
    }
    if b0_target + r0 > n || k > b0_target {
        return Err(RaceError::SeedsExceedVertices { b0: b0_target, r0, n });
    }
    let mut race = Race::new(graph, beta, 1.0, false)?;
    for v in index::sample(rng, n, k) {
        race.place_seed(v, Color::Blue)?;
    }
    if !race.run_until_blue(b0_target, rng) {
        return Err(RaceError::HeadStartStalled { reached: race.blue_count(), target: b0_target });
    }
    let free = race.uncolored_vertices();
    for i in index::sample(rng, free.len(), r0) {
        race.place_seed(free[i], Color::Red)?;
    }
    race.run_to_end(rng);
    Ok(race.finish())
}

/// Samples a configuration-model graph, places disjoint uniform seed sets
/// and races on it.
pub fn race_on_configuration_model<R: Rng + ?Sized>(
    n: usize,
    degree: usize,
    b0: usize,
    r0: usize,
    beta: f64,
    mode: SamplingMode,
    rng: &mut R,
) -> Result<ColoringResult, RaceError> {
    if b0 + r0 > n {
        return Err(RaceError::SeedsExceedVertices { b0, r0, n });
    }
    let graph = sample_configuration_multigraph(n, degree, rng, mode)?;
    let seeds = index::sample(rng, n, b0 + r0).into_vec();
    let config = RaceConfig::new(beta, seeds[..b0].to_vec(), seeds[b0..].to_vec());
    simulate_race(&graph, &config, rng)
}
