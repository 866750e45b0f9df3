//! Competing first passage percolation on random regular graphs and tori.
//!
//! Two infections spread from disjoint seed sets, blue at rate `beta` and red
//! at rate 1, and each vertex keeps the color that reaches it first. The
//! crate offers several interchangeable ways to simulate this and the
//! closed-form predictions to compare them against:
//!
//! * [`chain`]: the half-edge chain, which simulates the race on a uniform
//!   random `d`-regular multigraph while only tracking counts.
//! * [`graph`] and [`race`]: explicit graphs (configuration model, torus) and
//!   an event-driven race that runs on any [`graph::SpreadGraph`].
//! * [`urn`]: finite and diagonal Pólya urns with an exact recursion.
//! * [`theory`]: `φ_β`, share integrals, exponent verdicts and `n₀`.
//! * [`stats`]: regression, KS and TV distances, summaries.
//! * [`cli`]: configuration, deterministic parallel trials and CSV/JSON output.

pub mod chain;
pub mod cli;
pub mod graph;
pub mod race;
pub mod stats;
pub mod theory;
pub mod trials;
pub mod urn;

pub use chain::{ChainParams, ChainState, FinalCounts, HalfEdgeChain, KMonitor, KMonitorConfig, StepOutcome};
pub use graph::{make_torus, sample_configuration_multigraph, Multigraph, SamplingMode, SpreadGraph, TorusGraph};
pub use race::{simulate_race, simulate_torus_experiment, Color, ColoringResult, HeadStart, RaceConfig};
pub use trials::{derive_seed, run_trials, trial_rng, TrialRng};
