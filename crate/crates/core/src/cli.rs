//! Experiment configuration, parallel trial execution and CSV/JSON output
//! behind the `fpplab` binary.
//!
//! Every subcommand accepts `--config PATH` (a JSON [`ExperimentConfig`]);
//! flags given on the command line override fields from the file.
//!
//! CSV columns are fixed per record type and floats use Rust's shortest
//! round-trip formatting. The last column, `wall_time_s`, is the only
//! non-deterministic one: with the same config, every other byte is identical
//! for any worker count.
//!
//! Exit codes: 0 on success, 1 on runtime errors, 2 on invalid configuration.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::{ChainError, ChainParams, HalfEdgeChain, KMonitorConfig};
use crate::graph::SamplingMode;
use crate::race::{race_on_configuration_model, simulate_torus_experiment, warm_start_race};
use crate::stats::{empirical_pmf, fit_loglog_slope, median, summarize_trials, tv_distance, FieldSummary, LogLogFit};
use crate::theory::{self, compute_n0, predict_exponents, BoundConstants, ExponentCase, QuadratureConfig, Verdict};
use crate::trials::{derive_seed, run_trials};
use crate::urn::{diag_urn_run, dp_urn_distribution, run_urn, DiagUrnScheme, FiniteUrnScheme, DEFAULT_DP_CAP};

/// Default directory for sweep shards when `--out` is absent.
pub const OUT_DIR_ENV: &str = "FPPLAB_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Predict,
    RrgChain,
    RrgGraph,
    Torus,
    Urn,
    DiagUrn,
    Sweep,
    EstimateExponent,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::Predict => "predict",
            ExperimentKind::RrgChain => "rrg-chain",
            ExperimentKind::RrgGraph => "rrg-graph",
            ExperimentKind::Torus => "torus",
            ExperimentKind::Urn => "urn",
            ExperimentKind::DiagUrn => "diag-urn",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::EstimateExponent => "estimate-exponent",
        }
    }

    fn simulates(self) -> bool {
        !matches!(self, ExperimentKind::Predict | ExperimentKind::EstimateExponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Seeding regime for exponent predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PredictCase {
    /// `B_0 = N^α1`, `R_0 = N^α2`.
    I,
    /// Both seed sets of constant size.
    Ii,
    /// Constant blue, `R_0 = N^α2`.
    Iii,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    #[default]
    Median,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RecordField {
    BBar,
    RBar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub trials: u64,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub n: Option<u64>,
    /// `"start:end:xK"`, `"start:end:+K"` or a comma list.
    pub n_grid: Option<String>,
    pub degree: u64,
    pub beta: f64,
    pub b0: Option<u64>,
    pub r0: Option<u64>,
    /// `B_0 = ceil(N^b0_exp)` when `b0` is absent.
    pub b0_exp: Option<f64>,
    pub r0_exp: Option<f64>,
    /// Blue grows alone from this many vertices up to `B_0` before red is placed.
    pub warmup_k: Option<u64>,
    /// Reject multigraphs until the sample is simple (rrg-graph).
    pub simple: bool,
    pub side: Option<usize>,
    pub dim: usize,
    pub epsilon: Option<f64>,
    pub a: Option<u64>,
    pub b: Option<u64>,
    pub s0: Option<u64>,
    pub z0: Option<u64>,
    pub dp_check: bool,
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub steps: Option<u64>,
    pub case: Option<PredictCase>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    pub sweep_kind: Option<ExperimentKind>,
    pub input: Option<PathBuf>,
    pub field: Option<RecordField>,
    pub statistic: Statistic,
    /// Track `max |K_n/K_0 - 1|` up to `n₀` (rrg-chain).
    pub monitor_k: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: None,
            seed: None,
            trials: 1,
            workers: None,
            out: None,
            format: OutputFormat::Csv,
            n: None,
            n_grid: None,
            degree: 3,
            beta: 1.0,
            b0: None,
            r0: None,
            b0_exp: None,
            r0_exp: None,
            warmup_k: None,
            simple: false,
            side: None,
            dim: 2,
            epsilon: None,
            a: None,
            b: None,
            s0: None,
            z0: None,
            dp_check: false,
            alpha: None,
            delta: None,
            steps: None,
            case: None,
            alpha1: None,
            alpha2: None,
            sweep_kind: None,
            input: None,
            field: None,
            statistic: Statistic::Median,
            monitor_k: false,
        }
    }
}

fn seed_size(n: u64, count: Option<u64>, exp: Option<f64>) -> Option<u64> {
    count.or_else(|| exp.map(|e| (n as f64).powf(e).ceil() as u64))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn kind_str(&self) -> &'static str {
        self.kind.map(ExperimentKind::as_str).unwrap_or("")
    }

    /// `(B_0, R_0)` for a graph of `n` vertices.
    pub fn seed_sizes(&self, n: u64) -> (Option<u64>, Option<u64>) {
        (seed_size(n, self.b0, self.b0_exp), seed_size(n, self.r0, self.r0_exp))
    }

    /// The exponent regime implied by the seed sizes.
    pub fn exponent_case(&self) -> Option<ExponentCase> {
        if let Some(case) = self.case {
            return match case {
                PredictCase::I => Some(ExponentCase::BothPolynomial { alpha1: self.alpha1?, alpha2: self.alpha2? }),
                PredictCase::Ii => Some(ExponentCase::BothConstant),
                PredictCase::Iii => Some(ExponentCase::BlueConstantRedPolynomial { alpha2: self.alpha2? }),
            };
        }
        match (self.b0, self.b0_exp, self.r0, self.r0_exp) {
            (Some(_), _, Some(_), _) => Some(ExponentCase::BothConstant),
            (None, Some(a1), None, Some(a2)) => Some(ExponentCase::BothPolynomial { alpha1: a1, alpha2: a2 }),
            (Some(_), _, None, Some(a2)) => Some(ExponentCase::BlueConstantRedPolynomial { alpha2: a2 }),
            _ => None,
        }
    }

    /// Copy of a sweep config targeting a single `n`.
    fn for_size(&self, n: u64, seed: u64) -> Self {
        Self {
            kind: self.sweep_kind,
            n: Some(n),
            n_grid: None,
            seed: Some(seed),
            out: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Args, Clone, Default)]
pub struct Flags {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed (mandatory for simulating kinds).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output file, or shard directory for sweeps.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long = "N", alias = "n")]
    pub n: Option<u64>,
    #[arg(long = "Ngrid", alias = "ngrid")]
    pub n_grid: Option<String>,
    #[arg(long = "d")]
    pub degree: Option<u64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long = "B0", alias = "b0")]
    pub b0: Option<u64>,
    #[arg(long = "R0", alias = "r0")]
    pub r0: Option<u64>,
    #[arg(long = "B0-exp", alias = "b0-exp")]
    pub b0_exp: Option<f64>,
    #[arg(long = "R0-exp", alias = "r0-exp")]
    pub r0_exp: Option<f64>,
    #[arg(long)]
    pub warmup_k: Option<u64>,
    #[arg(long)]
    pub simple: bool,
    #[arg(long)]
    pub side: Option<usize>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long = "a")]
    pub a: Option<u64>,
    #[arg(long = "b")]
    pub b: Option<u64>,
    #[arg(long = "S0", alias = "s0")]
    pub s0: Option<u64>,
    #[arg(long = "Z0", alias = "z0")]
    pub z0: Option<u64>,
    #[arg(long)]
    pub dp_check: bool,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long, value_enum)]
    pub case: Option<PredictCase>,
    #[arg(long)]
    pub alpha1: Option<f64>,
    #[arg(long)]
    pub alpha2: Option<f64>,
    /// Inner experiment of a sweep, or the kind to check for `validate`.
    #[arg(long, value_enum)]
    pub kind: Option<ExperimentKind>,
    /// Shard directory for estimate-exponent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub field: Option<RecordField>,
    #[arg(long, value_enum)]
    pub statistic: Option<Statistic>,
    #[arg(long)]
    pub monitor_k: bool,
}

#[derive(Debug, Subcommand, Clone)]
pub enum Command {
    /// Theory-side predictions (exponent verdict and/or share integral).
    Predict(Flags),
    /// Half-edge chain on a random regular graph.
    RrgChain(Flags),
    /// Explicit race on a sampled configuration-model graph.
    RrgGraph(Flags),
    /// Warm-started race on the discrete torus.
    Torus(Flags),
    /// Finite urn `(-a, 0; b-a, -b)`.
    Urn(Flags),
    /// Diagonal urn `(alpha, 0; 0, delta)`.
    DiagUrn(Flags),
    /// An rrg experiment over an N-grid, one shard per N.
    Sweep(Flags),
    /// Log-log slope of a per-N statistic from sweep shards.
    EstimateExponent(Flags),
    /// Report precondition violations without running.
    Validate(Flags),
}

#[derive(Debug, Parser)]
#[command(name = "fpplab", version, about = "Competing first passage percolation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

impl Flags {
    /// Loads `--config` if given, then applies the flags on top.
    pub fn into_config(self, kind: Option<ExperimentKind>) -> Result<ExperimentConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Validation(vec![format!("cannot read {}: {e}", path.display())]))?;
                ExperimentConfig::from_json(&text)
                    .map_err(|e| CliError::Validation(vec![format!("bad config {}: {e}", path.display())]))?
            }
            None => ExperimentConfig::default(),
        };
        match kind {
            Some(ExperimentKind::Sweep) => {
                cfg.kind = Some(ExperimentKind::Sweep);
                if self.kind.is_some() {
                    cfg.sweep_kind = self.kind;
                }
            }
            Some(k) => cfg.kind = Some(k),
            None => {
                if self.kind.is_some() {
                    cfg.kind = self.kind;
                }
            }
        }
        macro_rules! set {
            ($($f:ident),*) => { $( if let Some(v) = self.$f { cfg.$f = Some(v); } )* };
        }
        set!(seed, workers, out, n, n_grid, b0, r0, b0_exp, r0_exp, warmup_k, side, epsilon, a, b, s0, z0);
        set!(alpha, delta, steps, case, alpha1, alpha2, input, field);
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        if let Some(v) = self.degree {
            cfg.degree = v;
        }
        if let Some(v) = self.beta {
            cfg.beta = v;
        }
        if let Some(v) = self.dim {
            cfg.dim = v;
        }
        if let Some(v) = self.statistic {
            cfg.statistic = v;
        }
        cfg.simple |= self.simple;
        cfg.dp_check |= self.dp_check;
        cfg.monitor_k |= self.monitor_k;
        Ok(cfg)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Parses `"start:end:xK"` (geometric), `"start:end:+K"` (arithmetic) or
/// `"n1,n2,..."`.
pub fn parse_n_grid(text: &str) -> Result<Vec<u64>, String> {
    let bad = || format!("bad N-grid {text:?}");
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let start: u64 = parts[0].trim().parse().map_err(|_| bad())?;
        let end: u64 = parts[1].trim().parse().map_err(|_| bad())?;
        let step = parts[2].trim();
        let (geometric, k) = if let Some(k) = step.strip_prefix('x') {
            (true, k.parse::<u64>().map_err(|_| bad())?)
        } else if let Some(k) = step.strip_prefix('+') {
            (false, k.parse::<u64>().map_err(|_| bad())?)
        } else {
            return Err(bad());
        };
        if start == 0 || start > end || (geometric && k < 2) || (!geometric && k == 0) {
            return Err(bad());
        }
        let mut out = Vec::new();
        let mut v = start;
        while v <= end {
            out.push(v);
            v = if geometric { v.checked_mul(k) } else { v.checked_add(k) }.ok_or_else(bad)?;
        }
        Ok(out)
    } else {
        text.split(',').map(|s| s.trim().parse::<u64>().map_err(|_| bad())).collect()
    }
}

fn check_exponent(v: &mut Vec<String>, name: &str, a: Option<f64>) {
    if let Some(a) = a {
        if !(a > 0.0 && a < 1.0) {
            v.push(format!("{name} must lie in (0, 1), got {a}"));
        }
    }
}

fn validate_rrg(cfg: &ExperimentConfig, n: u64, v: &mut Vec<String>) {
    if let Err(e) = ChainParams::new(n, cfg.degree, cfg.beta) {
        v.push(e.to_string());
    }
    check_exponent(v, "B0 exponent", cfg.b0_exp);
    check_exponent(v, "R0 exponent", cfg.r0_exp);
    let (b0, r0) = cfg.seed_sizes(n);
    match (b0, r0) {
        (Some(b0), Some(r0)) => {
            if b0 == 0 {
                v.push("B0 must be at least 1".into());
            }
            if r0 == 0 {
                v.push("R0 must be at least 1".into());
            }
            if b0 + r0 > n {
                v.push(format!("B0 + R0 = {} exceeds N = {n}", b0 + r0));
            }
            if let Some(k) = cfg.warmup_k {
                if k == 0 || k >= b0 {
                    v.push(format!("warm-up needs 1 <= k < B0, got k = {k}, B0 = {b0}"));
                }
            }
        }
        _ => v.push("seed sizes need B0 (or B0-exp) and R0 (or R0-exp)".into()),
    }
}

/// Exhaustive precondition report; an empty list means the config is
/// runnable.
pub fn validate(cfg: &ExperimentConfig) -> Vec<String> {
    let mut v = Vec::new();
    let Some(kind) = cfg.kind else {
        v.push("missing experiment kind".into());
        return v;
    };
    if kind.simulates() {
        if cfg.seed.is_none() {
            v.push("master seed is mandatory (--seed)".into());
        }
        if cfg.trials == 0 {
            v.push("trials must be at least 1".into());
        }
    }
    if !(cfg.beta > 0.0 && cfg.beta.is_finite()) {
        v.push(format!("beta must be positive and finite, got {}", cfg.beta));
    }
    if cfg.workers == Some(0) {
        v.push("workers must be at least 1".into());
    }
    match kind {
        ExperimentKind::RrgChain | ExperimentKind::RrgGraph => match cfg.n {
            Some(n) => validate_rrg(cfg, n, &mut v),
            None => v.push("N is required".into()),
        },
        ExperimentKind::Torus => {
            match cfg.side {
                Some(s) if s >= 3 => {}
                _ => v.push("torus side must be given and at least 3".into()),
            }
            if cfg.dim == 0 {
                v.push("torus dim must be at least 1".into());
            }
            match cfg.epsilon {
                Some(e) if e > 0.0 && e < 1.0 => {}
                _ => v.push("epsilon must be given and lie in (0, 1)".into()),
            }
        }
        ExperimentKind::Urn => match (cfg.a, cfg.b, cfg.s0, cfg.z0) {
            (Some(a), Some(b), Some(s0), Some(z0)) => {
                if let Err(e) = FiniteUrnScheme::new(a, b, s0, z0) {
                    v.push(e.to_string());
                }
                if cfg.dp_check && s0 + z0 > DEFAULT_DP_CAP {
                    v.push(format!("dp-check needs M <= {DEFAULT_DP_CAP}, got {}", s0 + z0));
                }
            }
            _ => v.push("urn needs a, b, S0 and Z0".into()),
        },
        ExperimentKind::DiagUrn => {
            for (name, x) in [("alpha", cfg.alpha), ("delta", cfg.delta)] {
                match x {
                    Some(x) if x > 0.0 && x.is_finite() => {}
                    _ => v.push(format!("{name} must be given and positive")),
                }
            }
            if cfg.s0.unwrap_or(0) == 0 || cfg.z0.unwrap_or(0) == 0 {
                v.push("diag-urn needs S0 >= 1 and Z0 >= 1".into());
            }
            if cfg.steps.unwrap_or(0) == 0 {
                v.push("diag-urn needs steps >= 1".into());
            }
        }
        ExperimentKind::Predict => {
            match cfg.case {
                Some(PredictCase::I) => {
                    if cfg.alpha1.is_none() || cfg.alpha2.is_none() {
                        v.push("case i needs alpha1 and alpha2".into());
                    }
                }
                Some(PredictCase::Iii) => {
                    if cfg.alpha2.is_none() {
                        v.push("case iii needs alpha2".into());
                    }
                }
                _ => {}
            }
            check_exponent(&mut v, "alpha1", cfg.alpha1);
            check_exponent(&mut v, "alpha2", cfg.alpha2);
            if cfg.case.is_none() && cfg.n.is_none() {
                v.push("predict needs --case or N with seed sizes".into());
            }
            if let Some(n) = cfg.n {
                validate_rrg(cfg, n, &mut v);
            }
        }
        ExperimentKind::Sweep => {
            match cfg.sweep_kind {
                Some(ExperimentKind::RrgChain | ExperimentKind::RrgGraph) => {}
                _ => v.push("sweep needs --kind rrg-chain or rrg-graph".into()),
            }
            match cfg.n_grid.as_deref().map(parse_n_grid) {
                Some(Ok(grid)) if !grid.is_empty() => {
                    for n in grid {
                        validate_rrg(cfg, n, &mut v);
                    }
                }
                Some(Err(e)) => v.push(e),
                _ => v.push("sweep needs an N-grid".into()),
            }
        }
        ExperimentKind::EstimateExponent => {
            if cfg.input.is_none() && cfg.out.is_none() {
                v.push("estimate-exponent needs --input (shard directory)".into());
            }
        }
    }
    v.dedup();
    v
}

/// One trial of an rrg or torus experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub kind: String,
    pub n: u64,
    pub degree: u64,
    pub beta: f64,
    pub b0: u64,
    pub r0: u64,
    pub warmup_k: Option<u64>,
    pub b_bar: u64,
    pub r_bar: u64,
    pub uncolored: u64,
    /// Chain steps or race events.
    pub steps: u64,
    pub status: String,
    /// `max |K_n/K_0 - 1|` for `n <= n₀`, when monitored.
    pub k_max_dev: Option<f64>,
    pub wall_time_s: f64,
}

impl TrialRecord {
    /// `(R̄ - R_0) / (N - R_0 - B_0)`.
    pub fn red_share(&self) -> f64 {
        let free = self.n as f64 - (self.r0 + self.b0) as f64;
        (self.r_bar as f64 - self.r0 as f64) / free
    }

    pub fn field(&self, f: RecordField) -> u64 {
        match f {
            RecordField::BBar => self.b_bar,
            RecordField::RBar => self.r_bar,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrnRecord {
    pub trial: u64,
    pub seed: u64,
    pub a: u64,
    pub b: u64,
    pub s0: u64,
    pub z0: u64,
    pub sigma: Option<u64>,
    pub absorbed_at: u64,
    pub final_s: u64,
    pub final_z: u64,
    /// `max |K_n - 1|` for `n <= (M - M^(1/3) ln M) / a`.
    pub k_max_dev: f64,
    pub l_max_dev: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagUrnRecord {
    pub trial: u64,
    pub seed: u64,
    pub alpha: f64,
    pub delta: f64,
    pub s0: u64,
    pub z0: u64,
    pub steps: u64,
    pub x: f64,
    pub y: f64,
    pub s_fraction: f64,
    /// `n^(-alpha/delta) S_n`.
    pub scaled_s: f64,
    pub wall_time_s: f64,
}

/// What a run produced, before anything is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub csv: Option<String>,
    pub json: String,
}

fn to_csv<T: Serialize>(records: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).map_err(runtime)?;
    }
    let bytes = w.into_inner().map_err(runtime)?;
    String::from_utf8(bytes).map_err(runtime)
}

fn pretty<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(runtime)
}

#[derive(Debug, Serialize)]
struct RunSummary<'a, T: Serialize> {
    kind: &'a str,
    seed: Option<u64>,
    trials: u64,
    summary: BTreeMap<String, FieldSummary>,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    extra: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    records: Option<&'a [T]>,
}

fn package<T: Serialize>(
    cfg: &ExperimentConfig,
    records: &[T],
    summary: BTreeMap<String, FieldSummary>,
    extra: serde_json::Value,
) -> Result<Artifacts, CliError> {
    let with_records = cfg.format == OutputFormat::Json;
    let doc = RunSummary {
        kind: cfg.kind_str(),
        seed: cfg.seed,
        trials: cfg.trials,
        summary,
        extra,
        records: with_records.then_some(records),
    };
    Ok(Artifacts {
        csv: (!with_records).then(|| to_csv(records)).transpose()?,
        json: pretty(&doc)?,
    })
}

fn summarize_values(fields: Vec<(&str, Vec<f64>)>) -> BTreeMap<String, FieldSummary> {
    fields
        .into_iter()
        .filter_map(|(k, v)| {
            let v: Vec<f64> = v.into_iter().filter(|x| x.is_finite()).collect();
            FieldSummary::of(&v).map(|s| (k.to_string(), s))
        })
        .collect()
}

fn rrg_records(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>, CliError> {
    let kind = cfg.kind.expect("validated");
    let n = cfg.n.expect("validated");
    let (b0, r0) = cfg.seed_sizes(n);
    let (b0, r0) = (b0.expect("validated"), r0.expect("validated"));
    let params = ChainParams::new(n, cfg.degree, cfg.beta).map_err(runtime)?;
    let monitor = if cfg.monitor_k && kind == ExperimentKind::RrgChain {
        let m = params.half_edges();
        let d = cfg.degree;
        let n0 = compute_n0(d * b0, d * r0, cfg.beta, m, (m as f64).ln()).map_err(runtime)?;
        Some(KMonitorConfig::for_total(m).with_horizon(n0.n0))
    } else {
        None
    };
    let mode = if cfg.simple { SamplingMode::simple() } else { SamplingMode::Multigraph };
    let results = run_trials(cfg.seed.expect("validated"), cfg.trials, cfg.workers, |i, seed, rng| {
        let start = Instant::now();
        let mut rec = TrialRecord {
            trial: i,
            seed,
            kind: kind.as_str().to_string(),
            n,
            degree: cfg.degree,
            beta: cfg.beta,
            b0,
            r0,
            warmup_k: cfg.warmup_k,
            b_bar: 0,
            r_bar: 0,
            uncolored: 0,
            steps: 0,
            status: "ok".into(),
            k_max_dev: None,
            wall_time_s: 0.0,
        };
        match kind {
            ExperimentKind::RrgChain => {
                let chain = match cfg.warmup_k {
                    Some(k) => HalfEdgeChain::warmup_blue(params, k, b0, r0, rng),
                    None => HalfEdgeChain::init_uniform(params, b0, r0),
                };
                match chain {
                    Ok(mut chain) => {
                        let (fc, mon) = chain.run_to_absorption(rng, monitor.as_ref());
                        rec.b_bar = fc.b_bar;
                        rec.r_bar = fc.r_bar;
                        rec.uncolored = fc.uncolored;
                        rec.steps = fc.steps;
                        rec.k_max_dev = mon.map(|m| m.max_rel_deviation);
                    }
                    Err(ChainError::WarmupDied { blue_vertices, steps }) => {
                        rec.b_bar = blue_vertices;
                        rec.uncolored = n - blue_vertices;
                        rec.steps = steps;
                        rec.status = "warmup_died".into();
                    }
                    Err(e) => return Err(runtime(e)),
                }
            }
            _ => {
                let res = match cfg.warmup_k {
                    Some(k) => crate::graph::sample_configuration_multigraph(n as usize, cfg.degree as usize, rng, mode)
                        .map_err(crate::race::RaceError::from)
                        .and_then(|g| warm_start_race(&g, cfg.beta, k as usize, b0 as usize, r0 as usize, rng)),
                    None => race_on_configuration_model(n as usize, cfg.degree as usize, b0 as usize, r0 as usize, cfg.beta, mode, rng),
                };
                match res {
                    Ok(c) => {
                        rec.b_bar = c.b_bar as u64;
                        rec.r_bar = c.r_bar as u64;
                        rec.uncolored = c.uncolored as u64;
                        rec.steps = c.events;
                    }
                    Err(crate::race::RaceError::HeadStartStalled { reached, .. }) => {
                        rec.b_bar = reached as u64;
                        rec.uncolored = n - reached as u64;
                        rec.status = "warmup_died".into();
                    }
                    Err(e) => return Err(runtime(e)),
                }
            }
        }
        debug_assert_eq!(rec.b_bar + rec.r_bar + rec.uncolored, rec.n);
        rec.wall_time_s = start.elapsed().as_secs_f64();
        Ok(rec)
    });
    results.into_iter().collect()
}

fn run_rrg(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let records = rrg_records(cfg)?;
    let extra = match cfg.exponent_case().map(|c| predict_exponents(c, cfg.beta)) {
        Some(Ok(v)) => serde_json::json!({ "verdict": v }),
        _ => serde_json::Value::Null,
    };
    package(cfg, &records, summarize_trials(&records), extra)
}

fn run_torus(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let side = cfg.side.expect("validated");
    let eps = cfg.epsilon.expect("validated");
    let dim = cfg.dim;
    let n = (side as u64).pow(dim as u32);
    let b0 = ((eps * n as f64).ceil() as u64).max(1);
    let results = run_trials(cfg.seed.expect("validated"), cfg.trials, cfg.workers, |i, seed, rng| {
        let start = Instant::now();
        let res = simulate_torus_experiment(side, dim, eps, cfg.beta, rng).map_err(runtime)?;
        Ok(TrialRecord {
            trial: i,
            seed,
            kind: "torus".into(),
            n,
            degree: 2 * dim as u64,
            beta: cfg.beta,
            b0,
            r0: 1,
            warmup_k: Some(1),
            b_bar: res.b_bar as u64,
            r_bar: res.r_bar as u64,
            uncolored: res.uncolored as u64,
            steps: res.events,
            status: "ok".into(),
            k_max_dev: None,
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    });
    let records: Vec<TrialRecord> = results.into_iter().collect::<Result<_, CliError>>()?;
    package(cfg, &records, summarize_trials(&records), serde_json::Value::Null)
}

fn run_finite_urn(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let scheme = FiniteUrnScheme::new(cfg.a.unwrap(), cfg.b.unwrap(), cfg.s0.unwrap(), cfg.z0.unwrap()).map_err(runtime)?;
    let m = scheme.total() as f64;
    let horizon = ((m - m.cbrt() * m.ln()) / scheme.a as f64).max(0.0) as u64;
    let stride = (scheme.total() >> 14).max(1);
    let records: Vec<UrnRecord> = run_trials(cfg.seed.unwrap(), cfg.trials, cfg.workers, |i, seed, rng| {
        let start = Instant::now();
        let traj = run_urn(&scheme, stride, rng);
        let last = traj.final_sample();
        UrnRecord {
            trial: i,
            seed,
            a: scheme.a,
            b: scheme.b,
            s0: scheme.s0,
            z0: scheme.z0,
            sigma: traj.sigma,
            absorbed_at: traj.absorbed_at,
            final_s: last.s,
            final_z: last.z,
            k_max_dev: traj.max_k_deviation(horizon),
            l_max_dev: traj.max_l_deviation(),
            wall_time_s: start.elapsed().as_secs_f64(),
        }
    });
    let mut extra = serde_json::Value::Null;
    if cfg.dp_check {
        let dist = dp_urn_distribution(&scheme, DEFAULT_DP_CAP).map_err(runtime)?;
        let exact = dist.sigma_with_never();
        let never = exact.len() as u64 - 1;
        let outcomes: Vec<u64> = records.iter().map(|r| r.sigma.unwrap_or(never).min(never)).collect();
        let mut emp = empirical_pmf(&outcomes);
        // Outcomes beyond `never` are impossible; pad to the same support.
        emp.resize(exact.len().max(emp.len()), 0.0);
        let tv = tv_distance(&emp, &exact).map_err(runtime)?;
        eprintln!("dp_check: TV(sigma) = {tv}");
        extra = serde_json::json!({ "dp_tv_sigma": tv });
    }
    let summary = summarize_values(vec![
        ("absorbed_at", records.iter().map(|r| r.absorbed_at as f64).collect()),
        ("sigma", records.iter().filter_map(|r| r.sigma.map(|s| s as f64)).collect()),
        ("k_max_dev", records.iter().map(|r| r.k_max_dev).collect()),
        ("l_max_dev", records.iter().map(|r| r.l_max_dev).collect()),
    ]);
    package(cfg, &records, summary, extra)
}

fn run_diag_urn(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let (alpha, delta) = (cfg.alpha.unwrap(), cfg.delta.unwrap());
    let (s0, z0, steps) = (cfg.s0.unwrap(), cfg.z0.unwrap(), cfg.steps.unwrap());
    let scheme = DiagUrnScheme::janson(alpha, delta, s0 as f64, z0 as f64);
    let scale = (steps as f64).powf(-alpha / delta);
    let results = run_trials(cfg.seed.unwrap(), cfg.trials, cfg.workers, |i, seed, rng| {
        let start = Instant::now();
        let out = diag_urn_run(&scheme, steps, rng).map_err(runtime)?;
        Ok(DiagUrnRecord {
            trial: i,
            seed,
            alpha,
            delta,
            s0,
            z0,
            steps,
            x: out.x,
            y: out.y,
            s_fraction: out.s_fraction(),
            scaled_s: out.s() * scale,
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    });
    let records: Vec<DiagUrnRecord> = results.into_iter().collect::<Result<_, CliError>>()?;
    let summary = summarize_values(vec![
        ("s_fraction", records.iter().map(|r| r.s_fraction).collect()),
        ("scaled_s", records.iter().map(|r| r.scaled_s).collect()),
    ]);
    package(cfg, &records, summary, serde_json::Value::Null)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictReport {
    pub verdict: Option<Verdict>,
    pub share_ratio: Option<f64>,
    pub bounds: Option<(f64, f64)>,
}

fn run_predict(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let verdict = cfg.exponent_case().map(|c| predict_exponents(c, cfg.beta)).transpose().map_err(runtime)?;
    let mut report = PredictReport { verdict, share_ratio: None, bounds: None };
    if let Some(n) = cfg.n {
        let (b0, r0) = cfg.seed_sizes(n);
        let (b0, r0) = (b0.unwrap(), r0.unwrap());
        let d = cfg.degree;
        let m = d * n;
        let p = theory::predict_share(
            cfg.beta,
            d * b0,
            d * r0,
            m - d * (b0 + r0),
            m,
            d,
            &QuadratureConfig::default(),
            BoundConstants::default(),
        )
        .map_err(runtime)?;
        report.share_ratio = Some(p.share_ratio);
        report.bounds = Some(p.bounds);
    }
    Ok(Artifacts { csv: None, json: pretty(&report)? })
}

fn shard_path(dir: &Path, n: u64) -> PathBuf {
    dir.join(format!("shard_n{n}.csv"))
}

fn read_records(path: &Path) -> Result<Vec<TrialRecord>, CliError> {
    let mut r = csv::Reader::from_path(path).map_err(runtime)?;
    r.deserialize().collect::<Result<Vec<TrialRecord>, _>>().map_err(runtime)
}

fn shard_complete(path: &Path, trials: u64) -> bool {
    path.exists() && read_records(path).map(|r| r.len() as u64 == trials).unwrap_or(false)
}

fn sweep_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("fpplab-sweep"))
}

fn default_field(cfg: &ExperimentConfig) -> RecordField {
    cfg.field.unwrap_or(match cfg.exponent_case().map(|c| predict_exponents(c, cfg.beta)) {
        Some(Ok(Verdict::BlueMinority { .. })) => RecordField::BBar,
        _ => RecordField::RBar,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub field: RecordField,
    pub statistic: Statistic,
    /// `(N, statistic)` per shard.
    pub points: Vec<(f64, f64)>,
    pub fit: LogLogFit,
    pub predicted: Option<Verdict>,
}

fn statistic_points(groups: &BTreeMap<u64, Vec<TrialRecord>>, field: RecordField, stat: Statistic) -> Vec<(f64, f64)> {
    groups
        .iter()
        .map(|(&n, recs)| {
            let vals: Vec<f64> = recs.iter().filter(|r| r.status == "ok").map(|r| r.field(field) as f64).collect();
            let y = match stat {
                Statistic::Median => median(&vals),
                Statistic::Mean => vals.iter().sum::<f64>() / vals.len() as f64,
            };
            (n as f64, y)
        })
        .collect()
}

/// Runs missing shards of a sweep and writes `comparison.csv` and
/// `sweep.json` next to them.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let dir = sweep_dir(cfg);
    fs::create_dir_all(&dir).map_err(runtime)?;
    let grid = parse_n_grid(cfg.n_grid.as_deref().unwrap_or_default()).map_err(CliError::Runtime)?;
    let master = cfg.seed.expect("validated");
    let mut groups = BTreeMap::new();
    for &n in &grid {
        let path = shard_path(&dir, n);
        if !shard_complete(&path, cfg.trials) {
            let inner = cfg.for_size(n, derive_seed(master, n));
            let records = rrg_records(&inner)?;
            let tmp = path.with_extension("csv.partial");
            fs::write(&tmp, to_csv(&records)?).map_err(runtime)?;
            fs::rename(&tmp, &path).map_err(runtime)?;
        }
        groups.insert(n, read_records(&path)?);
    }
    let predicted = cfg.exponent_case().and_then(|c| predict_exponents(c, cfg.beta).ok());
    let mut table = String::from("n,trials,median_b_bar,median_r_bar,mean_red_share,predicted_exponent\n");
    for (n, recs) in &groups {
        let ok: Vec<&TrialRecord> = recs.iter().filter(|r| r.status == "ok").collect();
        let b: Vec<f64> = ok.iter().map(|r| r.b_bar as f64).collect();
        let r: Vec<f64> = ok.iter().map(|r| r.r_bar as f64).collect();
        let share = ok.iter().map(|r| r.red_share()).sum::<f64>() / ok.len() as f64;
        let pred = predicted.map(|v| v.exponent().to_string()).unwrap_or_default();
        table.push_str(&format!("{n},{},{},{},{share},{pred}\n", ok.len(), median(&b), median(&r)));
    }
    fs::write(dir.join("comparison.csv"), &table).map_err(runtime)?;
    let field = default_field(cfg);
    let points = statistic_points(&groups, field, cfg.statistic);
    let json = match fit_loglog_slope(&points) {
        Ok(fit) => pretty(&ExponentEstimate { field, statistic: cfg.statistic, points, fit, predicted })?,
        Err(e) => pretty(&serde_json::json!({ "points": points, "fit_error": e.to_string() }))?,
    };
    fs::write(dir.join("sweep.json"), &json).map_err(runtime)?;
    Ok(Artifacts { csv: Some(table), json })
}

/// Fits the per-N statistic found in the shard directory.
pub fn estimate_exponent(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let dir = cfg.input.clone().or_else(|| cfg.out.clone()).expect("validated");
    let mut groups: BTreeMap<u64, Vec<TrialRecord>> = BTreeMap::new();
    let entries = fs::read_dir(&dir).map_err(runtime)?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let name = p.file_name().and_then(|s| s.to_str()).unwrap_or("");
            name.starts_with("shard_n") && name.ends_with(".csv")
        })
        .collect();
    paths.sort();
    for p in paths {
        for r in read_records(&p)? {
            groups.entry(r.n).or_default().push(r);
        }
    }
    if groups.is_empty() {
        return Err(CliError::Runtime(format!("no shards in {}", dir.display())));
    }
    let any = &groups.values().next().unwrap()[0];
    let mut reference = cfg.clone();
    if reference.b0.is_none() && reference.b0_exp.is_none() && reference.case.is_none() {
        reference.beta = any.beta;
    }
    let predicted = reference.exponent_case().and_then(|c| predict_exponents(c, reference.beta).ok());
    let field = default_field(&reference);
    let points = statistic_points(&groups, field, cfg.statistic);
    let fit = fit_loglog_slope(&points).map_err(runtime)?;
    let json = pretty(&ExponentEstimate { field, statistic: cfg.statistic, points, fit, predicted })?;
    Ok(Artifacts { csv: None, json })
}

/// Runs a validated config and returns its outputs.
pub fn execute(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let violations = validate(cfg);
    if !violations.is_empty() {
        return Err(CliError::Validation(violations));
    }
    match cfg.kind.expect("validated") {
        ExperimentKind::Predict => run_predict(cfg),
        ExperimentKind::RrgChain | ExperimentKind::RrgGraph => run_rrg(cfg),
        ExperimentKind::Torus => run_torus(cfg),
        ExperimentKind::Urn => run_finite_urn(cfg),
        ExperimentKind::DiagUrn => run_diag_urn(cfg),
        ExperimentKind::Sweep => run_sweep(cfg),
        ExperimentKind::EstimateExponent => estimate_exponent(cfg),
    }
}

/// Writes artifacts: CSV to `--out` (or stdout) with the JSON summary next
/// to it as `<out>.summary.json`; JSON-only runs go to `--out` or stdout.
pub fn write_artifacts(cfg: &ExperimentConfig, art: &Artifacts) -> Result<(), CliError> {
    let sweep = cfg.kind == Some(ExperimentKind::Sweep);
    let mut stdout = std::io::stdout().lock();
    match (&art.csv, &cfg.out) {
        (_, Some(_)) if sweep => stdout.write_all(art.json.as_bytes()).map_err(runtime)?,
        (Some(csv), Some(path)) => {
            fs::write(path, csv).map_err(runtime)?;
            let mut summary = path.clone().into_os_string();
            summary.push(".summary.json");
            fs::write(PathBuf::from(summary), &art.json).map_err(runtime)?;
        }
        (Some(csv), None) => stdout.write_all(csv.as_bytes()).map_err(runtime)?,
        (None, Some(path)) => fs::write(path, &art.json).map_err(runtime)?,
        (None, None) => stdout.write_all(art.json.as_bytes()).map_err(runtime)?,
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (kind, flags, check_only) = match cli.command {
        Command::Predict(f) => (Some(ExperimentKind::Predict), f, false),
        Command::RrgChain(f) => (Some(ExperimentKind::RrgChain), f, false),
        Command::RrgGraph(f) => (Some(ExperimentKind::RrgGraph), f, false),
        Command::Torus(f) => (Some(ExperimentKind::Torus), f, false),
        Command::Urn(f) => (Some(ExperimentKind::Urn), f, false),
        Command::DiagUrn(f) => (Some(ExperimentKind::DiagUrn), f, false),
        Command::Sweep(f) => (Some(ExperimentKind::Sweep), f, false),
        Command::EstimateExponent(f) => (Some(ExperimentKind::EstimateExponent), f, false),
        Command::Validate(f) => (None, f, true),
    };
    let cfg = flags.into_config(kind)?;
    if check_only {
        let violations = validate(&cfg);
        println!("{}", pretty(&violations)?.trim_end());
        return if violations.is_empty() { Ok(()) } else { Err(CliError::Validation(violations)) };
    }
    let art = execute(&cfg)?;
    write_artifacts(&cfg, &art)
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("fpplab: {e}");
            e.exit_code()
        }
    }
}
