//! JSON run and problem configurations.
//!
//! Graph sources (exactly one key):
//!
//! ```json
//! {"inline": {"n": 2, "edges": [[0, 1, 1.0]]}}
//! {"file": "graph.json"}
//! {"random": {"n": 100, "p": 0.05, "weights": {"mode": "unit"}, "seed": 1, "connected": false}}
//! ```
//!
//! Initial-state sources (exactly one key):
//!
//! ```json
//! {"inline": [2.0, 1.0]}
//! {"random": {"lo": 0.0, "hi": 1.0, "seed": 7}}
//! ```
//!
//! Relative file paths resolve against the directory of the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wta_core::analysis::Tolerances;
use wta_core::dynamics::{random_state, InteractionConfig};
use wta_core::graph::{random_connected_graph, random_graph, Graph, GraphJson, WeightMode};
use wta_core::integrate::{Direction, IntegratorOptions};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSource {
    Inline(GraphJson),
    File(PathBuf),
    Random(RandomGraphSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomGraphSpec {
    pub n: usize,
    pub p: f64,
    #[serde(default = "unit_weights")]
    pub weights: WeightMode,
    pub seed: u64,
    /// Redraw from the same stream until the graph is connected.
    #[serde(default)]
    pub connected: bool,
}

fn unit_weights() -> WeightMode {
    WeightMode::Unit
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSource {
    Inline(Vec<f64>),
    Random(RandomStateSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomStateSpec {
    #[serde(default)]
    pub lo: f64,
    #[serde(default = "one")]
    pub hi: f64,
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

impl GraphSource {
    pub fn seed(&self) -> Option<u64> {
        match self {
            GraphSource::Random(spec) => Some(spec.seed),
            _ => None,
        }
    }

    pub fn override_seed(&mut self, seed: u64) {
        if let GraphSource::Random(spec) = self {
            spec.seed = seed;
        }
    }

    pub fn load(&self, base: &Path) -> Result<Graph, CliError> {
        match self {
            GraphSource::Inline(spec) => Graph::from_json(spec).map_err(CliError::config),
            GraphSource::File(path) => {
                let path = resolve(base, path);
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    CliError::config(format!("cannot read graph file {}: {e}", path.display()))
                })?;
                Graph::from_json_str(&text).map_err(CliError::config)
            }
            GraphSource::Random(spec) => {
                let g = if spec.connected {
                    random_connected_graph(spec.n, spec.p, spec.weights, spec.seed)
                } else {
                    random_graph(spec.n, spec.p, spec.weights, spec.seed)
                };
                g.map_err(CliError::config)
            }
        }
    }
}

impl InitialSource {
    pub fn seed(&self) -> Option<u64> {
        match self {
            InitialSource::Random(spec) => Some(spec.seed),
            InitialSource::Inline(_) => None,
        }
    }

    pub fn override_seed(&mut self, seed: u64) {
        if let InitialSource::Random(spec) = self {
            spec.seed = seed;
        }
    }

    pub fn load(&self, n: usize) -> Result<Vec<f64>, CliError> {
        let x = match self {
            InitialSource::Inline(x) => x.clone(),
            InitialSource::Random(spec) => {
                random_state(n, spec.lo, spec.hi, spec.seed).map_err(CliError::config)?
            }
        };
        if x.len() != n {
            return Err(CliError::config(format!(
                "initial state has {} entries, graph has {n} nodes",
                x.len()
            )));
        }
        Ok(x)
    }
}

/// Seeds for a `--seed` override: the graph gets `seed`, the initial
/// state `seed + 1`, so the two draws come from different streams.
pub fn derived_seeds(seed: u64) -> (u64, u64) {
    (seed, seed.wrapping_add(1))
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_csv")]
    pub csv: String,
    #[serde(default = "default_report")]
    pub report: String,
    #[serde(default)]
    pub svg: bool,
}

fn default_csv() -> String {
    "trajectory.csv".into()
}

fn default_report() -> String {
    "report.json".into()
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            csv: default_csv(),
            report: default_report(),
            svg: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub graph: GraphSource,
    pub initial: InitialSource,
    #[serde(default)]
    pub direction: Direction,
    #[serde(default)]
    pub integrator: IntegratorOptions,
    #[serde(default)]
    pub interaction: Option<InteractionConfig>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl RunConfig {
    pub fn apply_seed(&mut self, seed: u64) {
        let (gs, is) = derived_seeds(seed);
        self.graph.override_seed(gs);
        self.initial.override_seed(is);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    #[default]
    Exhaustive,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepSpec {
    pub fn grid(&self) -> Result<Vec<f64>, CliError> {
        if self.points == 0 || !(self.start >= 0.0 && self.stop >= self.start) {
            return Err(CliError::config(
                "sweep needs points >= 1 and 0 <= start <= stop",
            ));
        }
        if self.points == 1 {
            return Ok(vec![self.start]);
        }
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|k| self.start + k as f64 * step)
            .collect())
    }

    /// Parses `start:stop:points`.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = text.split(':').collect();
        let bad = || {
            CliError::config(format!(
                "sweep must look like start:stop:points, got {text:?}"
            ))
        };
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(SweepSpec {
            start: parts[0].parse().map_err(|_| bad())?,
            stop: parts[1].parse().map_err(|_| bad())?,
            points: parts[2].parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub graph: GraphSource,
    pub alpha: usize,
    #[serde(default = "one")]
    pub weight: f64,
    pub x0: InitialSource,
    /// Overrides `x0[alpha]` when present.
    #[serde(default)]
    pub x_alpha0: Option<f64>,
    pub horizon: f64,
    #[serde(default)]
    pub integrator: IntegratorOptions,
    #[serde(default)]
    pub mode: SearchMode,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

fn default_restarts() -> usize {
    8
}

pub fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(T, String), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("malformed config {}: {e}", path.display())))?;
    Ok((value, text))
}

pub fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// SHA-256 of the canonical JSON form, hex, first 16 characters.
pub fn config_hash<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("config serializes");
    hex::encode(&Sha256::digest(&bytes)[..8])
}
