//! Opponent selection: which agents should `alpha` compete with to end the
//! horizon holding as much resource as possible.
//!
//! Candidate `k` is the `k`-th agent other than `alpha` in ascending id
//! order. A mask enables edge `(alpha, candidate_k)` with the problem's
//! weight when bit `k` is set; edges among the other agents are fixed.
//! Masks print as bitstrings whose `k`-th character is bit `k`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::integrate::{simulate, IntegrateError, IntegratorOptions};

/// Largest candidate count accepted by exhaustive search (`2^24` masks).
pub const MAX_EXHAUSTIVE_CANDIDATES: usize = 24;
/// Full tables are kept up to this many candidates.
pub const MAX_TABLE_CANDIDATES: usize = 16;
/// Values within this distance of the best are ties.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptimizeError {
    #[error("{candidates} candidates exceed the exhaustive limit of {limit}")]
    TooManyCandidates { candidates: usize, limit: usize },
    #[error("alpha = {alpha} out of range for {n} agents")]
    AlphaOutOfRange { alpha: usize, n: usize },
    #[error("initial state has {got} entries, graph has {expected} agents")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("mask has bits beyond the {candidates} candidates")]
    MaskOutOfRange { candidates: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpponentMask {
    bits: u32,
    len: u8,
}

impl OpponentMask {
    pub fn new(bits: u32, len: usize) -> Result<Self, OptimizeError> {
        if len > 32 || (len < 32 && bits >> len != 0) {
            return Err(OptimizeError::MaskOutOfRange { candidates: len });
        }
        Ok(OpponentMask {
            bits,
            len: len as u8,
        })
    }

    pub fn empty(len: usize) -> Self {
        OpponentMask {
            bits: 0,
            len: len as u8,
        }
    }

    pub fn bits(self) -> u32 {
        self.bits
    }

    pub fn len(self) -> usize {
        self.len as usize
    }

    pub fn is_empty(self) -> bool {
        self.bits == 0
    }

    pub fn count(self) -> u32 {
        self.bits.count_ones()
    }

    pub fn contains(self, k: usize) -> bool {
        self.bits >> k & 1 == 1
    }

    pub fn flip(self, k: usize) -> Self {
        OpponentMask {
            bits: self.bits ^ (1 << k),
            len: self.len,
        }
    }

    pub fn bitstring(self) -> String {
        (0..self.len())
            .map(|k| if self.contains(k) { '1' } else { '0' })
            .collect()
    }

    pub fn parse(s: &str) -> Result<Self, OptimizeError> {
        let mut bits = 0u32;
        for (k, ch) in s.chars().enumerate() {
            match ch {
                '1' if k < 32 => bits |= 1 << k,
                '0' => {}
                _ => {
                    return Err(OptimizeError::MaskOutOfRange {
                        candidates: s.len(),
                    })
                }
            }
        }
        Self::new(bits, s.len())
    }

    /// Tie-break order: fewer opponents first, then smaller bitstring.
    fn tie_order(self, other: Self) -> Ordering {
        self.count()
            .cmp(&other.count())
            .then_with(|| self.bitstring().cmp(&other.bitstring()))
    }
}

impl fmt::Display for OpponentMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bitstring())
    }
}

impl Serialize for OpponentMask {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.bitstring())
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeProblem {
    /// Edges incident to `alpha` are ignored; the mask decides them.
    pub base_graph: Graph,
    pub alpha: usize,
    /// Weight `a_alpha_j` of an enabled edge.
    pub weight: f64,
    /// Initial state of all agents; entry `alpha` is replaced by `x_alpha0`.
    pub x0: Vec<f64>,
    pub x_alpha0: f64,
    pub horizon: f64,
    /// `t_end` is overridden by `horizon`.
    pub options: IntegratorOptions,
}

impl OptimizeProblem {
    pub fn new(
        base_graph: Graph,
        alpha: usize,
        x0: Vec<f64>,
        horizon: f64,
    ) -> Result<Self, OptimizeError> {
        let x_alpha0 = *x0.get(alpha).ok_or(OptimizeError::AlphaOutOfRange {
            alpha,
            n: base_graph.n(),
        })?;
        let p = OptimizeProblem {
            base_graph,
            alpha,
            weight: 1.0,
            x0,
            x_alpha0,
            horizon,
            options: IntegratorOptions::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), OptimizeError> {
        let n = self.base_graph.n();
        if self.alpha >= n {
            return Err(OptimizeError::AlphaOutOfRange {
                alpha: self.alpha,
                n,
            });
        }
        if self.x0.len() != n {
            return Err(OptimizeError::DimensionMismatch {
                expected: n,
                got: self.x0.len(),
            });
        }
        if self
            .x0
            .iter()
            .chain([&self.x_alpha0])
            .any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return Err(OptimizeError::InvalidProblem(
                "initial values must be finite and >= 0".into(),
            ));
        }
        if !(self.weight > 0.0 && self.weight.is_finite()) {
            return Err(OptimizeError::InvalidProblem(
                "weight must be positive".into(),
            ));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(OptimizeError::InvalidProblem(
                "horizon must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn candidate_count(&self) -> usize {
        self.base_graph.n() - 1
    }

    /// Agent ids of the candidates, in bit order.
    pub fn candidates(&self) -> Vec<usize> {
        (0..self.base_graph.n())
            .filter(|&j| j != self.alpha)
            .collect()
    }

    pub fn initial_state(&self) -> Vec<f64> {
        let mut x = self.x0.clone();
        x[self.alpha] = self.x_alpha0;
        x
    }

    pub fn total_mass(&self) -> f64 {
        self.initial_state().iter().sum()
    }

    pub fn with_x_alpha0(&self, x_alpha0: f64) -> Self {
        OptimizeProblem {
            x_alpha0,
            ..self.clone()
        }
    }

    /// The base graph with `alpha`'s edges replaced by those in `mask`.
    pub fn graph_for(&self, mask: OpponentMask) -> Result<Graph, OptimizeError> {
        if mask.len() != self.candidate_count() {
            return Err(OptimizeError::MaskOutOfRange {
                candidates: self.candidate_count(),
            });
        }
        let mut edges: Vec<_> = self
            .base_graph
            .edges()
            .into_iter()
            .filter(|&(i, j, _)| i != self.alpha && j != self.alpha)
            .collect();
        for (k, j) in self.candidates().into_iter().enumerate() {
            if mask.contains(k) {
                edges.push((self.alpha, j, self.weight));
            }
        }
        Ok(Graph::new(self.base_graph.n(), &edges)?)
    }
}

/// `x_alpha(T)` under the given opponent mask.
pub fn evaluate_choice(p: &OptimizeProblem, mask: OpponentMask) -> Result<f64, OptimizeError> {
    p.validate()?;
    let g = p.graph_for(mask)?;
    let opts = IntegratorOptions {
        t_end: p.horizon,
        record_stride: usize::MAX,
        ..p.options.clone()
    };
    let sim = simulate(&g, &p.initial_state(), &opts)?;
    Ok(sim.trajectory.final_state()[p.alpha])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaskValue {
    pub mask: OpponentMask,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValueStats {
    pub count: u64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeResult {
    pub alpha: usize,
    pub best_mask: OpponentMask,
    pub best_value: f64,
    pub evaluations: u64,
    /// Every evaluated mask, ascending by mask bits. Omitted for exhaustive
    /// runs with more than [`MAX_TABLE_CANDIDATES`] candidates.
    pub table: Option<Vec<MaskValue>>,
    pub stats: ValueStats,
    pub tie_break_applied: bool,
    /// True for greedy results, which carry no optimality guarantee.
    pub heuristic: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Running best with the set of masks tied with it.
struct BestTracker {
    max: f64,
    tied: Vec<MaskValue>,
    count: u64,
    sum: f64,
    min: f64,
}

impl BestTracker {
    fn new() -> Self {
        BestTracker {
            max: f64::NEG_INFINITY,
            tied: Vec::new(),
            count: 0,
            sum: 0.0,
            min: f64::INFINITY,
        }
    }

    fn push(&mut self, entry: MaskValue) {
        self.count += 1;
        self.sum += entry.value;
        self.min = self.min.min(entry.value);
        if entry.value > self.max {
            self.max = entry.value;
            self.tied.retain(|e| e.value >= entry.value - TIE_TOL);
        }
        if entry.value >= self.max - TIE_TOL {
            self.tied.push(entry);
        }
    }

    fn finish(self) -> (MaskValue, bool, ValueStats) {
        let tie = self.tied.len() > 1;
        let best = *self
            .tied
            .iter()
            .min_by(|a, b| a.mask.tie_order(b.mask))
            .expect("at least one mask evaluated");
        let stats = ValueStats {
            count: self.count,
            min: self.min,
            max: self.max,
            mean: self.sum / self.count as f64,
        };
        (best, tie, stats)
    }
}

fn check_guard(p: &OptimizeProblem) -> Result<usize, OptimizeError> {
    let m = p.candidate_count();
    if m > MAX_EXHAUSTIVE_CANDIDATES {
        return Err(OptimizeError::TooManyCandidates {
            candidates: m,
            limit: MAX_EXHAUSTIVE_CANDIDATES,
        });
    }
    Ok(m)
}

fn evaluate_range(
    p: &OptimizeProblem,
    m: usize,
    range: std::ops::Range<u64>,
    exec: Execution,
) -> Result<Vec<MaskValue>, OptimizeError> {
    let eval = |bits: u64| -> Result<MaskValue, OptimizeError> {
        let mask = OpponentMask::new(bits as u32, m)?;
        Ok(MaskValue {
            mask,
            value: evaluate_choice(p, mask)?,
        })
    };
    match exec {
        Execution::Sequential => range.map(eval).collect(),
        Execution::Parallel => range.into_par_iter().map(eval).collect(),
    }
}

pub fn exhaustive_search(p: &OptimizeProblem) -> Result<OptimizeResult, OptimizeError> {
    exhaustive_search_with(p, Execution::Parallel)
}

/// Evaluates every mask. Results are merged in mask order, so sequential
/// and parallel execution give identical output.
pub fn exhaustive_search_with(
    p: &OptimizeProblem,
    exec: Execution,
) -> Result<OptimizeResult, OptimizeError> {
    p.validate()?;
    let m = check_guard(p)?;
    let total: u64 = 1 << m;
    const CHUNK: u64 = 1 << 12;
    let keep_table = m <= MAX_TABLE_CANDIDATES;
    let mut table = Vec::new();
    let mut tracker = BestTracker::new();
    let mut start = 0;
    while start < total {
        let end = (start + CHUNK).min(total);
        let chunk = evaluate_range(p, m, start..end, exec)?;
        for entry in &chunk {
            tracker.push(*entry);
        }
        if keep_table {
            table.extend(chunk);
        }
        start = end;
    }
    let (best, tie, stats) = tracker.finish();
    Ok(OptimizeResult {
        alpha: p.alpha,
        best_mask: best.mask,
        best_value: best.value,
        evaluations: total,
        table: keep_table.then_some(table),
        stats,
        tie_break_applied: tie,
        heuristic: false,
    })
}

/// Best-improvement hill climbing over single-bit flips.
///
/// The first climb starts from the empty mask, later ones from masks drawn
/// uniformly with `ChaCha8Rng::seed_from_u64(seed)`. Each mask is simulated
/// at most once.
pub fn greedy_search(
    p: &OptimizeProblem,
    restarts: usize,
    seed: u64,
) -> Result<OptimizeResult, OptimizeError> {
    p.validate()?;
    let m = p.candidate_count();
    if m > 32 {
        return Err(OptimizeError::TooManyCandidates {
            candidates: m,
            limit: 32,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache: BTreeMap<OpponentMask, f64> = BTreeMap::new();
    let mut value_of = |mask: OpponentMask| -> Result<f64, OptimizeError> {
        if let Some(&v) = cache.get(&mask) {
            return Ok(v);
        }
        let v = evaluate_choice(p, mask)?;
        cache.insert(mask, v);
        Ok(v)
    };

    for restart in 0..restarts.max(1) {
        let mut current = if restart == 0 {
            OpponentMask::empty(m)
        } else {
            let bits = if m == 32 {
                rng.gen::<u32>()
            } else {
                rng.gen_range(0..1u32 << m)
            };
            OpponentMask::new(bits, m)?
        };
        let mut current_value = value_of(current)?;
        loop {
            let mut best_move: Option<(OpponentMask, f64)> = None;
            for k in 0..m {
                let next = current.flip(k);
                let v = value_of(next)?;
                if v > current_value + TIE_TOL && best_move.map_or(true, |(_, bv)| v > bv) {
                    best_move = Some((next, v));
                }
            }
            match best_move {
                Some((next, v)) => {
                    current = next;
                    current_value = v;
                }
                None => break,
            }
        }
    }

    let mut tracker = BestTracker::new();
    let table: Vec<MaskValue> = cache
        .iter()
        .map(|(&mask, &value)| MaskValue { mask, value })
        .collect();
    for entry in &table {
        tracker.push(*entry);
    }
    let (best, tie, stats) = tracker.finish();
    Ok(OptimizeResult {
        alpha: p.alpha,
        best_mask: best.mask,
        best_value: best.value,
        evaluations: table.len() as u64,
        table: Some(table),
        stats,
        tie_break_applied: tie,
        heuristic: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub x_alpha0: f64,
    pub mask: OpponentMask,
    pub final_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub alpha: usize,
    /// Initial mass of every agent except `alpha`; the total-mass reference
    /// line is `others_mass + x_alpha0`.
    pub others_mass: f64,
    pub points: Vec<SweepPoint>,
}

impl SweepTable {
    pub fn total_mass_at(&self, x_alpha0: f64) -> f64 {
        self.others_mass + x_alpha0
    }

    /// CSV with header `x_alpha0,mask,final_value`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("x_alpha0,mask,final_value\n");
        for pt in &self.points {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::integrate::fmt17(pt.x_alpha0),
                pt.mask,
                crate::integrate::fmt17(pt.final_value)
            ));
        }
        out
    }

    /// Grid values at which some mask ends near zero and another near the
    /// total mass, both within `frac` of the total.
    pub fn extreme_outcome_points(&self, frac: f64) -> Vec<f64> {
        let mut grid: Vec<f64> = self.points.iter().map(|p| p.x_alpha0).collect();
        grid.dedup();
        grid.into_iter()
            .filter(|&x| {
                let total = self.total_mass_at(x);
                let vals = self
                    .points
                    .iter()
                    .filter(|p| p.x_alpha0 == x)
                    .map(|p| p.final_value);
                let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                });
                total > 0.0 && lo <= frac * total && hi >= (1.0 - frac) * total
            })
            .collect()
    }
}

/// Exhaustive evaluation at every grid value of `x_alpha(0)`.
pub fn sweep_initial_value(p: &OptimizeProblem, grid: &[f64]) -> Result<SweepTable, OptimizeError> {
    p.validate()?;
    let m = check_guard(p)?;
    if let Some(bad) = grid.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(OptimizeError::InvalidProblem(format!(
            "grid value {bad} must be >= 0"
        )));
    }
    let mut points = Vec::with_capacity(grid.len() << m);
    for &x in grid {
        let q = p.with_x_alpha0(x);
        for entry in evaluate_range(&q, m, 0..1 << m, Execution::Parallel)? {
            points.push(SweepPoint {
                x_alpha0: x,
                mask: entry.mask,
                final_value: entry.value,
            });
        }
    }
    let others_mass =
        p.x0.iter()
            .enumerate()
            .filter(|&(i, _)| i != p.alpha)
            .map(|(_, v)| v)
            .sum();
    Ok(SweepTable {
        alpha: p.alpha,
        others_mass,
        points,
    })
}
