//! The `simulate`, `classify` and `optimize` subcommands.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use wta_core::analysis::{classify_equilibrium, entropy, EquilibriumReport, Tolerances};
use wta_core::dynamics::{check_interactions, InteractionReport};
use wta_core::graph::Graph;
use wta_core::integrate::{simulate_with, ConservationAudit, Direction, Simulation};
use wta_core::optimize::{
    exhaustive_search, greedy_search, sweep_initial_value, OptimizeProblem, OptimizeResult,
    SweepTable,
};

use crate::config::{
    base_dir, config_hash, derived_seeds, read_config, GraphSource, InitialSource, ProblemConfig,
    RunConfig, SearchMode, SweepSpec,
};
use crate::error::CliError;
use crate::output::{to_json, Meta, OutputDir};
use crate::svg::{figure, Panel, Series};
use crate::{Globals, ModeArg};

const INTERACTION_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Seeds {
    pub graph: Option<u64>,
    pub initial: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub meta: Meta,
    pub seeds: Seeds,
    pub graph_hash: String,
    pub n: usize,
    pub edges: usize,
    pub direction: Direction,
    pub interaction: Option<InteractionReport>,
    pub final_time: f64,
    pub steps: u64,
    pub halvings: u64,
    pub recorded: usize,
    pub stopped_on_equilibrium: bool,
    pub audit: ConservationAudit,
    pub final_state: Vec<f64>,
    pub final_entropy: f64,
    pub final_spread: f64,
    pub classification: EquilibriumReport,
}

/// Fully loaded inputs of a run config.
pub struct LoadedRun {
    pub config: RunConfig,
    pub graph: Graph,
    pub x0: Vec<f64>,
}

impl LoadedRun {
    pub fn load(config: RunConfig, base: &Path) -> Result<Self, CliError> {
        let graph = config.graph.load(base)?;
        let x0 = config.initial.load(graph.n())?;
        Ok(LoadedRun { config, graph, x0 })
    }

    pub fn execute(&self) -> Result<(Simulation, RunReport), CliError> {
        let cfg = &self.config;
        let (spec, interaction) = match &cfg.interaction {
            Some(ic) => {
                let spec = ic.build().map_err(CliError::config)?;
                let hi = self.x0.iter().sum::<f64>().max(1.0);
                let report = check_interactions(&spec, INTERACTION_SAMPLES, (0.0, hi), 0)
                    .map_err(CliError::config)?;
                if let Some(v) = &report.violation {
                    return Err(CliError::config(format!(
                        "interaction f={} g={} fails {:?} at {:?}: {}",
                        report.f, report.g, v.check, v.at, v.detail
                    )));
                }
                (Some(spec), Some(report))
            }
            None => (None, None),
        };
        let sim = simulate_with(
            &self.graph,
            &self.x0,
            &cfg.integrator,
            cfg.direction,
            spec.as_ref(),
        )?;
        let tol = cfg.tolerances.unwrap_or_default();
        let traj = &sim.trajectory;
        let final_state = traj.final_state().to_vec();
        let classification = classify_equilibrium(&self.graph, &final_state, tol)?;
        let (lo, hi) = final_state
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let report = RunReport {
            meta: Meta::new(config_hash(cfg), cfg.graph.seed()),
            seeds: Seeds {
                graph: cfg.graph.seed(),
                initial: cfg.initial.seed(),
            },
            graph_hash: self.graph.content_hash(),
            n: self.graph.n(),
            edges: self.graph.edge_count(),
            direction: cfg.direction,
            interaction,
            final_time: traj.final_time(),
            steps: traj.steps,
            halvings: traj.halvings,
            recorded: traj.len(),
            stopped_on_equilibrium: traj.stopped_on_equilibrium,
            audit: sim.audit.clone(),
            final_entropy: entropy(&final_state)?,
            final_spread: hi - lo,
            final_state,
            classification,
        };
        Ok((sim, report))
    }
}

pub fn simulate(globals: &Globals) -> Result<(), CliError> {
    let path = globals
        .config
        .as_deref()
        .ok_or_else(|| CliError::config("simulate needs --config <run config>"))?;
    let (mut cfg, _): (RunConfig, _) = read_config(path)?;
    if let Some(seed) = globals.seed {
        cfg.apply_seed(seed);
    }
    let want_svg = globals.svg || cfg.output.svg;
    let loaded = LoadedRun::load(cfg, &base_dir(path))?;
    let started = Instant::now();
    let (sim, report) = loaded.execute()?;
    globals.log(format!(
        "simulated {} steps to t={} in {:.3}s; class {}",
        report.steps,
        report.final_time,
        started.elapsed().as_secs_f64(),
        report.classification.class.label()
    ));

    let output = &loaded.config.output;
    let mut out = OutputDir::create(&globals.out)?;
    out.write_text(&output.csv, &sim.trajectory.to_csv_string())?;
    out.write_json(&output.report, &report)?;
    if want_svg {
        out.write_text(
            "trajectory.svg",
            &trajectory_figure(&sim, loaded.config.direction),
        )?;
    }
    Ok(())
}

/// State trajectories and entropy profile of one run.
pub fn trajectory_figure(sim: &Simulation, direction: Direction) -> String {
    let traj = &sim.trajectory;
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Reverse => -1.0,
    };
    let n = traj.states.first().map_or(0, Vec::len);
    let mut states = Panel::new("states", "t", "x");
    for i in 0..n {
        let points = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(t, x)| (sign * t, x[i]))
            .collect();
        states = states.with_series(Series::Line { points });
    }
    let entropy_points: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.diagnostics.entropy)
        .map(|(t, h)| (sign * t, h.max(1e-16)))
        .collect();
    let mut h = Panel::new("entropy", "t", "H").with_series(Series::Line {
        points: entropy_points,
    });
    if direction == Direction::Reverse {
        h = h.log_y();
    }
    figure(&[states, h], 2)
}

pub fn classify(state: &Path, graph: &Path, zero_tol: f64, equal_tol: f64) -> Result<(), CliError> {
    let graph_text = std::fs::read_to_string(graph)
        .map_err(|e| CliError::config(format!("cannot read graph {}: {e}", graph.display())))?;
    let g = Graph::from_json_str(&graph_text).map_err(CliError::config)?;
    let state_text = std::fs::read_to_string(state)
        .map_err(|e| CliError::config(format!("cannot read state {}: {e}", state.display())))?;
    let x: Vec<f64> = serde_json::from_str(&state_text)
        .map_err(|e| CliError::config(format!("state must be a JSON array of numbers: {e}")))?;
    if x.len() != g.n() {
        return Err(CliError::config(format!(
            "state has {} entries, graph has {} nodes",
            x.len(),
            g.n()
        )));
    }
    let report = classify_equilibrium(
        &g,
        &x,
        Tolerances {
            zero_tol,
            equal_tol,
        },
    )?;
    print!("{}", to_json(&report)?);
    Ok(())
}

/// A loaded optimization problem plus its search settings.
pub struct LoadedProblem {
    pub config: ProblemConfig,
    pub problem: OptimizeProblem,
}

impl LoadedProblem {
    pub fn load(config: ProblemConfig, base: &Path) -> Result<Self, CliError> {
        let graph = config.graph.load(base)?;
        let x0 = config.x0.load(graph.n())?;
        let mut problem = OptimizeProblem::new(graph, config.alpha, x0, config.horizon)?;
        problem.weight = config.weight;
        problem.options = config.integrator.clone();
        if let Some(v) = config.x_alpha0 {
            problem = problem.with_x_alpha0(v);
        }
        problem.validate()?;
        Ok(LoadedProblem { config, problem })
    }

    pub fn search(&self) -> Result<OptimizeResult, CliError> {
        Ok(match self.config.mode {
            SearchMode::Exhaustive => exhaustive_search(&self.problem)?,
            SearchMode::Greedy => {
                greedy_search(&self.problem, self.config.restarts, self.config.seed)?
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeReport {
    pub meta: Meta,
    pub mode: SearchMode,
    pub graph_hash: String,
    pub x_alpha0: f64,
    pub total_mass: f64,
    pub horizon: f64,
    pub result: OptimizeResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub meta: Meta,
    pub graph_hash: String,
    pub alpha: usize,
    pub horizon: f64,
    pub grid: Vec<f64>,
    pub masks_per_point: usize,
    pub others_mass: f64,
    pub others_range: (f64, f64),
    /// Grid values where both a near-zero and a near-total-mass outcome occur.
    pub extreme_outcome_points: Vec<f64>,
    pub extreme_fraction: f64,
}

pub const EXTREME_FRACTION: f64 = 0.05;

pub fn optimize(
    globals: &Globals,
    mode: Option<ModeArg>,
    restarts: Option<usize>,
    sweep: Option<&str>,
) -> Result<(), CliError> {
    let path = globals
        .config
        .as_deref()
        .ok_or_else(|| CliError::config("optimize needs --config <problem config>"))?;
    let (mut cfg, _): (ProblemConfig, _) = read_config(path)?;
    if let Some(m) = mode {
        cfg.mode = match m {
            ModeArg::Exhaustive => SearchMode::Exhaustive,
            ModeArg::Greedy => SearchMode::Greedy,
        };
    }
    if let Some(r) = restarts {
        cfg.restarts = r;
    }
    if let Some(text) = sweep {
        cfg.sweep = Some(SweepSpec::parse(text)?);
    }
    if let Some(seed) = globals.seed {
        let (gs, is) = derived_seeds(seed);
        cfg.graph.override_seed(gs);
        cfg.x0.override_seed(is);
        cfg.seed = seed;
    }
    let loaded = LoadedProblem::load(cfg, &base_dir(path))?;
    let started = Instant::now();

    if let Some(spec) = loaded.config.sweep.clone() {
        let grid = spec.grid()?;
        let table = sweep_initial_value(&loaded.problem, &grid)?;
        let report = sweep_report(&loaded, &grid, &table);
        globals.log(format!(
            "swept {} points x {} masks in {:.3}s",
            grid.len(),
            report.masks_per_point,
            started.elapsed().as_secs_f64()
        ));
        let mut out = OutputDir::create(&globals.out)?;
        out.write_text("sweep.csv", &table.to_csv_string())?;
        out.write_json("sweep.json", &report)?;
        if globals.svg {
            out.write_text("sweep.svg", &sweep_figure(&table, &report, None))?;
        }
        return Ok(());
    }

    let result = loaded.search()?;
    let report = OptimizeReport {
        meta: Meta::new(config_hash(&loaded.config), Some(loaded.config.seed)),
        mode: loaded.config.mode,
        graph_hash: loaded.problem.base_graph.content_hash(),
        x_alpha0: loaded.problem.x_alpha0,
        total_mass: loaded.problem.total_mass(),
        horizon: loaded.problem.horizon,
        result,
    };
    globals.log(format!(
        "{} evaluations in {:.3}s; best mask {} value {}",
        report.result.evaluations,
        started.elapsed().as_secs_f64(),
        report.result.best_mask,
        report.result.best_value
    ));
    let text = to_json(&report)?;
    let mut out = OutputDir::create(&globals.out)?;
    out.write_text("result.json", &text)?;
    if !globals.quiet {
        print!("{text}");
    }
    Ok(())
}

pub fn sweep_report(loaded: &LoadedProblem, grid: &[f64], table: &SweepTable) -> SweepReport {
    let p = &loaded.problem;
    let others: Vec<f64> =
        p.x0.iter()
            .enumerate()
            .filter(|&(i, _)| i != p.alpha)
            .map(|(_, &v)| v)
            .collect();
    let range = others
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    SweepReport {
        meta: Meta::new(config_hash(&loaded.config), Some(loaded.config.seed)),
        graph_hash: p.base_graph.content_hash(),
        alpha: p.alpha,
        horizon: p.horizon,
        grid: grid.to_vec(),
        masks_per_point: 1 << p.candidate_count(),
        others_mass: table.others_mass,
        others_range: range,
        extreme_outcome_points: table.extreme_outcome_points(EXTREME_FRACTION),
        extreme_fraction: EXTREME_FRACTION,
    }
}

/// Final value against initial value of the chosen agent, one dot per
/// (grid value, mask), with the total-mass and identity reference lines.
pub fn sweep_figure(
    table: &SweepTable,
    report: &SweepReport,
    marker: Option<(f64, f64)>,
) -> String {
    let points: Vec<(f64, f64)> = table
        .points
        .iter()
        .map(|p| (p.x_alpha0, p.final_value))
        .collect();
    let lo = report.grid.first().copied().unwrap_or(0.0);
    let hi = report.grid.last().copied().unwrap_or(1.0);
    let mut panel = Panel::new("final vs initial value", "x_alpha(0)", "x_alpha(T)")
        .with_series(Series::Scatter { points })
        .with_series(Series::Dashed {
            points: vec![(lo, table.total_mass_at(lo)), (hi, table.total_mass_at(hi))],
        })
        .with_series(Series::Dashed {
            points: vec![(lo, lo), (hi, hi)],
        })
        .with_series(Series::Line {
            points: vec![(report.others_range.0, 0.0), (report.others_range.1, 0.0)],
        });
    if let Some((x, y)) = marker {
        panel = panel.with_series(Series::Marker {
            x,
            y,
            label: "base".into(),
        });
    }
    figure(&[panel], 1)
}

pub fn graph_source_for(g: &Graph) -> GraphSource {
    GraphSource::Inline(g.to_json())
}

pub fn initial_source_for(x: &[f64]) -> InitialSource {
    InitialSource::Inline(x.to_vec())
}
