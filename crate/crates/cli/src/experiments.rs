//! Named figure experiments and their manifests.
//!
//! Each run writes its data, an SVG figure and `manifest.json` into the
//! output directory. The manifest records the experiment name, seed and
//! parameters, the derived run configs, a summary and the SHA-256 of every
//! other file written. Passing the manifest back via `--config` regenerates
//! byte-identical files.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use wta_core::analysis::{classify_equilibrium, EquilibriumClass, Tolerances};
use wta_core::integrate::{fmt17, Direction, IntegratorOptions, Simulation};
use wta_core::optimize::sweep_initial_value;

use crate::commands::{
    graph_source_for, initial_source_for, sweep_figure, sweep_report, trajectory_figure,
    LoadedProblem, LoadedRun,
};
use crate::config::{
    config_hash, read_config, GraphSource, InitialSource, OutputSpec, ProblemConfig,
    RandomGraphSpec, RandomStateSpec, RunConfig, SearchMode, SweepSpec,
};
use crate::error::CliError;
use crate::output::{OutputDir, OutputFile};
use crate::svg::{figure, Panel, Series};
use crate::{Globals, TOOL, VERSION};
use wta_core::graph::{NodeSet, WeightMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Fig1Bars,
    Fig2Trajectories,
    Fig3Entropy,
    Fig4NineAgents,
    Fig5Sweep,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Fig1Bars,
        Experiment::Fig2Trajectories,
        Experiment::Fig3Entropy,
        Experiment::Fig4NineAgents,
        Experiment::Fig5Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig1Bars => "fig1_bars",
            Experiment::Fig2Trajectories => "fig2_trajectories",
            Experiment::Fig3Entropy => "fig3_entropy",
            Experiment::Fig4NineAgents => "fig4_nine_agents",
            Experiment::Fig5Sweep => "fig5_sweep",
        }
    }

    /// Desk-scale defaults.
    pub fn default_params(self) -> ExperimentParams {
        match self {
            Experiment::Fig1Bars | Experiment::Fig2Trajectories | Experiment::Fig3Entropy => {
                ExperimentParams {
                    n: 100,
                    p: 0.8,
                    x_lo: 0.0,
                    x_hi: 1.0,
                    t_end: 1.0,
                    dt: 1e-4,
                    record_stride: 100,
                    max_attempts: 1,
                    sweep: None,
                }
            }
            Experiment::Fig4NineAgents | Experiment::Fig5Sweep => ExperimentParams {
                n: 9,
                p: 0.5,
                x_lo: 0.0,
                x_hi: 1.0,
                t_end: 10.0,
                dt: 1e-3,
                record_stride: 10,
                max_attempts: 1000,
                sweep: (self == Experiment::Fig5Sweep).then_some(SweepSpec {
                    start: 0.0,
                    stop: 1.5,
                    points: 31,
                }),
            },
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                CliError::config(format!(
                    "unknown experiment {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentParams {
    pub n: usize,
    /// Edge probability of the random graph.
    pub p: f64,
    /// Initial values are drawn from `(x_lo, x_hi]`.
    pub x_lo: f64,
    pub x_hi: f64,
    /// Forward horizon; reverse runs use the same span of reverse time.
    pub t_end: f64,
    pub dt: f64,
    pub record_stride: usize,
    /// Instances tried when searching for the nine-agent example.
    pub max_attempts: usize,
    pub sweep: Option<SweepSpec>,
}

impl ExperimentParams {
    fn options(&self) -> IntegratorOptions {
        IntegratorOptions {
            dt: self.dt,
            t_end: self.t_end,
            record_stride: self.record_stride,
            ..Default::default()
        }
    }

    fn run_config(
        &self,
        graph_seed: u64,
        initial_seed: u64,
        connected: bool,
        direction: Direction,
    ) -> RunConfig {
        RunConfig {
            graph: GraphSource::Random(RandomGraphSpec {
                n: self.n,
                p: self.p,
                weights: WeightMode::Unit,
                seed: graph_seed,
                connected,
            }),
            initial: InitialSource::Random(RandomStateSpec {
                lo: self.x_lo,
                hi: self.x_hi,
                seed: initial_seed,
            }),
            direction,
            integrator: self.options(),
            interaction: None,
            tolerances: None,
            output: OutputSpec::default(),
        }
    }
}

/// The reproducible part of a manifest; everything else is derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestInput {
    pub experiment: Experiment,
    pub seed: u64,
    pub params: ExperimentParams,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub experiment: Experiment,
    pub seed: u64,
    pub params: ExperimentParams,
    pub config_hash: String,
    pub configs: BTreeMap<String, Value>,
    pub summary: Value,
    pub outputs: Vec<OutputFile>,
}

pub fn run_command(
    globals: &Globals,
    name: Option<&str>,
    n: Option<usize>,
    t_end: Option<f64>,
) -> Result<(), CliError> {
    let mut input = match &globals.config {
        Some(path) => {
            let (input, _): (ManifestInput, _) = read_config(path)?;
            if let Some(name) = name {
                let named: Experiment = name.parse()?;
                if named != input.experiment {
                    return Err(CliError::config(format!(
                        "experiment {named} does not match manifest experiment {}",
                        input.experiment
                    )));
                }
            }
            input
        }
        None => {
            let experiment: Experiment = name
                .ok_or_else(|| CliError::config("experiment needs a name or --config <manifest>"))?
                .parse()?;
            ManifestInput {
                experiment,
                seed: 0,
                params: experiment.default_params(),
            }
        }
    };
    if let Some(seed) = globals.seed {
        input.seed = seed;
    }
    if let Some(n) = n {
        input.params.n = n;
    }
    if let Some(t) = t_end {
        input.params.t_end = t;
    }
    let manifest = run_experiment(&input, &globals.out)?;
    globals.log(format!(
        "{}: wrote {} files to {}",
        manifest.experiment,
        manifest.outputs.len() + 1,
        globals.out.display()
    ));
    Ok(())
}

/// Runs an experiment into `dir` and writes its manifest last.
pub fn run_experiment(input: &ManifestInput, dir: &std::path::Path) -> Result<Manifest, CliError> {
    let mut configs = BTreeMap::new();
    let mut staged = Staged::default();
    let summary = match input.experiment {
        Experiment::Fig1Bars => fig1(input, &mut configs, &mut staged)?,
        Experiment::Fig2Trajectories => fig2(input, &mut configs, &mut staged)?,
        Experiment::Fig3Entropy => fig3(input, &mut configs, &mut staged)?,
        Experiment::Fig4NineAgents => fig4(input, &mut configs, &mut staged)?,
        Experiment::Fig5Sweep => fig5(input, &mut configs, &mut staged)?,
    };
    let mut out = OutputDir::create(dir)?;
    for (name, text) in &staged.files {
        out.write_text(name, text)?;
    }
    let manifest = Manifest {
        tool: TOOL,
        version: VERSION,
        experiment: input.experiment,
        seed: input.seed,
        params: input.params.clone(),
        config_hash: config_hash(input),
        configs,
        summary,
        outputs: out.written().to_vec(),
    };
    out.write_json("manifest.json", &manifest)?;
    Ok(manifest)
}

/// Files are rendered in memory first so a failed run leaves no partial output.
#[derive(Default)]
struct Staged {
    files: Vec<(String, String)>,
}

impl Staged {
    fn add(&mut self, name: &str, text: String) {
        self.files.push((name.to_string(), text));
    }
}

fn record(
    configs: &mut BTreeMap<String, Value>,
    name: &str,
    cfg: &impl Serialize,
) -> Result<(), CliError> {
    configs.insert(name.to_string(), serde_json::to_value(cfg)?);
    Ok(())
}

fn run(cfg: RunConfig) -> Result<(Simulation, crate::commands::RunReport), CliError> {
    LoadedRun::load(cfg, std::path::Path::new(""))?.execute()
}

fn forward_and_reverse(
    input: &ManifestInput,
    configs: &mut BTreeMap<String, Value>,
) -> Result<(Simulation, Simulation, Value, Value), CliError> {
    let (gs, is) = crate::config::derived_seeds(input.seed);
    let fwd_cfg = input.params.run_config(gs, is, false, Direction::Forward);
    let rev_cfg = input.params.run_config(gs, is, false, Direction::Reverse);
    record(configs, "forward", &fwd_cfg)?;
    record(configs, "reverse", &rev_cfg)?;
    let (fwd, fwd_report) = run(fwd_cfg)?;
    let (rev, rev_report) = run(rev_cfg)?;
    Ok((
        fwd,
        rev,
        serde_json::to_value(fwd_report)?,
        serde_json::to_value(rev_report)?,
    ))
}

fn winner_summary(sim: &Simulation, cfg_graph: &wta_core::graph::Graph) -> Result<Value, CliError> {
    let report = classify_equilibrium(
        cfg_graph,
        sim.trajectory.final_state(),
        Tolerances::default(),
    )?;
    Ok(json!({
        "class": report.class,
        "winner_count": report.winners.len(),
        "winners": report.winners,
        "winners_independent": cfg_graph.is_independent_set(&report.winners).map_err(CliError::config)?,
        "residual": report.residual,
    }))
}

/// Bars at least this fraction of the tallest are counted as visible.
pub const VISIBLE_BAR_FRACTION: f64 = 0.01;

fn fig1(
    input: &ManifestInput,
    configs: &mut BTreeMap<String, Value>,
    staged: &mut Staged,
) -> Result<Value, CliError> {
    let (gs, is) = crate::config::derived_seeds(input.seed);
    let cfg = input.params.run_config(gs, is, false, Direction::Forward);
    record(configs, "forward", &cfg)?;
    let loaded = LoadedRun::load(cfg, std::path::Path::new(""))?;
    let (sim, _) = loaded.execute()?;
    let x_final = sim.trajectory.final_state();

    let mut csv = String::from("agent,initial,final\n");
    for (i, (a, b)) in loaded.x0.iter().zip(x_final).enumerate() {
        csv.push_str(&format!("{i},{},{}\n", fmt17(*a), fmt17(*b)));
    }
    staged.add("bars.csv", csv);
    let top = Panel::new("initial states", "agent", "x(0)").with_series(Series::Bars {
        values: loaded.x0.clone(),
    });
    let bottom = Panel::new("final states", "agent", "x(T)").with_series(Series::Bars {
        values: x_final.to_vec(),
    });
    staged.add("fig1_bars.svg", figure(&[top, bottom], 1));

    let mut summary = winner_summary(&sim, &loaded.graph)?;
    let peak = x_final.iter().fold(0.0f64, |m, &v| m.max(v));
    let visible =
        NodeSet::new((0..x_final.len()).filter(|&i| x_final[i] >= VISIBLE_BAR_FRACTION * peak));
    summary["visible_bar_fraction"] = json!(VISIBLE_BAR_FRACTION);
    summary["visible_bars"] = json!(visible.len());
    summary["visible_bars_independent"] = json!(loaded
        .graph
        .is_independent_set(&visible)
        .map_err(CliError::config)?);
    summary["edges"] = json!(loaded.graph.edge_count());
    summary["final_time"] = json!(sim.trajectory.final_time());
    summary["total_mass"] = json!(sim.audit.initial_mass);
    Ok(summary)
}

fn trajectory_panels(fwd: &Simulation, rev: &Simulation, window: Option<f64>) -> Vec<Panel> {
    let n = fwd.trajectory.final_state().len();
    let title = match window {
        Some(w) => format!("states, |t| <= {w}"),
        None => "states".to_string(),
    };
    let mut panel = Panel::new(&title, "t", "x");
    let keep = |t: f64| window.map_or(true, |w| t.abs() <= w);
    for i in 0..n {
        let mut points: Vec<(f64, f64)> = rev
            .trajectory
            .times
            .iter()
            .zip(&rev.trajectory.states)
            .rev()
            .map(|(t, x)| (-t, x[i]))
            .filter(|p| keep(p.0))
            .collect();
        points.extend(
            fwd.trajectory
                .times
                .iter()
                .zip(&fwd.trajectory.states)
                .skip(1)
                .map(|(t, x)| (*t, x[i]))
                .filter(|p| keep(p.0)),
        );
        panel = panel.with_series(Series::Line { points });
    }
    vec![panel]
}

fn fig2(
    input: &ManifestInput,
    configs: &mut BTreeMap<String, Value>,
    staged: &mut Staged,
) -> Result<Value, CliError> {
    let (fwd, rev, fwd_report, rev_report) = forward_and_reverse(input, configs)?;
    staged.add("forward.csv", fwd.trajectory.to_csv_string());
    staged.add("reverse.csv", rev.trajectory.to_csv_string());
    let zoom = 0.1 * input.params.t_end;
    let mut panels = trajectory_panels(&fwd, &rev, Some(zoom));
    panels.extend(trajectory_panels(&fwd, &rev, None));
    staged.add("fig2_trajectories.svg", figure(&panels, 2));
    Ok(json!({
        "forward": {
            "class": fwd_report["classification"]["class"],
            "winner_count": fwd_report["classification"]["winners"].as_array().map_or(0, Vec::len),
            "final_entropy": fwd_report["final_entropy"],
        },
        "reverse": {
            "final_spread": rev_report["final_spread"],
            "final_entropy": rev_report["final_entropy"],
        },
    }))
}

/// True when consecutive values never drop by more than `slack`.
pub fn nondecreasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] >= w[0] - slack)
}

pub const ENTROPY_FLOOR: f64 = 1e-16;

fn fig3(
    input: &ManifestInput,
    configs: &mut BTreeMap<String, Value>,
    staged: &mut Staged,
) -> Result<Value, CliError> {
    let (fwd, rev, _, _) = forward_and_reverse(input, configs)?;
    let mut csv = String::from("t,branch,entropy\n");
    for (t, h) in rev
        .trajectory
        .times
        .iter()
        .zip(&rev.trajectory.diagnostics.entropy)
        .rev()
    {
        csv.push_str(&format!("{},reverse,{}\n", fmt17(-t), fmt17(*h)));
    }
    for (t, h) in fwd
        .trajectory
        .times
        .iter()
        .zip(&fwd.trajectory.diagnostics.entropy)
    {
        csv.push_str(&format!("{},forward,{}\n", fmt17(*t), fmt17(*h)));
    }
    staged.add("entropy.csv", csv);

    let forward_points = fwd
        .trajectory
        .times
        .iter()
        .copied()
        .zip(fwd.trajectory.diagnostics.entropy.iter().copied())
        .collect();
    let reverse_points = rev
        .trajectory
        .times
        .iter()
        .zip(&rev.trajectory.diagnostics.entropy)
        .map(|(t, h)| (-t, h.max(ENTROPY_FLOOR)))
        .collect();
    let panels = [
        Panel::new("entropy, positive time", "t", "H").with_series(Series::Line {
            points: forward_points,
        }),
        Panel::new("entropy, negative time (log scale)", "t", "H")
            .log_y()
            .with_series(Series::Line {
                points: reverse_points,
            }),
    ];
    staged.add("fig3_entropy.svg", figure(&panels, 2));

    let fwd_h = &fwd.trajectory.diagnostics.entropy;
    let rev_h = &rev.trajectory.diagnostics.entropy;
    let rev_final = *rev_h.last().expect("nonempty");
    Ok(json!({
        "forward_nondecreasing": nondecreasing(fwd_h, 1e-9),
        "forward_final_entropy": fwd_h.last(),
        "reverse_nonincreasing": rev_h.windows(2).all(|w| w[1] <= w[0] + 1e-9),
        "reverse_final_entropy": rev_final,
        "reverse_below_1e-10": rev_final < 1e-10,
    }))
}

/// One candidate instance for the nine-agent example.
pub struct NineAgentInstance {
    pub attempt: usize,
    pub found: bool,
    pub config: RunConfig,
    pub loaded: LoadedRun,
    pub simulation: Simulation,
    pub max_agent: usize,
    pub min_agent: usize,
}

fn argmax(x: &[f64]) -> usize {
    (0..x.len()).fold(0, |b, i| if x[i] > x[b] { i } else { b })
}

fn argmin(x: &[f64]) -> usize {
    (0..x.len()).fold(0, |b, i| if x[i] < x[b] { i } else { b })
}

/// Graph and initial-state seeds of search attempt `k`.
pub fn attempt_seeds(seed: u64, k: usize) -> (u64, u64) {
    let gs = seed.wrapping_mul(1 << 20).wrapping_add(2 * k as u64);
    (gs, gs.wrapping_add(1))
}

/// Walks attempts in order until the run ends in E_s with the agent of
/// largest initial value among the losers and the one of smallest initial
/// value among the winners. Falls
/// back to attempt 0 when none qualifies.
pub fn find_nine_agent_instance(
    seed: u64,
    params: &ExperimentParams,
) -> Result<NineAgentInstance, CliError> {
    let tol = Tolerances::default();
    let mut first = None;
    for k in 0..params.max_attempts.max(1) {
        let (gs, is) = attempt_seeds(seed, k);
        let config = params.run_config(gs, is, true, Direction::Forward);
        let loaded = LoadedRun::load(config.clone(), std::path::Path::new(""))?;
        let (simulation, _) = loaded.execute()?;
        let x = simulation.trajectory.final_state();
        let (max_agent, min_agent) = (argmax(&loaded.x0), argmin(&loaded.x0));
        let report = classify_equilibrium(&loaded.graph, x, tol)?;
        let found = report.class == EquilibriumClass::Es
            && !report.winners.contains(max_agent)
            && report.winners.contains(min_agent);
        let instance = NineAgentInstance {
            attempt: k,
            found,
            config,
            loaded,
            simulation,
            max_agent,
            min_agent,
        };
        if found {
            return Ok(instance);
        }
        if first.is_none() {
            first = Some(instance);
        }
    }
    Ok(first.expect("at least one attempt"))
}

fn fig4(
    input: &ManifestInput,
    configs: &mut BTreeMap<String, Value>,
    staged: &mut Staged,
) -> Result<Value, CliError> {
    let inst = find_nine_agent_instance(input.seed, &input.params)?;
    record(configs, "instance", &inst.config)?;
    staged.add("trajectory.csv", inst.simulation.trajectory.to_csv_string());
    staged.add(
        "fig4_nine_agents.svg",
        trajectory_figure(&inst.simulation, Direction::Forward),
    );
    let x0 = &inst.loaded.x0;
    let x = inst.simulation.trajectory.final_state();
    let report = classify_equilibrium(&inst.loaded.graph, x, Tolerances::default())?;
    Ok(json!({
        "attempt": inst.attempt,
        "found": inst.found,
        "max_initial_agent": inst.max_agent,
        "max_initial_agent_lost": !report.winners.contains(inst.max_agent),
        "min_initial_agent": inst.min_agent,
        "min_initial_agent_won": report.winners.contains(inst.min_agent),
        "min_initial_value": x0[inst.min_agent],
        "min_agent_final_value": x[inst.min_agent],
        "min_agent_gained": x[inst.min_agent] > x0[inst.min_agent],
        "non_max_agent_won": report.winners.iter().any(|i| i != inst.max_agent),
        "class": report.class,
        "winners": report.winners,
        "graph_hash": inst.loaded.graph.content_hash(),
    }))
}

fn fig5(
    input: &ManifestInput,
    configs: &mut BTreeMap<String, Value>,
    staged: &mut Staged,
) -> Result<Value, CliError> {
    let inst = find_nine_agent_instance(input.seed, &input.params)?;
    record(configs, "instance", &inst.config)?;
    let sweep = input
        .params
        .sweep
        .clone()
        .ok_or_else(|| CliError::config("fig5_sweep needs params.sweep"))?;
    let problem = ProblemConfig {
        graph: graph_source_for(&inst.loaded.graph),
        alpha: inst.min_agent,
        weight: 1.0,
        x0: initial_source_for(&inst.loaded.x0),
        x_alpha0: None,
        horizon: input.params.t_end,
        integrator: IntegratorOptions {
            dt: input.params.dt,
            ..Default::default()
        },
        mode: SearchMode::Exhaustive,
        restarts: 1,
        seed: input.seed,
        sweep: Some(sweep.clone()),
    };
    record(configs, "problem", &problem)?;
    let loaded = LoadedProblem::load(problem, std::path::Path::new(""))?;
    let grid = sweep.grid()?;
    let table = sweep_initial_value(&loaded.problem, &grid)?;
    let report = sweep_report(&loaded, &grid, &table);
    let base = (
        inst.loaded.x0[inst.min_agent],
        inst.simulation.trajectory.final_state()[inst.min_agent],
    );
    staged.add("sweep.csv", table.to_csv_string());
    staged.add("fig5_sweep.svg", sweep_figure(&table, &report, Some(base)));
    let reached_zero = table.points.iter().any(|p| p.final_value <= 1e-6);
    Ok(json!({
        "alpha": inst.min_agent,
        "instance_found": inst.found,
        "base_point": [base.0, base.1],
        "others_mass": report.others_mass,
        "others_range": report.others_range,
        "extreme_fraction": report.extreme_fraction,
        "extreme_outcome_points": report.extreme_outcome_points,
        "some_outcome_near_zero": reached_zero,
        "evaluations": table.points.len(),
    }))
}

/// Parses a manifest file's reproducible part.
pub fn read_manifest(path: &std::path::Path) -> Result<ManifestInput, CliError> {
    Ok(read_config::<ManifestInput>(path)?.0)
}
