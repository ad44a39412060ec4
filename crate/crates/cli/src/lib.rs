//! Command-line front end for winners-take-all simulations.
//!
//! Subcommands: `simulate`, `classify`, `optimize`, `experiment`. Exit codes
//! are 0 on success, 1 for configuration and I/O errors, 2 for numerical
//! failures and 3 when the exhaustive-search guard is exceeded.

pub mod commands;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod svg;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use error::CliError;

pub const TOOL: &str = "wta";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "wta", version, about = "Winners-take-all dynamics on graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON config (run config, optimization problem or experiment manifest).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides random seeds: graph gets `seed`, initial state `seed + 1`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
    /// Suppress progress messages on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a run config and write trajectory CSV and report JSON.
    Simulate,
    /// Classify a state on a graph and print the report as JSON.
    Classify {
        /// File holding a JSON array with one value per node.
        #[arg(long)]
        state: PathBuf,
        /// File holding graph JSON `{"n": .., "edges": [[i, j, w], ..]}`.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        zero_tol: f64,
        #[arg(long, default_value_t = 1e-6)]
        equal_tol: f64,
    },
    /// Choose an agent's opponents to maximize its final value.
    Optimize {
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        restarts: Option<usize>,
        /// Sweep the agent's initial value over `start:stop:points`.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Regenerate one of the named figure experiments.
    Experiment {
        /// fig1_bars, fig2_trajectories, fig3_entropy, fig4_nine_agents or fig5_sweep.
        /// May be omitted when `--config` names a manifest.
        name: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        t_end: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Greedy,
}

/// Shared flags after parsing.
#[derive(Debug, Clone)]
pub struct Globals {
    pub config: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub svg: bool,
    pub quiet: bool,
}

impl Globals {
    pub fn log(&self, msg: impl std::fmt::Display) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let globals = Globals {
        config: cli.config,
        seed: cli.seed,
        out: cli.out.unwrap_or_else(|| PathBuf::from("out")),
        svg: cli.svg,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Simulate => commands::simulate(&globals),
        Command::Classify {
            state,
            graph,
            zero_tol,
            equal_tol,
        } => commands::classify(&state, &graph, zero_tol, equal_tol),
        Command::Optimize {
            mode,
            restarts,
            sweep,
        } => commands::optimize(&globals, mode, restarts, sweep.as_deref()),
        Command::Experiment { name, n, t_end } => {
            experiments::run_command(&globals, name.as_deref(), n, t_end)
        }
    }
}
