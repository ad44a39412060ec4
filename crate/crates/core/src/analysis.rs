//! Equilibrium classification, entropy, linearization at symmetric
//! equilibria, and a dynamic instability witness.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{validate_state, vector_field, DynamicsError};
use crate::graph::{Graph, GraphError, NodeSet};
use crate::integrate::{simulate, IntegrateError, IntegratorOptions};
use crate::linalg::{symmetric_eigenvalues, LinalgError, SquareMatrix};

/// Second-smallest eigenvalue threshold for an "unstable" verdict.
pub const SPECTRAL_GAP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("entropy of an empty state is undefined")]
    EmptyState,
    #[error(transparent)]
    State(#[from] DynamicsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error("state is classified {0:?}, not E_u")]
    NotEu(EquilibriumClass),
    #[error("winner component {index} has {size} node(s); at least 2 are needed")]
    ComponentTooSmall { index: usize, size: usize },
    #[error("winner component index {index} out of range ({count} components)")]
    ComponentOutOfRange { index: usize, count: usize },
    #[error("tolerances must be positive")]
    InvalidTolerance,
    #[error("perturbation magnitude {delta} must be nonnegative and below the smallest winner value {min_winner}")]
    InvalidPerturbation { delta: f64, min_winner: f64 },
}

/// Population variance `(1/n) sum (x_i - mean)^2`, computed in two passes.
pub fn entropy(x: &[f64]) -> Result<f64, AnalysisError> {
    if x.is_empty() {
        return Err(AnalysisError::EmptyState);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    Ok(x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EquilibriumClass {
    /// Winners form an independent set.
    #[serde(rename = "E_s")]
    Es,
    /// Some edge joins two equal-valued winners.
    #[serde(rename = "E_u")]
    Eu,
    #[serde(rename = "not_equilibrium")]
    NotEquilibrium,
}

impl EquilibriumClass {
    pub fn label(self) -> &'static str {
        match self {
            EquilibriumClass::Es => "E_s",
            EquilibriumClass::Eu => "E_u",
            EquilibriumClass::NotEquilibrium => "not_equilibrium",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Agents below this value count as losers.
    pub zero_tol: f64,
    /// Relative agreement required inside a connected winner component.
    pub equal_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            zero_tol: 1e-8,
            equal_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WinnerComponent {
    pub members: NodeSet,
    /// Mean of the members' values.
    pub value: f64,
    /// Largest `|x_i - value|` over the members.
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub class: EquilibriumClass,
    pub winners: NodeSet,
    pub losers: NodeSet,
    /// `||F(x)||_inf`.
    pub residual: f64,
    /// Residual threshold that was applied, `1e-6 (1 + max x)`.
    pub residual_tol: f64,
    pub winner_components: Vec<WinnerComponent>,
    pub zero_tol: f64,
    pub equal_tol: f64,
}

pub fn classify_equilibrium(
    g: &Graph,
    x: &[f64],
    tol: Tolerances,
) -> Result<EquilibriumReport, AnalysisError> {
    if !(tol.zero_tol > 0.0 && tol.equal_tol > 0.0) {
        return Err(AnalysisError::InvalidTolerance);
    }
    let x = validate_state(g, x)?;
    let residual = vector_field(g, &x)?
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let max_x = x.iter().copied().fold(0.0f64, f64::max);
    let residual_tol = 1e-6 * (1.0 + max_x);

    let losers: NodeSet = (0..x.len()).filter(|&i| x[i] < tol.zero_tol).collect();
    let winners: NodeSet = (0..x.len()).filter(|&i| x[i] >= tol.zero_tol).collect();

    let (sub, map) = g.induced_subgraph(&winners)?;
    let winner_components: Vec<WinnerComponent> = sub
        .connected_components()
        .into_iter()
        .map(|local| {
            let members: NodeSet = local.iter().map(|k| map[k]).collect();
            let value = members.iter().map(|i| x[i]).sum::<f64>() / members.len() as f64;
            let spread = members
                .iter()
                .fold(0.0f64, |m, i| m.max((x[i] - value).abs()));
            WinnerComponent {
                members,
                value,
                spread,
            }
        })
        .collect();

    let unequal = winner_components
        .iter()
        .any(|c| c.spread > tol.equal_tol * c.value.max(1.0));
    let class = if residual >= residual_tol || unequal {
        EquilibriumClass::NotEquilibrium
    } else if winner_components.iter().any(|c| c.members.len() >= 2) {
        EquilibriumClass::Eu
    } else {
        EquilibriumClass::Es
    };

    Ok(EquilibriumReport {
        class,
        winners,
        losers,
        residual,
        residual_tol,
        winner_components,
        zero_tol: tol.zero_tol,
        equal_tol: tol.equal_tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Unstable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub subgraph: NodeSet,
    /// Common value `c` of the component.
    pub value: f64,
    /// Spectrum of `c^2 L`, ascending, where `L` is the Laplacian of the
    /// component's induced subgraph.
    pub eigenvalues: Vec<f64>,
    pub verdict: Verdict,
}

/// Linearizes the dynamics around an E_u point restricted to one connected
/// winner component.
///
/// Near `x_i = x_j = c` the perturbation obeys `d/dt dx = c^2 L dx` with `L`
/// the standard Laplacian of the component, so a connected component has one
/// zero eigenvalue and the rest positive.
pub fn linearize_at(
    g: &Graph,
    report: &EquilibriumReport,
    component_index: usize,
) -> Result<SpectrumReport, AnalysisError> {
    if report.class != EquilibriumClass::Eu {
        return Err(AnalysisError::NotEu(report.class));
    }
    let count = report.winner_components.len();
    let component = report.winner_components.get(component_index).ok_or(
        AnalysisError::ComponentOutOfRange {
            index: component_index,
            count,
        },
    )?;
    let size = component.members.len();
    if size < 2 {
        return Err(AnalysisError::ComponentTooSmall {
            index: component_index,
            size,
        });
    }
    let (sub, _) = g.induced_subgraph(&component.members)?;
    let mut m = SquareMatrix::from_row_major(size, sub.laplacian_matrix())?;
    let c = component.value;
    m.scale(c * c);
    let eigenvalues = symmetric_eigenvalues(&m)?;
    let verdict = if eigenvalues[1] > SPECTRAL_GAP_TOL {
        Verdict::Unstable
    } else {
        Verdict::Inconclusive
    };
    Ok(SpectrumReport {
        subgraph: component.members.clone(),
        value: c,
        eigenvalues,
        verdict,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeReport {
    pub delta: f64,
    pub seed: u64,
    pub perturbed: Vec<f64>,
    /// Largest `||x(t) - x_eq||_inf` over the recorded trajectory.
    pub max_deviation: f64,
    /// `max_deviation > 100 * delta`.
    pub escaped: bool,
    pub final_state: Vec<f64>,
    pub final_report: EquilibriumReport,
}

/// Perturbs an E_u point inside its multi-node winner components and checks
/// whether the trajectory leaves the `100 * delta` neighbourhood by `t_end`.
///
/// Within each such component the perturbation has zero sum, so every
/// component keeps its mass, and its largest entry is `delta` in magnitude.
pub fn perturb_and_escape(
    g: &Graph,
    x_eq: &[f64],
    delta: f64,
    seed: u64,
    t_end: f64,
) -> Result<EscapeReport, AnalysisError> {
    let opts = IntegratorOptions {
        dt: 1e-3,
        t_end,
        record_stride: 10,
        stop_on_equilibrium: true,
        ..Default::default()
    };
    perturb_and_escape_with(g, x_eq, delta, seed, &opts)
}

pub fn perturb_and_escape_with(
    g: &Graph,
    x_eq: &[f64],
    delta: f64,
    seed: u64,
    opts: &IntegratorOptions,
) -> Result<EscapeReport, AnalysisError> {
    let report = classify_equilibrium(g, x_eq, Tolerances::default())?;
    if report.class != EquilibriumClass::Eu {
        return Err(AnalysisError::NotEu(report.class));
    }
    let x_eq = validate_state(g, x_eq)?;
    let min_winner = report
        .winners
        .iter()
        .map(|i| x_eq[i])
        .fold(f64::INFINITY, f64::min);
    if !(delta >= 0.0 && delta < min_winner) {
        return Err(AnalysisError::InvalidPerturbation { delta, min_winner });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perturbed = x_eq.clone();
    for component in report
        .winner_components
        .iter()
        .filter(|c| c.members.len() >= 2)
    {
        let raw: Vec<f64> = component
            .members
            .iter()
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let mean = raw.iter().sum::<f64>() / raw.len() as f64;
        let centered: Vec<f64> = raw.iter().map(|r| r - mean).collect();
        let peak = centered.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if peak == 0.0 {
            continue;
        }
        for (i, r) in component.members.iter().zip(&centered) {
            perturbed[i] = x_eq[i] + delta * r / peak;
        }
    }

    let sim = simulate(g, &perturbed, opts)?;
    let traj = &sim.trajectory;
    let max_deviation = traj
        .states
        .iter()
        .map(|s| {
            s.iter()
                .zip(&x_eq)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        })
        .fold(0.0, f64::max);
    let final_state = traj.final_state().to_vec();
    let final_report = classify_equilibrium(g, &final_state, Tolerances::default())?;
    Ok(EscapeReport {
        delta,
        seed,
        perturbed,
        max_deviation,
        escaped: max_deviation > 100.0 * delta,
        final_state,
        final_report,
    })
}
