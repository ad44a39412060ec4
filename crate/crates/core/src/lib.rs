//! Winners-take-all dynamics on weighted undirected graphs.
//!
//! Each agent `i` holds a nonnegative resource `x_i` and competes with its
//! neighbours according to
//!
//! ```text
//! dx_i/dt = sum_j a_ij (x_i - x_j) x_i x_j
//! ```
//!
//! The total resource is conserved, the nonnegative orthant is invariant,
//! and trajectories settle on states where losers hold nothing and winners
//! either do not touch or hold equal amounts. Run backwards in time the same
//! dynamics behave like a consensus protocol with a state-dependent
//! Laplacian.
//!
//! Modules:
//! - [`graph`]: graphs, induced subgraphs, components, seeded random graphs.
//! - [`dynamics`]: forward/reverse fields, the state Laplacian, generalized interactions.
//! - [`integrate`]: positivity-preserving RK4/Euler with conservation audit.
//! - [`analysis`]: entropy, equilibrium classification, linearization, escape tests.
//! - [`linalg`]: dense matrices and a Jacobi eigensolver.
//! - [`optimize`]: opponent selection by exhaustive or greedy search.

pub mod analysis;
pub mod dynamics;
pub mod graph;
pub mod integrate;
pub mod linalg;
pub mod optimize;

pub use analysis::{
    classify_equilibrium, entropy, linearize_at, perturb_and_escape, EquilibriumClass,
    EquilibriumReport, SpectrumReport, Tolerances,
};
pub use dynamics::{
    check_interactions, generalized_vector_field, laplacian, random_state, reverse_vector_field,
    vector_field, InteractionSpec,
};
pub use graph::{random_connected_graph, random_graph, Graph, NodeSet, WeightMode};
pub use integrate::{
    simulate, simulate_reverse, step, Direction, IntegratorOptions, Method, Simulation, Trajectory,
};
pub use linalg::{symmetric_eigenvalues, SquareMatrix};
pub use optimize::{
    evaluate_choice, exhaustive_search, greedy_search, sweep_initial_value, OpponentMask,
    OptimizeProblem, OptimizeResult,
};
