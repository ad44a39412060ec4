//! The winners-take-all vector field and its relatives.
//!
//! Forward field: `dx_i = sum_j a_ij (x_i - x_j) x_i x_j`. Every term carries
//! the factor `x_i`, so agents at zero stay at zero, and the pairwise terms
//! cancel across each undirected edge, so the total mass is conserved.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;
use crate::linalg::SquareMatrix;

/// States in `[-NEGATIVE_CLAMP, 0)` are treated as round-off and clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("state has length {got}, graph has {expected} nodes")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state component {index} is negative ({value:e})")]
    NegativeState { index: usize, value: f64 },
    #[error("state component {index} is not finite")]
    NonFiniteState { index: usize },
    #[error("invalid sampling request: {0}")]
    InvalidSampling(String),
    #[error("unknown interaction function {0:?}")]
    UnknownInteraction(String),
}

/// Checks `x` against `g` and returns it with round-off negatives clamped.
pub fn validate_state(g: &Graph, x: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    if x.len() != g.n() {
        return Err(DynamicsError::DimensionMismatch {
            expected: g.n(),
            got: x.len(),
        });
    }
    x.iter()
        .enumerate()
        .map(|(index, &value)| {
            if !value.is_finite() {
                Err(DynamicsError::NonFiniteState { index })
            } else if value < -NEGATIVE_CLAMP {
                Err(DynamicsError::NegativeState { index, value })
            } else {
                Ok(value.max(0.0))
            }
        })
        .collect()
}

/// `n` values uniform in `(lo, hi]`, drawn as `hi - (hi - lo) u` with
/// `u` from `ChaCha8Rng::seed_from_u64(seed)`.
pub fn random_state(n: usize, lo: f64, hi: f64, seed: u64) -> Result<Vec<f64>, DynamicsError> {
    if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
        return Err(DynamicsError::InvalidSampling(format!(
            "state range must satisfy 0 <= lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n).map(|_| hi - (hi - lo) * rng.gen::<f64>()).collect())
}

/// Forward field written into `out`. No validation; stage states of an
/// explicit integrator may legitimately dip below zero.
pub fn vector_field_into(g: &Graph, x: &[f64], out: &mut [f64]) {
    for (i, slot) in out.iter_mut().enumerate() {
        let xi = x[i];
        let mut acc = 0.0;
        for &(j, w) in g.neighbors(i) {
            let xj = x[j];
            acc += w * (xi - xj) * (xi * xj);
        }
        *slot = acc;
    }
}

pub fn vector_field(g: &Graph, x: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    let x = validate_state(g, x)?;
    let mut out = vec![0.0; x.len()];
    vector_field_into(g, &x, &mut out);
    Ok(out)
}

/// Reverse-time field, the exact negation of [`vector_field`].
pub fn reverse_vector_field(g: &Graph, y: &[f64]) -> Result<Vec<f64>, DynamicsError> {
    let mut out = vector_field(g, y)?;
    out.iter_mut().for_each(|v| *v = -*v);
    Ok(out)
}

/// State-dependent Laplacian with `l_ij = -a_ij y_i y_j` off the diagonal
/// and `l_ii = -sum_{j != i} l_ij`, so that `dy/dtau = -L(y) y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaplacianMatrix(SquareMatrix);

impl LaplacianMatrix {
    pub fn matrix(&self) -> &SquareMatrix {
        &self.0
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.0.n())
            .map(|i| self.0.row(i).iter().sum())
            .collect()
    }

    /// `-L y`.
    pub fn apply_negated(&self, y: &[f64]) -> Vec<f64> {
        self.0.mul_vec(y).into_iter().map(|v| -v).collect()
    }
}

pub fn laplacian(g: &Graph, y: &[f64]) -> Result<LaplacianMatrix, DynamicsError> {
    let y = validate_state(g, y)?;
    let n = g.n();
    let mut m = SquareMatrix::zeros(n);
    for i in 0..n {
        let mut off_sum = 0.0;
        for &(j, w) in g.neighbors(i) {
            let l = -(w * (y[i] * y[j]));
            m.set(i, j, l);
            off_sum += l;
        }
        m.set(i, i, -off_sum);
    }
    Ok(LaplacianMatrix(m))
}

type DifferenceFn = dyn Fn(f64) -> f64 + Send + Sync;
type CouplingFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Interaction pair for the generalized field `dx_i = sum_j a_ij f(x_i - x_j) g(x_i, x_j)`.
///
/// `f` should be odd and positive on `(0, inf)`; `g` symmetric and zero
/// whenever either argument is zero. Use [`check_interactions`] to sample
/// these conditions.
#[derive(Clone)]
pub struct InteractionSpec {
    f_name: String,
    g_name: String,
    f: Arc<DifferenceFn>,
    g: Arc<CouplingFn>,
}

impl fmt::Debug for InteractionSpec {
    fn fmt(&self, fmt: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt.debug_struct("InteractionSpec")
            .field("f", &self.f_name)
            .field("g", &self.g_name)
            .finish()
    }
}

impl Default for InteractionSpec {
    fn default() -> Self {
        Self::custom("identity", |a| a, "product", |u, v| u * v)
    }
}

impl InteractionSpec {
    pub fn custom(
        f_name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g_name: impl Into<String>,
        g: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        InteractionSpec {
            f_name: f_name.into(),
            g_name: g_name.into(),
            f: Arc::new(f),
            g: Arc::new(g),
        }
    }

    /// Built-in interactions selectable by name:
    ///
    /// | name             | formula            |
    /// |------------------|--------------------|
    /// | `identity`       | `f(a) = a`         |
    /// | `cubic`          | `f(a) = a^3`       |
    /// | `tanh`           | `f(a) = tanh(a)`   |
    /// | `product`        | `g(u, v) = u v`    |
    /// | `scaled_product` | `g(u, v) = k u v`  |
    pub fn from_names(f: &str, g: &str, g_scale: f64) -> Result<Self, DynamicsError> {
        let f_fn: Arc<DifferenceFn> = match f {
            "identity" => Arc::new(|a| a),
            "cubic" => Arc::new(|a| a * a * a),
            "tanh" => Arc::new(f64::tanh),
            other => return Err(DynamicsError::UnknownInteraction(other.to_string())),
        };
        let g_fn: Arc<CouplingFn> = match g {
            "product" => Arc::new(|u, v| u * v),
            "scaled_product" => Arc::new(move |u, v| g_scale * (u * v)),
            other => return Err(DynamicsError::UnknownInteraction(other.to_string())),
        };
        let g_name = if g == "scaled_product" {
            format!("scaled_product(k={g_scale})")
        } else {
            g.to_string()
        };
        Ok(InteractionSpec {
            f_name: f.to_string(),
            g_name,
            f: f_fn,
            g: g_fn,
        })
    }

    pub fn f_name(&self) -> &str {
        &self.f_name
    }

    pub fn g_name(&self) -> &str {
        &self.g_name
    }

    #[inline]
    pub fn f(&self, a: f64) -> f64 {
        (self.f)(a)
    }

    #[inline]
    pub fn g(&self, u: f64, v: f64) -> f64 {
        (self.g)(u, v)
    }
}

/// Config form of an interaction, `{"f": "...", "g": "...", "g_scale": k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    #[serde(default = "default_f")]
    pub f: String,
    #[serde(default = "default_g")]
    pub g: String,
    #[serde(default = "default_scale")]
    pub g_scale: f64,
}

fn default_f() -> String {
    "identity".into()
}

fn default_g() -> String {
    "product".into()
}

fn default_scale() -> f64 {
    1.0
}

impl Default for InteractionConfig {
    fn default() -> Self {
        InteractionConfig {
            f: default_f(),
            g: default_g(),
            g_scale: default_scale(),
        }
    }
}

impl InteractionConfig {
    pub fn build(&self) -> Result<InteractionSpec, DynamicsError> {
        InteractionSpec::from_names(&self.f, &self.g, self.g_scale)
    }
}

pub fn generalized_vector_field_into(
    g: &Graph,
    x: &[f64],
    spec: &InteractionSpec,
    out: &mut [f64],
) {
    for (i, slot) in out.iter_mut().enumerate() {
        let xi = x[i];
        let mut acc = 0.0;
        for &(j, w) in g.neighbors(i) {
            let xj = x[j];
            acc += w * spec.f(xi - xj) * spec.g(xi, xj);
        }
        *slot = acc;
    }
}

pub fn generalized_vector_field(
    g: &Graph,
    x: &[f64],
    spec: &InteractionSpec,
) -> Result<Vec<f64>, DynamicsError> {
    let x = validate_state(g, x)?;
    let mut out = vec![0.0; x.len()];
    generalized_vector_field_into(g, &x, spec, &mut out);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionCheck {
    FOdd,
    FPositive,
    GSymmetric,
    GVanishesAtZero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionViolation {
    pub check: InteractionCheck,
    /// Arguments at which the check failed.
    pub at: Vec<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionReport {
    pub f: String,
    pub g: String,
    pub samples: usize,
    pub seed: u64,
    pub violation: Option<InteractionViolation>,
}

impl InteractionReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

/// Samples the hypotheses on `f` and `g` at random points of `[lo, hi]`.
///
/// Per sample, with `a`, `u`, `v` uniform in the range, the checks run in
/// this order and the first failure is reported:
/// `|f(a) + f(-a)| <= 1e-12 max(1, |f(a)|)`, `f(a) > 0` for `a > 0`,
/// `|g(u,v) - g(v,u)| <= 1e-12 max(1, |g(u,v)|)`, `|g(0,a)|, |g(a,0)| <= 1e-12`.
pub fn check_interactions(
    spec: &InteractionSpec,
    samples: usize,
    range: (f64, f64),
    seed: u64,
) -> Result<InteractionReport, DynamicsError> {
    const TOL: f64 = 1e-12;
    let (lo, hi) = range;
    if samples == 0 {
        return Err(DynamicsError::InvalidSampling(
            "samples must be >= 1".into(),
        ));
    }
    if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
        return Err(DynamicsError::InvalidSampling(format!(
            "range must satisfy 0 <= lo <= hi, got [{lo}, {hi}]"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || lo + (hi - lo) * rng.gen::<f64>();
    let mut violation = None;
    for _ in 0..samples {
        let a = draw();
        let u = draw();
        let v = draw();
        let fa = spec.f(a);
        let odd_gap = (fa + spec.f(-a)).abs();
        if !(odd_gap <= TOL * fa.abs().max(1.0)) {
            violation = Some(InteractionViolation {
                check: InteractionCheck::FOdd,
                at: vec![a],
                detail: format!("f({a}) + f({}) = {odd_gap:e}", -a),
            });
            break;
        }
        if a > 0.0 && !(fa > 0.0) {
            violation = Some(InteractionViolation {
                check: InteractionCheck::FPositive,
                at: vec![a],
                detail: format!("f({a}) = {fa}"),
            });
            break;
        }
        let guv = spec.g(u, v);
        let sym_gap = (guv - spec.g(v, u)).abs();
        if !(sym_gap <= TOL * guv.abs().max(1.0)) {
            violation = Some(InteractionViolation {
                check: InteractionCheck::GSymmetric,
                at: vec![u, v],
                detail: format!("|g(u,v) - g(v,u)| = {sym_gap:e}"),
            });
            break;
        }
        let (g0a, ga0) = (spec.g(0.0, a), spec.g(a, 0.0));
        if !(g0a.abs() <= TOL && ga0.abs() <= TOL) {
            violation = Some(InteractionViolation {
                check: InteractionCheck::GVanishesAtZero,
                at: vec![a],
                detail: format!("g(0,{a}) = {g0a}, g({a},0) = {ga0}"),
            });
            break;
        }
    }
    Ok(InteractionReport {
        f: spec.f_name().to_string(),
        g: spec.g_name().to_string(),
        samples,
        seed,
        violation,
    })
}
