//! Fixed-step explicit integration with positivity-triggered step halving.
//!
//! A step that would leave the nonnegative orthant is retried at half the
//! step size, up to `positivity_shrink` times. Whatever negatives remain are
//! clamped to zero if they lie within [`NEGATIVE_CLAMP`] of it; anything
//! deeper is a [`IntegrateError::PositivityFailure`]. When a step had to be
//! halved, [`simulate`] keeps sub-stepping until the full base step is
//! covered, so recorded stamps stay on the grid `t = k * dt`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::entropy;
use crate::dynamics::{
    generalized_vector_field_into, validate_state, vector_field_into, DynamicsError,
    InteractionSpec, NEGATIVE_CLAMP,
};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("invalid integrator options: {0}")]
    InvalidOptions(String),
    #[error(transparent)]
    State(#[from] DynamicsError),
    #[error("component {index} reached {value:e} after all step halvings (dt = {dt:e})")]
    PositivityFailure { index: usize, value: f64, dt: f64 },
    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    Rk4,
    Euler,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConservationMode {
    /// Report drift, never correct it.
    #[default]
    Audit,
    /// Rescale to the initial mass after every step.
    Renormalize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Forward,
    Reverse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorOptions {
    pub dt: f64,
    pub method: Method,
    pub t_end: f64,
    pub record_stride: usize,
    pub stop_on_equilibrium: bool,
    /// Stop threshold on `||dx||_inf`.
    pub eq_tol: f64,
    pub conservation: ConservationMode,
    pub positivity_shrink: u32,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            dt: 1e-3,
            method: Method::Rk4,
            t_end: 1.0,
            record_stride: 1,
            stop_on_equilibrium: false,
            eq_tol: 1e-10,
            conservation: ConservationMode::Audit,
            positivity_shrink: 40,
        }
    }
}

impl IntegratorOptions {
    pub fn validate(&self) -> Result<(), IntegrateError> {
        let bad = |msg: &str| Err(IntegrateError::InvalidOptions(msg.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive and finite");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be positive and finite");
        }
        if self.record_stride == 0 {
            return bad("record_stride must be at least 1");
        }
        if !(self.eq_tol > 0.0) {
            return bad("eq_tol must be positive");
        }
        if self.positivity_shrink > 60 {
            return bad("positivity_shrink must be at most 60");
        }
        Ok(())
    }

    /// Number of steps to reach `t_end`; the last one may be shorter than `dt`.
    fn step_count(&self) -> u64 {
        let ratio = self.t_end / self.dt;
        let rounded = ratio.round();
        if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
            (rounded as u64).max(1)
        } else {
            ratio.ceil() as u64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: Vec<f64>,
    pub dt_used: f64,
    pub halvings: u32,
}

/// One explicit step of the forward field from `x`.
pub fn step(
    g: &Graph,
    x: &[f64],
    dt: f64,
    method: Method,
    max_halvings: u32,
) -> Result<StepOutcome, IntegrateError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(IntegrateError::InvalidOptions(
            "dt must be positive and finite".into(),
        ));
    }
    let x = validate_state(g, x)?;
    let mut stepper = Stepper::new(g, None, Direction::Forward, method);
    let mut f0 = vec![0.0; x.len()];
    stepper.eval(&x, &mut f0);
    let mut state = x.clone();
    let (dt_used, halvings) = stepper.advance_once(&x, &f0, dt, max_halvings, &mut state, 0.0)?;
    Ok(StepOutcome {
        state,
        dt_used,
        halvings,
    })
}

struct Stepper<'a> {
    graph: &'a Graph,
    interaction: Option<&'a InteractionSpec>,
    negate: bool,
    method: Method,
    stage: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(
        graph: &'a Graph,
        interaction: Option<&'a InteractionSpec>,
        direction: Direction,
        method: Method,
    ) -> Self {
        let n = graph.n();
        Stepper {
            graph,
            interaction,
            negate: direction == Direction::Reverse,
            method,
            stage: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
        }
    }

    fn eval(&self, x: &[f64], out: &mut [f64]) {
        match self.interaction {
            None => vector_field_into(self.graph, x, out),
            Some(spec) => generalized_vector_field_into(self.graph, x, spec, out),
        }
        if self.negate {
            out.iter_mut().for_each(|v| *v = -*v);
        }
    }

    /// Candidate state for one step of size `h`, written into `out`.
    fn candidate(&mut self, x: &[f64], k1: &[f64], h: f64, out: &mut [f64]) {
        match self.method {
            Method::Euler => {
                for i in 0..x.len() {
                    out[i] = x[i] + h * k1[i];
                }
            }
            Method::Rk4 => {
                let half = 0.5 * h;
                let mut stage = std::mem::take(&mut self.stage);
                let mut k2 = std::mem::take(&mut self.k2);
                let mut k3 = std::mem::take(&mut self.k3);
                let mut k4 = std::mem::take(&mut self.k4);
                for i in 0..x.len() {
                    stage[i] = x[i] + half * k1[i];
                }
                self.eval(&stage, &mut k2);
                for i in 0..x.len() {
                    stage[i] = x[i] + half * k2[i];
                }
                self.eval(&stage, &mut k3);
                for i in 0..x.len() {
                    stage[i] = x[i] + h * k3[i];
                }
                self.eval(&stage, &mut k4);
                let sixth = h / 6.0;
                for i in 0..x.len() {
                    out[i] = x[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                self.stage = stage;
                self.k2 = k2;
                self.k3 = k3;
                self.k4 = k4;
            }
        }
    }

    /// One accepted step from `x` (field `k1` there), trying `dt` and halving
    /// on negativity. Returns the step size used and the number of halvings.
    fn advance_once(
        &mut self,
        x: &[f64],
        k1: &[f64],
        dt: f64,
        max_halvings: u32,
        out: &mut [f64],
        t: f64,
    ) -> Result<(f64, u32), IntegrateError> {
        let mut h = dt;
        let mut halvings = 0;
        loop {
            self.candidate(x, k1, h, out);
            if out.iter().any(|v| !v.is_finite()) {
                return Err(IntegrateError::NonFinite { t });
            }
            if out.iter().all(|&v| v >= 0.0) {
                return Ok((h, halvings));
            }
            if halvings == max_halvings {
                break;
            }
            h *= 0.5;
            halvings += 1;
        }
        for (index, v) in out.iter_mut().enumerate() {
            if *v < 0.0 {
                if *v >= -NEGATIVE_CLAMP {
                    *v = 0.0;
                } else {
                    return Err(IntegrateError::PositivityFailure {
                        index,
                        value: *v,
                        dt: h,
                    });
                }
            }
        }
        Ok((h, halvings))
    }

    /// Covers a full interval `dt` from `x` (field `k1` there), sub-stepping
    /// with power-of-two fractions of `dt` when halving was needed.
    fn advance_interval(
        &mut self,
        x: &mut Vec<f64>,
        k1: &[f64],
        dt: f64,
        max_halvings: u32,
        scratch: &mut Vec<f64>,
        t: f64,
    ) -> Result<u32, IntegrateError> {
        let full: u64 = 1 << max_halvings;
        let mut remaining = full;
        let mut total_halvings = 0;
        let mut field = k1.to_vec();
        let mut first = true;
        while remaining > 0 {
            // Largest power-of-two chunk that fits in what is left.
            let chunk_log = 63 - remaining.leading_zeros();
            let level = max_halvings - chunk_log;
            let h = dt * 0.5f64.powi(level as i32);
            if !first {
                self.eval(x, &mut field);
            }
            first = false;
            let (_, halvings) = self.advance_once(x, &field, h, chunk_log, scratch, t)?;
            std::mem::swap(x, scratch);
            remaining -= 1u64 << (chunk_log - halvings);
            total_halvings += halvings;
        }
        Ok(total_halvings)
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub mass: Vec<f64>,
    pub entropy: Vec<f64>,
    pub max: Vec<f64>,
    pub min: Vec<f64>,
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryMeta {
    pub graph_hash: String,
    pub options: IntegratorOptions,
    pub seed: Option<u64>,
    pub direction: Direction,
    pub interaction_f: String,
    pub interaction_g: String,
}

/// Recorded states and per-stamp diagnostics of one run.
///
/// For reverse runs the stamps are reverse times `tau >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub diagnostics: Diagnostics,
    pub meta: TrajectoryMeta,
    pub steps: u64,
    pub halvings: u64,
    pub stopped_on_equilibrium: bool,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory has at least one stamp")
    }

    pub fn final_time(&self) -> f64 {
        *self
            .times
            .last()
            .expect("trajectory has at least one stamp")
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.meta.seed = Some(seed);
        self
    }

    /// CSV with header `t,x_0,...,x_{n-1},mass,entropy,max,min,residual`,
    /// every number printed with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let n = self.states.first().map_or(0, Vec::len);
        let mut header = String::from("t");
        for i in 0..n {
            header.push_str(&format!(",x_{i}"));
        }
        header.push_str(",mass,entropy,max,min,residual");
        writeln!(w, "{header}")?;
        let d = &self.diagnostics;
        for (k, (t, x)) in self.times.iter().zip(&self.states).enumerate() {
            let mut line = fmt17(*t);
            for v in x {
                line.push(',');
                line.push_str(&fmt17(*v));
            }
            for v in [d.mass[k], d.entropy[k], d.max[k], d.min[k], d.residual[k]] {
                line.push(',');
                line.push_str(&fmt17(v));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// 17 significant digits, enough to round-trip an `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservationAudit {
    pub initial_mass: f64,
    pub final_mass: f64,
    /// Largest `|sum x(t) - sum x(0)|` over every step, measured before any
    /// renormalization.
    pub max_abs_drift: f64,
    pub drift_per_unit_time: f64,
    pub mode: ConservationMode,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Simulation {
    pub trajectory: Trajectory,
    pub audit: ConservationAudit,
}

pub fn simulate(
    g: &Graph,
    x0: &[f64],
    opts: &IntegratorOptions,
) -> Result<Simulation, IntegrateError> {
    run(g, x0, opts, Direction::Forward, None)
}

/// Integrates `dy/dtau = -F(y)`, the forward dynamics run backwards in time.
pub fn simulate_reverse(
    g: &Graph,
    y0: &[f64],
    opts: &IntegratorOptions,
) -> Result<Simulation, IntegrateError> {
    run(g, y0, opts, Direction::Reverse, None)
}

/// Either direction, optionally with a generalized interaction.
pub fn simulate_with(
    g: &Graph,
    x0: &[f64],
    opts: &IntegratorOptions,
    direction: Direction,
    interaction: Option<&InteractionSpec>,
) -> Result<Simulation, IntegrateError> {
    run(g, x0, opts, direction, interaction)
}

fn run(
    g: &Graph,
    x0: &[f64],
    opts: &IntegratorOptions,
    direction: Direction,
    interaction: Option<&InteractionSpec>,
) -> Result<Simulation, IntegrateError> {
    opts.validate()?;
    let mut x = validate_state(g, x0)?;
    let n = x.len();
    let mut stepper = Stepper::new(g, interaction, direction, opts.method);
    let total_steps = opts.step_count();
    let initial_mass: f64 = x.iter().sum();

    let (f_name, g_name) = match interaction {
        Some(spec) => (spec.f_name().to_string(), spec.g_name().to_string()),
        None => ("identity".to_string(), "product".to_string()),
    };
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        diagnostics: Diagnostics::default(),
        meta: TrajectoryMeta {
            graph_hash: g.content_hash(),
            options: opts.clone(),
            seed: None,
            direction,
            interaction_f: f_name,
            interaction_g: g_name,
        },
        steps: 0,
        halvings: 0,
        stopped_on_equilibrium: false,
    };

    let mut field = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut max_drift: f64 = 0.0;
    let mut k: u64 = 0;
    loop {
        let t = if k == total_steps {
            opts.t_end
        } else {
            k as f64 * opts.dt
        };
        stepper.eval(&x, &mut field);
        let residual = inf_norm(&field);
        let stop = opts.stop_on_equilibrium && residual < opts.eq_tol;
        let last = stop || k == total_steps;
        if last || k % opts.record_stride as u64 == 0 {
            record(&mut traj, t, &x, residual);
        }
        if last {
            traj.stopped_on_equilibrium = stop;
            break;
        }
        let h = if k + 1 == total_steps {
            opts.t_end - k as f64 * opts.dt
        } else {
            opts.dt
        };
        let halvings =
            stepper.advance_interval(&mut x, &field, h, opts.positivity_shrink, &mut scratch, t)?;
        traj.halvings += u64::from(halvings);
        k += 1;
        traj.steps = k;

        let mass: f64 = x.iter().sum();
        max_drift = max_drift.max((mass - initial_mass).abs());
        if opts.conservation == ConservationMode::Renormalize && mass > 0.0 {
            let factor = initial_mass / mass;
            x.iter_mut().for_each(|v| *v *= factor);
        }
    }

    let final_time = traj.final_time();
    let audit = ConservationAudit {
        initial_mass,
        final_mass: traj.final_state().iter().sum(),
        max_abs_drift: max_drift,
        drift_per_unit_time: if final_time > 0.0 {
            max_drift / final_time
        } else {
            0.0
        },
        mode: opts.conservation,
    };
    Ok(Simulation {
        trajectory: traj,
        audit,
    })
}

fn record(traj: &mut Trajectory, t: f64, x: &[f64], residual: f64) {
    let d = &mut traj.diagnostics;
    d.mass.push(x.iter().sum());
    d.entropy.push(entropy(x).unwrap_or(0.0));
    d.max
        .push(x.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    d.min.push(x.iter().copied().fold(f64::INFINITY, f64::min));
    d.residual.push(residual);
    traj.times.push(t);
    traj.states.push(x.to_vec());
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> Graph {
        Graph::new(2, &[(0, 1, 1.0)]).unwrap()
    }

    #[test]
    fn euler_step_by_hand() {
        let out = step(&edge(), &[2.0, 1.0], 0.1, Method::Euler, 40).unwrap();
        assert_eq!(out.halvings, 0);
        assert_eq!(out.dt_used, 0.1);
        assert!((out.state[0] - 2.2).abs() < 1e-15);
        assert!((out.state[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn uniform_state_is_a_fixed_point() {
        let g = Graph::complete(4).unwrap();
        for method in [Method::Rk4, Method::Euler] {
            let out = step(&g, &[0.25; 4], 0.5, method, 40).unwrap();
            assert_eq!(out.state, vec![0.25; 4]);
        }
    }

    #[test]
    fn zero_component_stays_exactly_zero() {
        let g = Graph::complete(3).unwrap();
        for method in [Method::Rk4, Method::Euler] {
            let out = step(&g, &[0.9, 0.0, 0.4], 0.01, method, 40).unwrap();
            assert_eq!(out.state[1], 0.0);
        }
    }

    #[test]
    fn euler_overshoot_triggers_halving() {
        // x + dt * (2, -2) with dt = 1 would put agent 1 at -1.
        let out = step(&edge(), &[2.0, 1.0], 1.0, Method::Euler, 40).unwrap();
        assert!(out.halvings >= 1);
        assert!(out.dt_used < 1.0);
        assert!(out.state.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn positivity_failure_without_halvings() {
        let err = step(&edge(), &[2.0, 1.0], 1.0, Method::Euler, 0).unwrap_err();
        assert!(matches!(
            err,
            IntegrateError::PositivityFailure { index: 1, .. }
        ));
    }

    #[test]
    fn halved_steps_still_cover_the_grid() {
        let opts = IntegratorOptions {
            dt: 1.0,
            method: Method::Euler,
            t_end: 3.0,
            ..Default::default()
        };
        let sim = simulate(&edge(), &[2.0, 1.0], &opts).unwrap();
        assert_eq!(sim.trajectory.times, vec![0.0, 1.0, 2.0, 3.0]);
        assert!(sim.trajectory.halvings > 0);
        assert!(sim.audit.max_abs_drift < 1e-12);
    }

    #[test]
    fn options_validation() {
        let base = IntegratorOptions::default();
        for bad in [
            IntegratorOptions {
                dt: 0.0,
                ..base.clone()
            },
            IntegratorOptions {
                t_end: -1.0,
                ..base.clone()
            },
            IntegratorOptions {
                record_stride: 0,
                ..base.clone()
            },
            IntegratorOptions {
                eq_tol: 0.0,
                ..base.clone()
            },
            IntegratorOptions {
                positivity_shrink: 61,
                ..base.clone()
            },
        ] {
            assert!(matches!(
                bad.validate(),
                Err(IntegrateError::InvalidOptions(_))
            ));
        }
    }

    #[test]
    fn step_count_handles_non_multiples() {
        let opts = IntegratorOptions {
            dt: 0.3,
            t_end: 1.0,
            ..Default::default()
        };
        assert_eq!(opts.step_count(), 4);
        let opts = IntegratorOptions {
            dt: 1e-3,
            t_end: 1.0,
            ..Default::default()
        };
        assert_eq!(opts.step_count(), 1000);
        let sim = simulate(
            &edge(),
            &[0.5, 0.5],
            &IntegratorOptions {
                dt: 0.3,
                t_end: 1.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(sim.trajectory.final_time(), 1.0);
        assert_eq!(sim.trajectory.len(), 5);
    }

    #[test]
    fn record_stride_keeps_final_stamp() {
        let opts = IntegratorOptions {
            dt: 0.1,
            t_end: 1.05,
            record_stride: 4,
            ..Default::default()
        };
        let sim = simulate(&edge(), &[0.6, 0.5], &opts).unwrap();
        let times = &sim.trajectory.times;
        assert_eq!(times.len(), 4);
        assert!((times[1] - 0.4).abs() < 1e-15);
        assert!((times[2] - 0.8).abs() < 1e-15);
        assert_eq!(*times.last().unwrap(), 1.05);
    }

    #[test]
    fn origin_is_constant() {
        let g = Graph::complete(3).unwrap();
        let sim = simulate(&g, &[0.0; 3], &IntegratorOptions::default()).unwrap();
        assert!(sim
            .trajectory
            .states
            .iter()
            .all(|s| s.iter().all(|&v| v == 0.0)));
        assert_eq!(sim.audit.max_abs_drift, 0.0);
    }

    #[test]
    fn stop_on_equilibrium_at_uniform_state() {
        let g = Graph::complete(3).unwrap();
        let opts = IntegratorOptions {
            stop_on_equilibrium: true,
            ..Default::default()
        };
        let sim = simulate(&g, &[0.5; 3], &opts).unwrap();
        assert!(sim.trajectory.stopped_on_equilibrium);
        assert_eq!(sim.trajectory.len(), 1);
    }

    #[test]
    fn reverse_run_keeps_zero_component() {
        let g = Graph::path(3).unwrap();
        let opts = IntegratorOptions {
            t_end: 2.0,
            ..Default::default()
        };
        let sim = simulate_reverse(&g, &[0.0, 0.5, 0.9], &opts).unwrap();
        assert!(sim.trajectory.states.iter().all(|s| s[0] == 0.0));
        assert_eq!(sim.trajectory.meta.direction, Direction::Reverse);
    }

    #[test]
    fn renormalize_mode_restores_mass() {
        let g = Graph::complete(4).unwrap();
        let opts = IntegratorOptions {
            dt: 0.05,
            method: Method::Euler,
            t_end: 1.0,
            conservation: ConservationMode::Renormalize,
            ..Default::default()
        };
        let sim = simulate(&g, &[0.9, 0.2, 0.5, 0.7], &opts).unwrap();
        assert!((sim.audit.final_mass - sim.audit.initial_mass).abs() < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let opts = IntegratorOptions {
            dt: 0.5,
            t_end: 1.0,
            ..Default::default()
        };
        let sim = simulate(&edge(), &[2.0, 1.0], &opts).unwrap();
        let csv = sim.trajectory.to_csv_string();
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,x_0,x_1,mass,entropy,max,min,residual"
        );
        let first: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|s| s.parse().unwrap())
            .collect();
        assert_eq!(first, vec![0.0, 2.0, 1.0, 3.0, 0.25, 2.0, 1.0, 2.0]);
        assert_eq!(csv.lines().count(), 4);
        assert_eq!(fmt17(0.1).parse::<f64>().unwrap(), 0.1);
        assert_eq!(fmt17(1.0 / 3.0).split('e').next().unwrap().len(), 18);
    }

    #[test]
    fn generalized_default_matches_standard_run() {
        let g = Graph::complete(4).unwrap();
        let x0 = [0.9, 0.2, 0.5, 0.7];
        let opts = IntegratorOptions {
            t_end: 0.5,
            ..Default::default()
        };
        let a = simulate(&g, &x0, &opts).unwrap();
        let spec = InteractionSpec::default();
        let b = simulate_with(&g, &x0, &opts, Direction::Forward, Some(&spec)).unwrap();
        assert_eq!(a.trajectory.states, b.trajectory.states);
    }
}
