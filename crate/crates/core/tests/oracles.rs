//! Independent checks against closed forms and brute-force computations.

use wta_core::analysis::{
    classify_equilibrium, entropy, linearize_at, perturb_and_escape, EquilibriumClass, Tolerances,
    Verdict,
};
use wta_core::dynamics::vector_field;
use wta_core::graph::{random_connected_graph, Graph, WeightMode};
use wta_core::integrate::{simulate, simulate_reverse, IntegratorOptions};

/// Two agents on one edge: with s = x0 + x1 fixed, d = x0 - x1 obeys
/// dd/dt = d (s^2 - d^2) / 2, so d(t)^2 = s^2 d0^2 / (d0^2 + (s^2 - d0^2) e^{-s^2 t}).
fn two_agent_gap(s: f64, d0: f64, t: f64) -> f64 {
    let d2 = s * s * d0 * d0 / (d0 * d0 + (s * s - d0 * d0) * (-s * s * t).exp());
    d2.sqrt() * d0.signum()
}

#[test]
fn two_agent_forward_matches_closed_form() {
    let g = Graph::new(2, &[(0, 1, 1.0)]).unwrap();
    let opts = IntegratorOptions {
        t_end: 10.0,
        record_stride: 100,
        ..Default::default()
    };
    let sim = simulate(&g, &[2.0, 1.0], &opts).unwrap();
    for (t, x) in sim.trajectory.times.iter().zip(&sim.trajectory.states) {
        let d = two_agent_gap(3.0, 1.0, *t);
        assert!((x[0] - (3.0 + d) / 2.0).abs() < 1e-9, "t={t}");
        assert!((x[1] - (3.0 - d) / 2.0).abs() < 1e-9, "t={t}");
    }
    let x = sim.trajectory.final_state();
    assert!((x[0] - 3.0).abs() < 1e-6 && x[1].abs() < 1e-6);
}

#[test]
fn two_agent_reverse_reaches_the_average() {
    let g = Graph::new(2, &[(0, 1, 1.0)]).unwrap();
    let opts = IntegratorOptions {
        t_end: 10.0,
        record_stride: 100,
        ..Default::default()
    };
    let sim = simulate_reverse(&g, &[2.0, 1.0], &opts).unwrap();
    let y = sim.trajectory.final_state();
    assert!((y[0] - 1.5).abs() < 1e-6 && (y[1] - 1.5).abs() < 1e-6);
    // In reverse time the gap obeys dd/dtau = -d (s^2 - d^2) / 2.
    for (tau, y) in sim.trajectory.times.iter().zip(&sim.trajectory.states) {
        let d = y[0] - y[1];
        let d0 = 1.0f64;
        let expected = 3.0 * d0 / (d0 * d0 + (9.0 - d0 * d0) * (9.0 * tau).exp()).sqrt();
        assert!((d - expected).abs() < 1e-9, "tau={tau}");
    }
}

/// dH/dt = (2/n) sum over edges of a_ij x_i x_j (x_i - x_j)^2.
#[test]
fn entropy_derivative_matches_finite_difference() {
    let g = random_connected_graph(12, 0.4, WeightMode::Uniform { lo: 0.5, hi: 2.0 }, 3).unwrap();
    let x: Vec<f64> = (0..12)
        .map(|i| 0.2 + 0.07 * ((i * 7) % 12) as f64)
        .collect();
    let n = x.len() as f64;
    let analytic: f64 = g
        .edges()
        .iter()
        .map(|&(i, j, w)| w * x[i] * x[j] * (x[i] - x[j]).powi(2))
        .sum::<f64>()
        * 2.0
        / n;
    assert!(analytic >= 0.0);
    let f = vector_field(&g, &x).unwrap();
    let h = 1e-6;
    let plus: Vec<f64> = x.iter().zip(&f).map(|(a, b)| a + h * b).collect();
    let minus: Vec<f64> = x.iter().zip(&f).map(|(a, b)| a - h * b).collect();
    let fd = (entropy(&plus).unwrap() - entropy(&minus).unwrap()) / (2.0 * h);
    assert!(
        (fd - analytic).abs() <= 1e-6 * analytic.max(1.0),
        "fd {fd} analytic {analytic}"
    );
}

/// Coefficients of det(lambda I - M) via the Faddeev-LeVerrier recursion.
fn characteristic_polynomial(m: &[Vec<f64>]) -> Vec<f64> {
    let n = m.len();
    let mut coeffs = vec![1.0];
    let mut mk = vec![vec![0.0; n]; n];
    for k in 1..=n {
        let prev = coeffs[k - 1];
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += m[i][l] * mk[l][j];
                }
                next[i][j] = s + if i == j { prev } else { 0.0 };
            }
        }
        mk = next;
        let mut trace = 0.0;
        for i in 0..n {
            for l in 0..n {
                trace += m[i][l] * mk[l][i];
            }
        }
        coeffs.push(-trace / k as f64);
    }
    coeffs
}

fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, c| acc * x + c)
}

/// Sign-change roots of a polynomial on `[lo, hi]`, refined by bisection.
fn bracketed_roots(p: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut roots = Vec::new();
    let steps = 20_000;
    let mut a = lo;
    let mut fa = eval_poly(p, a);
    for k in 1..=steps {
        let b = lo + (hi - lo) * k as f64 / steps as f64;
        let fb = eval_poly(p, b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut l, mut r) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (l + r);
                if eval_poly(p, l) * eval_poly(p, mid) <= 0.0 {
                    r = mid;
                } else {
                    l = mid;
                }
            }
            roots.push(0.5 * (l + r));
        }
        a = b;
        fa = fb;
    }
    roots
}

/// Eigenvalues as roots of det(lambda I - M) with multiplicity up to two:
/// simple roots change sign, double roots are sign-change roots of the
/// derivative at which the polynomial itself vanishes.
fn brute_force_spectrum(m: &[Vec<f64>], lo: f64, hi: f64) -> Vec<f64> {
    let p = characteristic_polynomial(m);
    let mut roots = bracketed_roots(&p, lo, hi);
    let deg = p.len() - 1;
    let dp: Vec<f64> = p[..deg]
        .iter()
        .enumerate()
        .map(|(k, c)| c * (deg - k) as f64)
        .collect();
    let scale = p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    for r in bracketed_roots(&dp, lo, hi) {
        if eval_poly(&p, r).abs() <= 1e-12 * scale {
            roots.push(r);
            roots.push(r);
        }
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

fn laplacian_rows(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.n();
    let flat = g.laplacian_matrix();
    (0..n).map(|i| flat[i * n..(i + 1) * n].to_vec()).collect()
}

fn linearized_eigenvalues(g: &Graph) -> Vec<f64> {
    let x = vec![1.0; g.n()];
    let report = classify_equilibrium(g, &x, Tolerances::default()).unwrap();
    assert_eq!(report.class, EquilibriumClass::Eu);
    let spec = linearize_at(g, &report, 0).unwrap();
    assert_eq!(spec.verdict, Verdict::Unstable);
    spec.eigenvalues
}

#[test]
fn triangle_spectrum_matches_brute_force() {
    let g = Graph::complete(3).unwrap();
    let ev = linearized_eigenvalues(&g);
    let oracle = brute_force_spectrum(&laplacian_rows(&g), -1.0, 5.0);
    assert_eq!(oracle.len(), 3);
    for (a, b) in ev.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10, "{ev:?} vs {oracle:?}");
    }
    for (a, b) in ev.iter().zip([0.0, 3.0, 3.0]) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn path_spectrum_matches_brute_force() {
    let g = Graph::path(3).unwrap();
    let ev = linearized_eigenvalues(&g);
    let oracle = brute_force_spectrum(&laplacian_rows(&g), -1.0, 5.0);
    assert_eq!(oracle.len(), 3);
    for (a, b) in ev.iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10, "{ev:?} vs {oracle:?}");
    }
    for (a, b) in ev.iter().zip([0.0, 1.0, 3.0]) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn path_and_cycle_closed_forms() {
    for n in 2..10 {
        let g = Graph::path(n).unwrap();
        let ev = linearized_eigenvalues(&g);
        let mut expected: Vec<f64> = (0..n)
            .map(|k| 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in ev.iter().zip(&expected) {
            assert!((a - b).abs() < 1e-10, "n={n}");
        }
        let complete = linearized_eigenvalues(&Graph::complete(n).unwrap());
        assert!(complete[0].abs() < 1e-10);
        assert!(complete[1..].iter().all(|l| (l - n as f64).abs() < 1e-10));
    }
}

#[test]
fn value_scales_spectrum_by_its_square() {
    let g = Graph::path(3).unwrap();
    let x = [2.0, 2.0, 2.0];
    let report = classify_equilibrium(&g, &x, Tolerances::default()).unwrap();
    let spec = linearize_at(&g, &report, 0).unwrap();
    for (a, b) in spec.eigenvalues.iter().zip([0.0, 4.0, 12.0]) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn perturbation_escapes_on_edge_and_triangle() {
    for g in [
        Graph::new(2, &[(0, 1, 1.0)]).unwrap(),
        Graph::complete(3).unwrap(),
    ] {
        let x = vec![1.0; g.n()];
        let r = perturb_and_escape(&g, &x, 1e-4, 11, 50.0).unwrap();
        assert!(r.escaped, "max deviation {}", r.max_deviation);
        assert!(r.max_deviation > 100.0 * 1e-4);
        let mass: f64 = r.perturbed.iter().sum();
        assert!((mass - g.n() as f64).abs() < 1e-12);
        assert_eq!(r.final_report.class, EquilibriumClass::Es);
    }
}

#[test]
fn isolated_winners_on_a_path_are_strict() {
    let g = Graph::path(3).unwrap();
    let report = classify_equilibrium(&g, &[1.0, 0.0, 1.0], Tolerances::default()).unwrap();
    assert_eq!(report.class, EquilibriumClass::Es);
    let sim = simulate(
        &g,
        &[1.0, 0.0, 1.0],
        &IntegratorOptions {
            t_end: 5.0,
            ..Default::default()
        },
    )
    .unwrap();
    assert_eq!(sim.trajectory.final_state(), &[1.0, 0.0, 1.0]);
}
