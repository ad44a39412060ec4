use proptest::prelude::*;
use wta_core::analysis::{classify_equilibrium, entropy, EquilibriumClass, Tolerances};
use wta_core::dynamics::{
    generalized_vector_field, laplacian, reverse_vector_field, vector_field, InteractionSpec,
};
use wta_core::graph::{Graph, NodeSet};
use wta_core::integrate::{simulate, IntegratorOptions};
use wta_core::linalg::{symmetric_eigenvalues, SquareMatrix};

/// Graph on 1..=max_n nodes with weights in [0.1, 3].
fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        prop::collection::vec((any::<bool>(), 0.1f64..3.0), pairs).prop_map(move |flags| {
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if flags[k].0 {
                        edges.push((i, j, flags[k].1));
                    }
                    k += 1;
                }
            }
            Graph::new(n, &edges).unwrap()
        })
    })
}

fn graph_and_state(max_n: usize, hi: f64) -> impl Strategy<Value = (Graph, Vec<f64>)> {
    graph(max_n).prop_flat_map(move |g| {
        let n = g.n();
        (Just(g), prop::collection::vec(0.0f64..hi, n))
    })
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

proptest! {
    #[test]
    fn field_sums_to_zero((g, x) in graph_and_state(12, 5.0)) {
        let f = vector_field(&g, &x).unwrap();
        let scale: f64 = g.edges().iter().map(|&(i, j, w)| w * (x[i] - x[j]).abs() * x[i] * x[j]).sum();
        prop_assert!(f.iter().sum::<f64>().abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn zero_components_stay_put((g, mut x) in graph_and_state(12, 5.0), mask in prop::collection::vec(any::<bool>(), 12)) {
        for (i, v) in x.iter_mut().enumerate() {
            if mask[i] {
                *v = 0.0;
            }
        }
        let f = vector_field(&g, &x).unwrap();
        for i in 0..x.len() {
            if x[i] == 0.0 {
                prop_assert_eq!(f[i], 0.0);
            }
        }
    }

    #[test]
    fn reverse_is_exact_negation((g, x) in graph_and_state(12, 5.0)) {
        let f = vector_field(&g, &x).unwrap();
        let r = reverse_vector_field(&g, &x).unwrap();
        for (a, b) in f.iter().zip(&r) {
            prop_assert_eq!(*b, -*a);
        }
    }

    #[test]
    fn state_laplacian_identity((g, y) in graph_and_state(12, 5.0)) {
        let l = laplacian(&g, &y).unwrap();
        for s in l.row_sums() {
            prop_assert!(s.abs() <= 1e-12);
        }
        let ly = l.apply_negated(&y);
        let r = reverse_vector_field(&g, &y).unwrap();
        let tol = 1e-12 * g.n() as f64 * inf_norm(&y).max(1.0).powi(3);
        for (a, b) in ly.iter().zip(&r) {
            prop_assert!((a - b).abs() <= tol, "{a} vs {b}");
        }
        for i in 0..g.n() {
            for j in 0..g.n() {
                prop_assert_eq!(l.matrix().get(i, j), l.matrix().get(j, i));
            }
        }
    }

    #[test]
    fn default_interaction_is_bit_identical((g, x) in graph_and_state(12, 5.0)) {
        let spec = InteractionSpec::default();
        let a = vector_field(&g, &x).unwrap();
        let b = generalized_vector_field(&g, &x, &spec).unwrap();
        for (u, v) in a.iter().zip(&b) {
            prop_assert_eq!(u.to_bits(), v.to_bits());
        }
    }

    #[test]
    fn entropy_scales_quadratically_and_ignores_shifts(x in prop::collection::vec(0.0f64..10.0, 1..30), k in 0.1f64..10.0, c in 0.0f64..10.0) {
        let h = entropy(&x).unwrap();
        prop_assert!(h >= 0.0);
        let scaled: Vec<f64> = x.iter().map(|v| k * v).collect();
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        let tol = 1e-10 * (1.0 + h * k * k);
        prop_assert!((entropy(&scaled).unwrap() - k * k * h).abs() <= tol);
        prop_assert!((entropy(&shifted).unwrap() - h).abs() <= 1e-10 * (1.0 + h + c * c));
    }

    #[test]
    fn constructed_equilibria_classify_back(g in graph(10), winner_mask in prop::collection::vec(any::<bool>(), 10), levels in prop::collection::vec(1e-7f64..5.0, 10)) {
        let n = g.n();
        let winners = NodeSet::new((0..n).filter(|&i| winner_mask[i]));
        let (sub, map) = g.induced_subgraph(&winners).unwrap();
        let mut x = vec![0.0; n];
        let comps = sub.connected_components();
        for (k, comp) in comps.iter().enumerate() {
            for local in comp.iter() {
                x[map[local]] = levels[k];
            }
        }
        let report = classify_equilibrium(&g, &x, Tolerances::default()).unwrap();
        prop_assert_eq!(&report.winners, &winners);
        let losers = NodeSet::new((0..n).filter(|&i| !winner_mask[i]));
        prop_assert_eq!(&report.losers, &losers);
        let expected = if comps.iter().any(|c| c.len() >= 2) {
            EquilibriumClass::Eu
        } else {
            EquilibriumClass::Es
        };
        prop_assert_eq!(report.class, expected);
        if expected == EquilibriumClass::Es {
            prop_assert!(g.is_independent_set(&report.winners).unwrap());
        }
    }

    #[test]
    fn eigenvalues_preserve_trace_and_norm(rows in (1usize..9).prop_flat_map(|n| prop::collection::vec(-5.0f64..5.0, n * n).prop_map(move |v| (n, v)))) {
        let (n, v) = rows;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = 0.5 * (v[i * n + j] + v[j * n + i]);
            }
        }
        let m = SquareMatrix::from_row_major(n, data).unwrap();
        let ev = symmetric_eigenvalues(&m).unwrap();
        prop_assert!(ev.windows(2).all(|w| w[0] <= w[1]));
        let fro = m.frobenius_norm();
        prop_assert!((ev.iter().sum::<f64>() - m.trace()).abs() <= 1e-10 * (1.0 + fro));
        let sq: f64 = ev.iter().map(|l| l * l).sum();
        prop_assert!((sq - fro * fro).abs() <= 1e-10 * (1.0 + fro * fro));
    }

    #[test]
    fn induced_subgraphs_compose(g in graph(12), a_mask in prop::collection::vec(any::<bool>(), 12), b_mask in prop::collection::vec(any::<bool>(), 12)) {
        let n = g.n();
        let a = NodeSet::new((0..n).filter(|&i| a_mask[i]));
        let b = NodeSet::new((0..n).filter(|&i| a_mask[i] && b_mask[i]));
        let (ga, map_a) = g.induced_subgraph(&a).unwrap();
        let local_b = NodeSet::new((0..ga.n()).filter(|&k| b.contains(map_a[k])));
        let (gab, map_ab) = ga.induced_subgraph(&local_b).unwrap();
        let (gb, map_b) = g.induced_subgraph(&b).unwrap();
        prop_assert_eq!(gab.n(), gb.n());
        let composed: Vec<usize> = map_ab.iter().map(|&k| map_a[k]).collect();
        prop_assert_eq!(&composed, &map_b);
        prop_assert_eq!(gab.edges(), gb.edges());
        for (i, j, w) in gb.edges() {
            prop_assert_eq!(w, g.weight(map_b[i], map_b[j]));
        }
    }

    #[test]
    fn components_partition_nodes(g in graph(14)) {
        let comps = g.connected_components();
        let mut seen = vec![0u32; g.n()];
        for c in &comps {
            prop_assert!(!c.is_empty());
            for i in c.iter() {
                seen[i] += 1;
            }
            let (sub, _) = g.induced_subgraph(c).unwrap();
            prop_assert!(sub.is_connected());
        }
        prop_assert!(seen.iter().all(|&k| k == 1));
        for (i, j, _) in g.edges() {
            prop_assert!(comps.iter().any(|c| c.contains(i) && c.contains(j)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simulation_conserves_mass_and_positivity((g, x) in graph_and_state(10, 2.0)) {
        let opts = IntegratorOptions { t_end: 0.5, ..Default::default() };
        let sim = simulate(&g, &x, &opts).unwrap();
        let m0: f64 = x.iter().sum();
        for (state, mass) in sim.trajectory.states.iter().zip(&sim.trajectory.diagnostics.mass) {
            prop_assert!(state.iter().all(|&v| v >= 0.0));
            prop_assert!((mass - m0).abs() <= 1e-9 * m0.max(1.0));
        }
        let d = &sim.trajectory.diagnostics;
        for k in 1..d.max.len() {
            prop_assert!(d.max[k] >= d.max[k - 1] - 1e-9);
            prop_assert!(d.min[k] <= d.min[k - 1] + 1e-9);
            prop_assert!(d.entropy[k] >= d.entropy[k - 1] - 1e-9);
        }
    }
}
