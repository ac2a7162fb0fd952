//! Property tests for the module invariants.

use proptest::prelude::*;

use ergolab::cocycle::{cycle_product_check, estimate_delta};
use ergolab::generators::{epsilon_sequence, finite_graph_ensemble, long_range_percolation, LrpParams, Rooting};
use ergolab::graph::{ball_signature, FiniteGraphBuilder, RootedMultigraph, VertexId};
use ergolab::hash::stable_hash;
use ergolab::runner::criteria::random_multigraph;
use ergolab::runner::{derive_seed, ExperimentConfig};
use ergolab::stats::{mtp_test, reversibility_test, stationarity_test, PairContext};
use ergolab::walk::{joint_entropy, path_sum_entropy, simulate_seeded, ExactWalk};

fn graph() -> impl Strategy<Value = RootedMultigraph> {
    (3u64..12, 0usize..8, any::<u64>()).prop_map(|(n, extra, seed)| random_multigraph(n, extra, seed))
}

fn relabelled(g: &RootedMultigraph, shift: u64) -> RootedMultigraph {
    let f = |v: VertexId| VertexId(v.0.wrapping_mul(0x9E37_79B9).wrapping_add(shift));
    let mut b = FiniteGraphBuilder::new("relabelled");
    for v in g.vertices().unwrap() {
        for (w, m) in g.neighbors(v).unwrap() {
            if v < w {
                b.add_edge(f(v), f(w), m).unwrap();
            }
        }
    }
    b.build_rooted(f(g.root()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adjacency_is_symmetric_and_degrees_add_up(g in graph()) {
        for v in g.vertices().unwrap() {
            let mut total = 0u64;
            for (w, m) in g.neighbors(v).unwrap() {
                prop_assert!(m >= 1 && w != v);
                prop_assert_eq!(g.multiplicity(w, v).unwrap(), m);
                total += m as u64;
            }
            prop_assert_eq!(total, g.degree(v).unwrap());
            prop_assert!(total >= 1);
        }
    }

    #[test]
    fn edge_list_round_trip(g in graph()) {
        let mut buf = Vec::new();
        g.write_edge_list(&mut buf).unwrap();
        let h = RootedMultigraph::read_edge_list(&buf[..]).unwrap();
        let mut again = Vec::new();
        h.write_edge_list(&mut again).unwrap();
        prop_assert_eq!(buf, again);
    }

    #[test]
    fn walk_mass_and_support(g in graph(), n in 1u32..10) {
        let mut w = ExactWalk::plain(&g, g.root());
        for _ in 0..n {
            w.step().unwrap();
        }
        prop_assert!((w.total_mass() - 1.0).abs() < 1e-12);
        let (ball, _) = g.bfs(g.root(), n).unwrap();
        prop_assert!(w.atoms().iter().all(|a| a.mass >= 0.0 && ball.contains(&a.vertex)));
        let vol = g.ball_volume(g.root(), n).unwrap() as f64;
        prop_assert!(w.entropy() <= vol.ln() + 1e-12);
    }

    #[test]
    fn sampled_paths_follow_edges(g in graph(), seed in any::<u64>()) {
        let p = simulate_seeded(&g, g.root(), 30, seed).unwrap();
        prop_assert_eq!(p.start(), g.root());
        for w in p.vertices.windows(2) {
            prop_assert!(g.multiplicity(w[0], w[1]).unwrap() >= 1);
        }
        prop_assert_eq!(p, simulate_seeded(&g, g.root(), 30, seed).unwrap());
    }

    #[test]
    fn chain_rule_matches_path_sum(g in graph(), a in 0u32..3, extra in 0u32..3) {
        let b = a + extra;
        let chain = joint_entropy(&g, g.root(), a, b).unwrap();
        let paths = path_sum_entropy(&g, g.root(), a, b, 100_000).unwrap();
        prop_assert!((chain - paths).abs() < 1e-10, "{} vs {}", chain, paths);
    }

    #[test]
    fn signatures_are_relabelling_invariant(g in graph(), shift in any::<u64>(), r in 1u32..4) {
        let h = relabelled(&g, shift);
        prop_assert_eq!(
            ball_signature(&g, g.root(), r, None).unwrap(),
            ball_signature(&h, h.root(), r, None).unwrap()
        );
    }

    #[test]
    fn signature_determines_smaller_radii(g in graph(), r in 2u32..4) {
        let vs = g.vertices().unwrap();
        for &u in &vs {
            for &v in &vs {
                if ball_signature(&g, u, r, None).unwrap() == ball_signature(&g, v, r, None).unwrap() {
                    prop_assert_eq!(
                        ball_signature(&g, u, r - 1, None).unwrap(),
                        ball_signature(&g, v, r - 1, None).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn degree_biased_finite_graphs_are_reversible(g in graph()) {
        let e = finite_graph_ensemble(&g, Rooting::DegreeBiased).unwrap();
        prop_assert!(stationarity_test(&e, 2, 2, 0, 0).unwrap().tv < 1e-12);
        prop_assert!(reversibility_test(&e, 2, 0, 0).unwrap().tv < 1e-12);
        let table = estimate_delta(&e, 2, 0, 0).unwrap();
        prop_assert!(table.classes.values().all(|c| (c.delta - 1.0).abs() < 1e-12));
        prop_assert!(cycle_product_check(&table, &g, 20, 8, 1).unwrap().max_abs_log < 1e-10);
    }

    #[test]
    fn uniform_rooting_satisfies_mass_transport(g in graph(), salt in any::<u64>()) {
        let e = finite_graph_ensemble(&g, Rooting::Uniform).unwrap();
        let f = move |c: &PairContext| (stable_hash(&(salt, &c.signature.code)) % 97) as f64;
        let rep = mtp_test(&e, 2, f, 0, 0).unwrap();
        prop_assert!(rep.passed);
        prop_assert!((rep.sent.value - rep.received.value).abs() < 1e-9);
    }

    #[test]
    fn derived_seeds_are_deterministic_and_master_sensitive(m in any::<u64>(), i in any::<u64>(), j in any::<u64>()) {
        prop_assert_eq!(derive_seed(m, i), derive_seed(m, i));
        prop_assert_ne!(derive_seed(m, i), derive_seed(m.wrapping_add(1), i));
        if i != j {
            prop_assert_ne!(derive_seed(m, i), derive_seed(m, j));
        }
    }

    #[test]
    fn lrp_configurations_are_symmetric(beta in 0.0f64..2.0, s in 1.1f64..1.9, l in 1i64..60, seed in any::<u64>()) {
        let p = LrpParams::new(1, beta, s, l);
        let g = long_range_percolation(&p, seed).unwrap();
        let n = (2 * l + 1) as u64;
        for u in 0..n {
            for v in 0..n {
                prop_assert_eq!(g.has_edge(u, v), g.has_edge(v, u));
            }
            prop_assert!(!g.has_edge(u, u));
        }
        if beta >= 1.0 {
            prop_assert!((0..n - 1).all(|u| g.has_edge(u, u + 1)));
        }
    }

    #[test]
    fn config_round_trips_through_toml(seed in any::<u64>(), n in 1usize..1000, samples in 1usize..10_000) {
        let mut cfg = ExperimentConfig::new("grandfather", "speed");
        cfg.seed = seed;
        cfg.n = Some(n);
        cfg.samples = Some(samples);
        prop_assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml()).unwrap(), cfg);
    }
}

#[test]
fn epsilon_recursion_rule() {
    let seq = epsilon_sequence(5000).unwrap();
    for k in 1..5000usize {
        let want = if seq.xi(k as i64) > (k as u128).pow(4) { 1 } else { 2 };
        assert_eq!(seq.epsilon(k + 1), want, "k = {k}");
        assert_eq!(seq.xi(k as i64 + 1), seq.xi(k as i64) * seq.epsilon(k + 1) as u128);
    }
}
