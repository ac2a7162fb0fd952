//! Reference values computed independently of the library (hand enumeration,
//! closed forms, small Markov chains) and frozen here.

use std::collections::BTreeMap;

use ergolab::cocycle::{delta_along_path, elog_delta, estimate_delta, harmonicity_check};
use ergolab::generators::{
    augmented_gw_ensemble, canopy_finite_graph, epsilon_sequence, finite_graph_ensemble, reinforced_canopy_finite, root_depth_distribution,
    CanopyTree, Ensemble, FixedEnsemble, Rooting,
};
use ergolab::graph::{ball_signature, local_matching_radius, FiniteGraphBuilder, RootedMultigraph, VertexId};
use ergolab::numeric::phi;
use ergolab::runner::criteria::{path_graph, XI_LOWER, XI_UPPER};
use ergolab::stats::{
    conditional_entropy_expectation, direct_conditional_entropy, estimate_h_series, growth_estimate, range_estimate,
    reversibility_test, speed_estimate, stationarity_test,
};
use ergolab::walk::{
    joint_entropy, propagate_distribution, simulate_seeded, spine_resistance, step_entropy, varopoulos_carne_check,
    ExactWalk, WalkDistribution, WalkPath,
};

fn grandfather() -> RootedMultigraph {
    FixedEnsemble::grandfather().graph().clone()
}

fn level(g: &RootedMultigraph, v: VertexId) -> i64 {
    g.label(v).expect("levelled graph")
}

#[test]
fn grandfather_neighbourhood() {
    let g = grandfather();
    let rho = g.root();
    assert_eq!(g.degree(rho).unwrap(), 8);
    assert_eq!(g.ball(rho, 1).unwrap().vertices().unwrap().len(), 9);
    let mut offsets: Vec<i64> = g.neighbors(rho).unwrap().iter().map(|&(w, _)| level(&g, w) - level(&g, rho)).collect();
    offsets.sort();
    // sons -1 (2), father +1, grandsons -2 (4), grandfather +2
    assert_eq!(offsets, vec![-2, -2, -2, -2, -1, -1, 1, 2]);
    let gf = g.neighbors(rho).unwrap().into_iter().find(|&(w, _)| level(&g, w) == 2).unwrap().0;
    assert_eq!(g.distance(rho, gf).unwrap(), 1);
}

#[test]
fn grandfather_vs_tree_and_lattice() {
    let g = grandfather();
    let t = FixedEnsemble::regular_tree().graph().clone();
    let z2 = FixedEnsemble::lattice(2).unwrap().graph().clone();
    assert_ne!(ball_signature(&g, g.root(), 1, None).unwrap(), ball_signature(&t, t.root(), 1, None).unwrap());
    assert_eq!(local_matching_radius(&g, &z2, 5).unwrap(), 0);
    assert_eq!(local_matching_radius(&g, &g, 5).unwrap(), 5);
}

#[test]
fn t3_leaf_and_top_differ() {
    let g = canopy_finite_graph(3).unwrap();
    let top = g.root();
    assert_eq!(level(&g, top), 3);
    let leaf = g.vertices().unwrap().into_iter().find(|&v| level(&g, v) == 0).unwrap();
    assert_ne!(ball_signature(&g, leaf, 1, None).unwrap(), ball_signature(&g, top, 1, None).unwrap());
}

#[test]
fn t7_and_t_infinity_agree_below_the_top() {
    let t7 = CanopyTree::finite(7).unwrap().with_root_depth(2).unwrap().into_graph();
    let tinf = CanopyTree::infinite(40, 2).unwrap().into_graph();
    assert!(local_matching_radius(&t7, &tinf, 8).unwrap() >= 4);
}

#[test]
fn epsilon_recursion_and_constants() {
    let seq = epsilon_sequence(10_000).unwrap();
    assert_eq!(seq.epsilon(1), 1);
    for k in 1..=18 {
        assert_eq!(seq.xi(k), 1u128 << (k - 1), "k = {k}");
    }
    // 2^17 = 131072 > 18^4 = 104976, so ε_19 = 1.
    assert_eq!(seq.epsilon(19), 1);
    assert!((2..19).all(|k| seq.epsilon(k) == 2));
    for k in 1..=10_000u128 {
        let (xi, k4) = (seq.xi(k as i64), k.pow(4));
        assert!(XI_LOWER.1 * xi >= XI_LOWER.0 * k4 && XI_UPPER.1 * xi <= XI_UPPER.0 * k4, "k = {k}");
    }
}

#[test]
fn t3_counts_and_reinforced_edges() {
    let g = canopy_finite_graph(3).unwrap();
    let mut by_depth = BTreeMap::new();
    for v in g.vertices().unwrap() {
        *by_depth.entry(level(&g, v)).or_insert(0) += 1;
    }
    assert_eq!(by_depth.into_iter().collect::<Vec<_>>(), vec![(0, 4), (1, 4), (2, 2), (3, 1)]);

    let r = reinforced_canopy_finite(3).unwrap();
    let mut oriented = 0u64;
    for v in r.vertices().unwrap() {
        for (w, m) in r.neighbors(v).unwrap() {
            let upper = level(&r, v).max(level(&r, w)) as u32;
            assert_eq!(m, upper * upper);
            oriented += m as u64;
        }
    }
    assert_eq!(oriented, 76);
}

#[test]
fn reinforced_t3_root_depth_law() {
    let law = root_depth_distribution(3).unwrap();
    let expect = [4.0 / 76.0, 20.0 / 76.0, 34.0 / 76.0, 18.0 / 76.0];
    for (p, e) in law.probabilities().iter().zip(expect) {
        assert!((p - e).abs() < 1e-15);
    }
    let e = finite_graph_ensemble(&reinforced_canopy_finite(3).unwrap(), Rooting::DegreeBiased).unwrap();
    let mass: f64 = e
        .exact_law()
        .unwrap()
        .unwrap()
        .iter()
        .filter(|(g, _)| level(g, g.root()) == 1)
        .map(|(_, w)| w)
        .sum();
    assert!((mass - 20.0 / 76.0).abs() < 1e-15);
}

#[test]
fn reinforced_parent_step_probability() {
    let g = reinforced_canopy_finite(3).unwrap();
    let v = g.vertices().unwrap().into_iter().find(|&v| level(&g, v) == 2).unwrap();
    let dist = propagate_distribution(&g, &WalkDistribution::point(v)).unwrap();
    let parent = g.neighbors(v).unwrap().into_iter().find(|&(w, _)| level(&g, w) == 3).unwrap().0;
    assert!((dist.prob(parent) - 9.0 / 17.0).abs() < 1e-15);
}

#[test]
fn agw_mean_root_degree() {
    let e = augmented_gw_ensemble(&[0.0, 0.5, 0.5], 1000).unwrap();
    let degs: Vec<f64> = (0..10_000).map(|s| e.sample(s).unwrap()).map(|g| g.degree(g.root()).unwrap() as f64).collect();
    let (m, se) = ergolab::numeric::mean_se(&degs);
    assert!((m - 2.5).abs() < 4.0 * se, "{m} ± {se}");
}

#[test]
fn grandfather_step_law_and_return() {
    let g = grandfather();
    let dist = propagate_distribution(&g, &WalkDistribution::point(g.root())).unwrap();
    assert_eq!(dist.support_len(), 8);
    assert!(dist.atoms().iter().all(|&(_, p)| (p - 0.125).abs() < 1e-15));
    let two = propagate_distribution(&g, &dist).unwrap();
    assert!((two.prob(g.root()) - 0.125).abs() < 1e-15);

    let mut counts = BTreeMap::new();
    let steps = 100_000;
    let path = simulate_seeded(&g, g.root(), steps, 5).unwrap();
    for w in path.vertices.windows(2) {
        *counts.entry(level(&g, w[1]) - level(&g, w[0])).or_insert(0usize) += 1;
    }
    for (offset, p) in [(-1, 2.0 / 8.0), (1, 1.0 / 8.0), (-2, 4.0 / 8.0), (2, 1.0 / 8.0)] {
        let f = counts[&offset] as f64 / steps as f64;
        assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / steps as f64).sqrt(), "offset {offset}: {f}");
    }
}

#[test]
fn entropy_values() {
    let g = grandfather();
    let ln8 = 8f64.ln();
    assert!((step_entropy(&g, g.root()).unwrap() - ln8).abs() < 1e-15);
    for k in 1..=6 {
        assert!((joint_entropy(&g, g.root(), 1, k).unwrap() - k as f64 * ln8).abs() < 1e-12);
    }
    let s = estimate_h_series(&FixedEnsemble::grandfather(), 3, 1, 0).unwrap();
    assert!((s.mean[1] - ln8).abs() < 1e-15 && s.se.iter().all(|&x| x == 0.0));

    // H(X_1 | X_2) from the 2-step joint law written out by hand: X_1 is
    // uniform over 8 neighbours, X_2 uniform over their 8 neighbours each.
    let mut joint: BTreeMap<(VertexId, VertexId), f64> = BTreeMap::new();
    for (x1, _) in g.neighbors(g.root()).unwrap() {
        for (x2, _) in g.neighbors(x1).unwrap() {
            *joint.entry((x1, x2)).or_default() += 1.0 / 64.0;
        }
    }
    let mut marg2: BTreeMap<VertexId, f64> = BTreeMap::new();
    for (&(_, x2), &p) in &joint {
        *marg2.entry(x2).or_default() += p;
    }
    let h_joint: f64 = joint.values().map(|&p| phi(p)).sum();
    let h2: f64 = marg2.values().map(|&p| phi(p)).sum();
    let oracle = h_joint - h2;
    let direct = direct_conditional_entropy(&g, g.root(), 1, 2, 10_000).unwrap();
    assert!((direct - oracle).abs() < 1e-10);
    let via_series = conditional_entropy_expectation(&s, 1, 2).unwrap().value;
    assert!((via_series - oracle).abs() < 1e-10);
}

#[test]
fn multiplicity_step_entropy() {
    let mut b = FiniteGraphBuilder::new("two");
    b.add_edge(VertexId(0), VertexId(1), 1).unwrap();
    b.add_edge(VertexId(0), VertexId(2), 3).unwrap();
    let g = b.build_rooted(VertexId(0));
    let expect = -(0.25f64 * 0.25f64.ln() + 0.75 * 0.75f64.ln());
    assert!((step_entropy(&g, g.root()).unwrap() - expect).abs() < 1e-15);
}

#[test]
fn varopoulos_carne_reference_cases() {
    let g = grandfather();
    assert!(varopoulos_carne_check(&g, g.root(), 12, 8).unwrap().passed);
    let z2 = FixedEnsemble::lattice(2).unwrap().graph().clone();
    assert!(varopoulos_carne_check(&z2, z2.root(), 16, 4).unwrap().passed);
}

#[test]
fn spine_resistance_tail() {
    let tail = spine_resistance(1, 1_000_000).unwrap() - spine_resistance(1, 1_000).unwrap();
    // Σ_{k > 1000} k^-2 ≈ 1/1000 - 1/(2·1000²)
    assert!(tail < 1e-3 && (tail - (1e-3 - 5e-7)).abs() < 1e-6);
}

#[test]
fn z2_entropy_and_growth_small() {
    let z2 = FixedEnsemble::lattice(2).unwrap();
    let rate = ergolab::stats::entropy_rate(&estimate_h_series(&z2, 64, 1, 0).unwrap()).unwrap();
    assert!(rate.monotone && rate.value < 0.05, "{rate:?}");
    assert!(growth_estimate(&z2, 64, 1, 0).unwrap().slope.value < 0.05);
    let t = growth_estimate(&FixedEnsemble::regular_tree(), 20, 1, 0).unwrap();
    assert!((t.slope.value - 2f64.ln()).abs() < 0.02);
}

#[test]
fn grandfather_speed_and_range() {
    let e = FixedEnsemble::grandfather();
    let s = speed_estimate(&e, 200, 2000, 1).unwrap();
    assert!(s.value >= 7.0 / 24.0 - 3.0 * s.se);
    let r = range_estimate(&e, 400, 2000, 2).unwrap();
    assert!(r.agree, "{r:?}");
}

#[test]
fn p3_uniform_root_tv_matches_markov_chain() {
    // States (end, middle, end) with π0 = (1/3, 1/3, 1/3) and π1 = π0 P =
    // (1/6, 2/3, 1/6). Degree classes: end (deg 1) and middle (deg 2).
    let oracle = 0.5 * ((2.0f64 / 3.0 - 1.0 / 3.0).abs() + (1.0f64 / 3.0 - 2.0 / 3.0).abs());
    let e = finite_graph_ensemble(&path_graph(3), Rooting::Uniform).unwrap();
    let t = stationarity_test(&e, 1, 1, 0, 0).unwrap();
    assert!((t.tv - oracle).abs() < 1e-15 && (oracle - 1.0 / 3.0).abs() < 1e-15);
    let biased = finite_graph_ensemble(&path_graph(3), Rooting::DegreeBiased).unwrap();
    assert_eq!(stationarity_test(&biased, 1, 1, 0, 0).unwrap().tv, 0.0);
}

#[test]
fn grandfather_reversal_tv_is_one_half() {
    let t = reversibility_test(&FixedEnsemble::grandfather(), 2, 0, 0).unwrap();
    let fwd = [2.0f64, 1.0, 4.0, 1.0];
    let rev = [1.0f64, 2.0, 1.0, 4.0];
    let oracle: f64 = 0.5 * fwd.iter().zip(rev).map(|(a, b)| (a - b).abs() / 8.0).sum::<f64>();
    assert!((t.tv - oracle).abs() < 1e-12 && (oracle - 0.5).abs() < 1e-15);
}

#[test]
fn grandfather_cocycle_table() {
    let e = FixedEnsemble::grandfather();
    let g = e.graph().clone();
    let table = estimate_delta(&e, 2, 0, 0).unwrap();
    let rho = g.root();
    let mut by_offset = BTreeMap::new();
    for (w, _) in g.neighbors(rho).unwrap() {
        by_offset.insert(level(&g, w) - level(&g, rho), table.delta_edge(&g, rho, w).unwrap());
    }
    let expect = BTreeMap::from([(-2, 0.25), (-1, 0.5), (1, 2.0), (2, 4.0)]);
    assert_eq!(by_offset, expect);
    let manual = -(2.0 * 0.5f64.ln() + 2f64.ln() + 4.0 * 0.25f64.ln() + 4f64.ln()) / 8.0;
    let el = elog_delta(&table);
    assert!((el.value.value + manual).abs() < 1e-12 && (el.value.value + 0.875 * 2f64.ln()).abs() < 1e-12);
    assert!((el.ballistic_bound - 7.0 / 24.0).abs() < 1e-12);
    assert!(((2.0 * 0.5 + 2.0 + 4.0 * 0.25 + 4.0) / 8.0 - table.normalization()).abs() < 1e-15);

    let pick = |x: VertexId, off: i64| g.neighbors(x).unwrap().into_iter().find(|&(w, _)| level(&g, w) - level(&g, x) == off).unwrap().0;
    let son = pick(rho, -1);
    let grandson = pick(son, -1);
    let path = |v: Vec<VertexId>| WalkPath { vertices: v, seed: None };
    assert_eq!(delta_along_path(&table, &g, &path(vec![rho, son, grandson])).unwrap(), 0.25);
    assert_eq!(table.delta_edge(&g, rho, grandson).unwrap(), 0.25);
    assert!((delta_along_path(&table, &g, &path(vec![rho, son, grandson, rho])).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(delta_along_path(&table, &g, &path(vec![rho])).unwrap(), 1.0);
    assert_ne!(table.delta_edge(&g, rho, pick(rho, 1)).unwrap(), table.delta_edge(&g, rho, son).unwrap());
    assert!(harmonicity_check(&table, &g, &[rho, son, grandson]).unwrap() < 1e-15);
}

#[test]
fn exact_walk_mass_on_lumped_tree() {
    let g = CanopyTree::infinite(200, 30).unwrap().into_graph();
    let mut w = ExactWalk::new(&g, g.root()).unwrap();
    for _ in 0..40 {
        w.step().unwrap();
    }
    assert!((w.total_mass() + w.pruned_mass() - 1.0).abs() < 1e-12);
}

#[test]
fn canopy_growth_is_polynomial() {
    // #B(ρ, r) ≍ r^4, so the slope of log #B over the last quarter [3n/4, n]
    // is about 4 ln(4/3) / (n/4): 0.046 at n = 100, 0.012 at n = 400.
    let e = ergolab::generators::CanopyEnsemble::new(false, 2000, ergolab::generators::CanopyRoot::LimitLaw { k_max: 200 })
        .unwrap();
    let v100 = growth_estimate(&e, 100, 200, 3).unwrap().slope;
    let v400 = growth_estimate(&e, 400, 200, 3).unwrap().slope;
    println!("v(100) = {:.4} ± {:.4}, v(400) = {:.4} ± {:.4}", v100.value, v100.se, v400.value, v400.se);
    assert!(v100.value < 0.05 && (v100.value - 16.0 * (4f64 / 3.0).ln() / 100.0).abs() < 0.01);
    assert!(v400.value < v100.value / 2.0);
}
