mod common;

use common::{complete_graph, oracle_resistance, random_network};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rrn_core::ext::ExtResistance;
use rrn_core::network::ResistorNetwork;
use rrn_core::quotient::quotient;
use rrn_core::solve::{effective_resistance, solve_potentials};
use rrn_core::walk::{hitting_probability, monte_carlo_walk, transition_matrix};

fn net(n: usize, edges: &[(usize, usize, f64)], a0: &[usize], a1: &[usize]) -> ResistorNetwork {
    ResistorNetwork::from_triples(n, edges, a0, a1).unwrap()
}

fn r(n: usize, edges: &[(usize, usize, f64)], a0: &[usize], a1: &[usize]) -> f64 {
    effective_resistance(&net(n, edges, a0, a1)).value()
}

#[test]
fn closed_forms() {
    assert!((r(4, &[(0, 1, 1.0), (1, 2, 2.5), (2, 3, 0.5)], &[0], &[3]) - 4.0).abs() < 1e-10);
    assert!((r(2, &[(0, 1, 2.0), (0, 1, 3.0), (0, 1, 6.0)], &[0], &[1]) - 1.0).abs() < 1e-10);
    // unbalanced Wheatstone bridge: 0-1 1, 0-2 2, 1-3 3, 2-3 4, bridge 1-2 5
    let bridge = [
        (0, 1, 1.0),
        (0, 2, 2.0),
        (1, 3, 3.0),
        (2, 3, 4.0),
        (1, 2, 5.0),
    ];
    let (r1, r2, r3, r4, r5): (f64, f64, f64, f64, f64) = (1.0, 2.0, 3.0, 4.0, 5.0);
    let numerator = r1 * r2 * (r3 + r4) + r3 * r4 * (r1 + r2) + r5 * (r1 + r3) * (r2 + r4);
    let denominator = r5 * (r1 + r2 + r3 + r4) + (r1 + r2) * (r3 + r4);
    // the closed form above is the bridge with the two arms (r1, r3) and (r2, r4)
    let arms = [(0, 1, r1), (1, 3, r3), (0, 2, r2), (2, 3, r4), (1, 2, r5)];
    assert!((r(4, &arms, &[0], &[3]) - numerator / denominator).abs() < 1e-10);
    assert!((r(4, &bridge, &[0], &[3]) - oracle_resistance(4, &bridge, &[0], &[3])).abs() < 1e-10);
}

#[test]
fn complete_graphs_match_the_laplacian_oracle() {
    for m in 4..=10 {
        let edges = complete_graph(m);
        let got = r(m, &edges, &[0], &[1]);
        let oracle = oracle_resistance(m, &edges, &[0], &[1]);
        assert!((oracle - 2.0 / m as f64).abs() < 1e-10, "oracle at m = {m}");
        assert!((got - oracle).abs() < 1e-10, "m = {m}: {got} vs {oracle}");
    }
}

#[test]
fn extended_values() {
    let zero_path = r(3, &[(0, 1, 0.0), (1, 2, 0.0)], &[0], &[2]);
    assert_eq!(zero_path, 0.0);
    let cut = effective_resistance(&net(3, &[(0, 1, 1.0), (1, 2, f64::INFINITY)], &[0], &[2]));
    assert!(cut.is_infinite());
    let shorted_terminals =
        effective_resistance(&net(3, &[(0, 1, 1.0), (1, 2, 0.0)], &[0, 1], &[2]));
    assert!(shorted_terminals.is_zero());
    // a floating component does not change anything
    let floating = r(5, &[(0, 1, 2.0), (2, 3, 1.0), (3, 4, 0.0)], &[0], &[1]);
    assert!((floating - 2.0).abs() < 1e-12);
}

#[test]
fn fixture_file() {
    let text = include_str!("../../../fixtures/k4_unit.net");
    let parsed = ResistorNetwork::parse(text).unwrap();
    assert!((effective_resistance(&parsed).value() - 0.5).abs() < 1e-12);
}

#[test]
fn random_networks_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..300 {
        let edges = random_network(&mut rng, 7, 12);
        let got = r(7, &edges, &[0, 1], &[5, 6]);
        let oracle = oracle_resistance(7, &edges, &[0, 1], &[5, 6]);
        if oracle.is_infinite() {
            assert!(got.is_infinite(), "{edges:?}");
        } else {
            assert!(
                (got - oracle).abs() <= 1e-9 * oracle.max(1.0),
                "{got} vs {oracle}"
            );
        }
    }
}

#[test]
fn duality_on_random_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    while checked < 50 {
        let edges = random_network(&mut rng, 8, 16);
        let q = quotient(&net(8, &edges, &[0], &[7]));
        let Ok(sol) = solve_potentials(&q) else {
            continue;
        };
        if !sol.connected {
            continue;
        }
        let (a0, a1) = (q.a0().unwrap(), q.a1().unwrap());
        for c in 0..q.num_classes() {
            if let Some(v) = sol.at(c) {
                let h = hitting_probability(&q, c, &[a1], &[a0]).unwrap();
                assert!((v - h).abs() <= 1e-10, "class {c}: {v} vs {h}");
            }
        }
        checked += 1;
    }
}

#[test]
fn monte_carlo_walk_agrees_with_exact_hitting() {
    let edges = [
        (0, 1, 1.0),
        (1, 2, 2.0),
        (1, 3, 1.0),
        (2, 4, 1.0),
        (3, 4, 3.0),
        (2, 3, 0.5),
    ];
    let q = quotient(&net(5, &edges, &[0], &[4]));
    let (a0, a1) = (q.a0().unwrap(), q.a1().unwrap());
    let start = q.class_of(2);
    let exact = hitting_probability(&q, start, &[a1], &[a0]).unwrap();
    let est = monte_carlo_walk(&q, start, &[a1], &[a0], 20_000, 10_000, 3).unwrap();
    assert_eq!(est.cap_hits, 0);
    let p = est.estimate.unwrap();
    assert!((p - exact).abs() < 4.0 * est.std_error, "{p} vs {exact}");
}

fn arb_network() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (3usize..8).prop_flat_map(|n| {
        let resistance = prop_oneof![
            1 => Just(0.0),
            1 => Just(f64::INFINITY),
            6 => 0.1f64..5.0,
        ];
        let edge = (0..n, 1..n, resistance).prop_map(move |(u, k, r)| (u, (u + k) % n, r));
        (Just(n), prop::collection::vec(edge, 1..14))
    })
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn raising_a_resistance_never_lowers_the_total(
        (n, edges) in arb_network(), pick in any::<prop::sample::Index>(), extra in 0.0f64..10.0
    ) {
        let base = net(n, &edges, &[0], &[n - 1]);
        let i = pick.index(edges.len());
        let raised = base.with_edge_resistance(i, ExtResistance::finite(edges[i].2 + extra));
        let (before, after) = (effective_resistance(&base), effective_resistance(&raised));
        prop_assert!(after.value() >= before.value() * (1.0 - 1e-9) - 1e-12);
    }

    #[test]
    fn shortcut_and_removal_bracket_the_total((n, edges) in arb_network(), pick in any::<prop::sample::Index>()) {
        let base = net(n, &edges, &[0], &[n - 1]);
        let i = pick.index(edges.len());
        let mid = effective_resistance(&base).value();
        let shorted = effective_resistance(&base.with_edge_resistance(i, ExtResistance::ZERO)).value();
        let removed = effective_resistance(&base.without_edge(i)).value();
        prop_assert!(shorted <= mid * (1.0 + 1e-9) + 1e-12);
        prop_assert!(removed >= mid * (1.0 - 1e-9) - 1e-12);
    }

    #[test]
    fn contracting_zero_edges_by_hand_changes_nothing((n, edges) in arb_network()) {
        // merge the endpoints of every zero edge into one vertex and drop the edge
        let mut rep: Vec<usize> = (0..n).collect();
        fn find(rep: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while rep[x] != x { x = rep[x]; }
            x
        }
        for &(u, v, r) in &edges {
            if r == 0.0 {
                let (a, b) = (find(&mut rep, u), find(&mut rep, v));
                rep[a] = b;
            }
        }
        let contracted: Vec<_> = edges
            .iter()
            .filter(|e| e.2 != 0.0)
            .map(|&(u, v, r)| (find(&mut rep, u), find(&mut rep, v), r))
            .filter(|e| e.0 != e.1)
            .collect();
        let (s, t) = (find(&mut rep, 0), find(&mut rep, n - 1));
        let original = effective_resistance(&net(n, &edges, &[0], &[n - 1]));
        if s == t {
            prop_assert!(original.is_zero());
            return Ok(());
        }
        let by_hand = effective_resistance(&net(n, &contracted, &[s], &[t]));
        prop_assert_eq!(original.is_infinite(), by_hand.is_infinite());
        if original.is_finite() {
            prop_assert!((original.value() - by_hand.value()).abs() <= 1e-9 * original.value().max(1.0));
        }
    }

    #[test]
    fn agrees_with_the_oracle((n, edges) in arb_network()) {
        let got = r(n, &edges, &[0], &[n - 1]);
        let oracle = oracle_resistance(n, &edges, &[0], &[n - 1]);
        prop_assert_eq!(got.is_infinite(), oracle.is_infinite());
        if oracle.is_finite() {
            prop_assert!((got - oracle).abs() <= 1e-9 * oracle.max(1.0));
        }
    }

    #[test]
    fn transition_rows_are_stochastic((n, edges) in arb_network()) {
        let q = quotient(&net(n, &edges, &[0], &[n - 1]));
        let p = transition_matrix(&q);
        for c in 0..q.num_classes() {
            if let Ok(row) = p.row(c) {
                let total: f64 = row.iter().map(|e| e.1).sum();
                prop_assert!((total - 1.0).abs() < 1e-12);
                prop_assert!(row.iter().all(|e| e.1 > 0.0));
            }
        }
    }

    #[test]
    fn potentials_are_hitting_probabilities((n, edges) in arb_network()) {
        let q = quotient(&net(n, &edges, &[0], &[n - 1]));
        if let (Ok(sol), Some(a0), Some(a1)) = (solve_potentials(&q), q.a0(), q.a1()) {
            for c in 0..q.num_classes() {
                if let Some(v) = sol.at(c) {
                    let h = hitting_probability(&q, c, &[a1], &[a0]).unwrap();
                    prop_assert!((v - h).abs() <= 1e-10);
                }
            }
        }
    }
}
