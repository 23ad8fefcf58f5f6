mod common;

use std::collections::VecDeque;

use common::oracle_resistance;
use rand::SeedableRng;
use rrn_core::complete::{compute_rn, coupled_pair, explore_layers, m_n, EdgeLaw};
use rrn_core::dist::EdgeDistribution;
use rrn_core::experiments::sample_rn_law;
use rrn_core::ext::ExtResistance;
use rrn_core::seed::{purpose, trial_rng, TrialRng};

fn law(n: usize, gamma: f64, dist: &str, seed: u64) -> EdgeLaw {
    EdgeLaw::new(
        n,
        gamma,
        dist.parse().unwrap(),
        trial_rng(seed, purpose::NETWORK, 0),
    )
    .unwrap()
}

/// Conducting distances from `root` by plain BFS over a materialised network.
fn bfs_distances(
    edges: &[(usize, usize, f64)],
    vertices: usize,
    root: usize,
) -> Vec<Option<usize>> {
    let mut adjacency = vec![Vec::new(); vertices];
    for &(u, v, r) in edges {
        if r.is_finite() {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
    }
    let mut dist = vec![None; vertices];
    dist[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &w in &adjacency[u] {
            if dist[w].is_none() {
                dist[w] = Some(dist[u].unwrap() + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

fn triples(law: &mut EdgeLaw) -> Vec<(usize, usize, f64)> {
    law.materialize()
        .edges()
        .iter()
        .map(|e| (e.u, e.v, e.r.value()))
        .collect()
}

#[test]
fn exploration_layers_match_full_bfs() {
    for seed in 0..40 {
        let n = 10 + (seed as usize % 41);
        let mut law = law(n, 3.0, "uniform:0.5,1.5", seed);
        let k = 3;
        let layers = explore_layers(&mut law, 0, k);
        let edges = triples(&mut law);
        let dist = bfs_distances(&edges, n + 2, 0);
        for (d, layer) in layers.layers.iter().enumerate() {
            let expected: Vec<usize> = (0..n + 2).filter(|&v| dist[v] == Some(d)).collect();
            assert_eq!(layer, &expected, "seed {seed}, layer {d}");
        }
        // the first-discovery tree spans the layers
        let (tree, vertices) = layers.as_tree();
        assert_eq!(tree.len(), layers.vertices().count());
        assert_eq!(vertices.len(), tree.len());
    }
}

#[test]
fn rn_matches_dense_oracle() {
    for seed in 0..60 {
        let n = 5 + (seed as usize % 26);
        let dist = if seed % 3 == 0 {
            "discrete:0:0.3,1:0.7"
        } else {
            "exp:1"
        };
        let mut law = law(n, 2.5, dist, seed);
        let net = law.materialize();
        let edges: Vec<_> = net
            .edges()
            .iter()
            .map(|e| (e.u, e.v, e.r.value()))
            .collect();
        let got = compute_rn(&net).unwrap();
        let oracle = oracle_resistance(n + 2, &edges, &[0], &[n + 1]);
        assert_eq!(got.is_infinite(), oracle.is_infinite(), "seed {seed}");
        if oracle.is_finite() {
            assert!(
                (got.value() - oracle).abs() <= 1e-9 * oracle.max(1.0),
                "seed {seed}"
            );
        }
    }
}

#[test]
fn extreme_densities() {
    let mut empty = law(20, 0.0, "point:1", 1);
    assert!(compute_rn(&empty.materialize()).unwrap().is_infinite());
    let mut full = law(20, 20.0, "point:1", 1);
    let r = compute_rn(&full.materialize()).unwrap().value();
    assert!((r - 2.0 / 22.0).abs() < 1e-12);
}

#[test]
fn coupled_pairs_are_disjoint_and_consistent() {
    let n = 2000;
    let m = m_n(n, 2.0).unwrap();
    for seed in 0..30 {
        let mut l = law(n, 2.0, "point:1", seed);
        let mut a = TrialRng::seed_from_u64(seed);
        let mut b = TrialRng::seed_from_u64(seed + 1000);
        let (first, second) = coupled_pair(&mut l, 1.5, m, &mut a, &mut b).unwrap();
        let left = first.exploration_vertex_set();
        assert!(second
            .exploration_vertices
            .iter()
            .all(|v| !left.contains(v)));
        assert_eq!(first.branching_tree.len(), first.branching_labels.len());
        assert!(first.exploration_tree.len() >= 1);
        assert!(second
            .branching_labels
            .iter()
            .all(|l| !first.branching_labels.contains(l)));
    }
}

#[test]
fn exploration_only_touches_the_explored_region() {
    let n = 1_000_000;
    let mut l = law(n, 2.0, "point:1", 3);
    let layers = explore_layers(&mut l, 0, 3);
    let scanned: usize = layers.layers[..3].iter().map(Vec::len).sum();
    // each scanned vertex decides at most its n + 1 pairs; nothing else is touched
    assert!(l.sampled_pairs() <= scanned as u64 * (n as u64 + 1));
}

#[test]
fn raising_every_edge_never_lowers_rn() {
    for seed in 0..40 {
        let mut l = law(60, 3.0, "exp:1", seed);
        let net = l.materialize();
        let base = compute_rn(&net).unwrap();
        for eps in [1e-3, 0.1, 1.0] {
            let mut raised = net.clone();
            for (i, e) in net.edges().iter().enumerate() {
                raised = raised.with_edge_resistance(i, ExtResistance::finite(e.r.value() + eps));
            }
            let r = compute_rn(&raised).unwrap();
            assert!(r.is_infinite() || r.value() >= base.value() - 1e-12, "seed {seed}");
            assert_eq!(r.is_infinite(), base.is_infinite());
        }
    }
}

#[test]
fn atoms_and_finite_parts_partition_the_trials() {
    let dist: EdgeDistribution = "point:1".parse().unwrap();
    let sample = sample_rn_law(40, 1.0, &dist, 300, 5, 0).unwrap();
    assert_eq!(sample.values.len(), 300);
    let law = &sample.law;
    assert_eq!(law.finite_samples().len() + law.infinity_count(), 300);
    let infinite = sample.values.iter().filter(|v| v.is_infinite()).count();
    assert_eq!(law.infinity_count(), infinite);
}
