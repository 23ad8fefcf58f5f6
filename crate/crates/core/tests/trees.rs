mod common;

use common::{build_tree, extinction_by_bisection, oracle_tree_resistance, random_tree};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rrn_core::dist::{EdgeDistribution, OffspringLaw};
use rrn_core::ext::ExtResistance;
use rrn_core::gw::{
    apply_truncation, filter_tree, limit_resistance_estimate, sample_tree, LimitPolicy,
};
use rrn_core::solve::effective_resistance;
use rrn_core::walk::lemma3_bound_check;

fn atom_at_zero(rng: &mut ChaCha8Rng) -> f64 {
    if rng.random_bool(0.25) {
        0.0
    } else {
        rng.random_range(0.2..3.0)
    }
}

#[test]
fn extinction_matches_bisection() {
    for gamma in [1.2, 2.0, 4.0] {
        let q = OffspringLaw::poisson(gamma)
            .unwrap()
            .extinction_probability();
        assert!(
            (q - extinction_by_bisection(gamma)).abs() < 1e-10,
            "gamma {gamma}"
        );
        assert!((q - (-gamma * (1.0 - q)).exp()).abs() <= 1e-12);
    }
    let q2 = OffspringLaw::poisson(2.0).unwrap().extinction_probability();
    assert!((q2 - 0.203188).abs() < 1e-6);
    assert_eq!(
        OffspringLaw::poisson(0.8).unwrap().extinction_probability(),
        1.0
    );
}

#[test]
fn recursion_matches_solver_and_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..200 {
        let depth = rng.random_range(1..=6);
        let (counts, rs) = random_tree(&mut rng, depth, atom_at_zero);
        let tree = build_tree(&counts, &rs);
        for d in 1..=depth {
            let recursion = tree.truncated_resistance(d).unwrap();
            let solved = effective_resistance(&tree.to_network(d).unwrap());
            let oracle = oracle_tree_resistance(&counts, &rs, d);
            assert_eq!(recursion.is_infinite(), oracle.is_infinite());
            assert_eq!(solved.is_infinite(), oracle.is_infinite());
            if oracle.is_finite() {
                assert!((recursion.value() - oracle).abs() <= 1e-9);
                assert!((solved.value() - oracle).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn escape_bound_holds_on_random_truncations() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    while checked < 100 {
        let depth = rng.random_range(2..=5);
        let (counts, rs) = random_tree(&mut rng, depth, |r| r.random_range(0.2..3.0));
        let tree = build_tree(&counts, &rs);
        let horizon = tree.depth().max(1);
        if tree.len() < 2 {
            continue;
        }
        let x = rng.random_range(1..tree.len());
        if tree.generation_of(x) > horizon {
            continue;
        }
        let bound = lemma3_bound_check(&tree, x, horizon).unwrap();
        assert!(bound.holds(1e-12), "{bound:?}");
        checked += 1;
    }
}

#[test]
fn raised_resistances_decrease_towards_the_original() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let law = OffspringLaw::poisson(2.0).unwrap();
    let f = EdgeDistribution::uniform(0.5, 1.5).unwrap();
    let mut seen = 0;
    while seen < 30 {
        let tree = sample_tree(&law, &f, 6, 50_000, &mut rng);
        if tree.is_extinct() {
            continue;
        }
        let base = tree.truncated_resistance(6).unwrap().value();
        let mut previous = f64::INFINITY;
        for eps in [0.5, 0.1, 0.01, 1e-3] {
            let raised = apply_truncation(&tree, eps, f64::INFINITY)
                .truncated_resistance(6)
                .unwrap()
                .value();
            assert!(raised <= previous + 1e-12);
            assert!(raised >= base - 1e-12);
            previous = raised;
        }
        assert!(previous - base <= 0.05);
        seen += 1;
    }
}

#[test]
fn truncation_thresholds() {
    let tree = build_tree(&[1, 0], &[0.0, 1.0]);
    assert_eq!(apply_truncation(&tree, 0.0, f64::INFINITY), tree);
    let cut = apply_truncation(&tree, 0.5, 1.2);
    assert!(cut.resistance(1).is_infinite());
}

#[test]
fn filtered_offspring_mean() {
    let law = OffspringLaw::poisson(2.0).unwrap();
    let f = EdgeDistribution::uniform(0.0, 2.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let counts: Vec<f64> = (0..4000)
        .map(|_| {
            let tree = filter_tree(&sample_tree(&law, &f, 1, 1000, &mut rng), 1.0);
            tree.generation_size(1).unwrap() as f64
        })
        .collect();
    let mean = counts.iter().sum::<f64>() / counts.len() as f64;
    let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (counts.len() - 1) as f64;
    let se = (var / counts.len() as f64).sqrt();
    assert!((mean - 1.0).abs() <= 3.0 * se, "mean {mean} se {se}");
}

#[test]
fn extinct_trees_have_infinite_resistance() {
    let law = OffspringLaw::poisson(0.5).unwrap();
    let f = EdgeDistribution::point(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let est = limit_resistance_estimate(&law, &f, &LimitPolicy::default(), &mut rng);
        assert!(est.converged);
        assert_eq!(est.value, ExtResistance::INFINITY);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn truncated_resistance_is_monotone_in_depth(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (counts, rs) = random_tree(&mut rng, 5, atom_at_zero);
        let tree = build_tree(&counts, &rs);
        let mut previous = 0.0;
        for d in 1..=6 {
            let r = tree.truncated_resistance(d).unwrap().value();
            prop_assert!(r >= previous - 1e-12);
            previous = r;
        }
    }
}
