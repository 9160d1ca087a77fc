//! Distributional checks for the change sampler and its estimates.

mod common;

use common::{diagonal_tree, DenseOracle};
use linf_maintenance::{LinfParams, LinfState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn tracker(n: usize, seed: u64) -> LinfState {
    let tree = diagonal_tree(n);
    let params = LinfParams::new(0.05, 0.05, 0.01, 8).with_seed(seed);
    LinfState::new(Arc::clone(&tree), params, &vec![0.0; n]).unwrap()
}

#[test]
fn single_spike_difference_always_returns_its_coordinate() {
    let n = 16;
    let tree = diagonal_tree(n);
    let mut state = tracker(n, 11);
    let mut spike = vec![0.0; n];
    spike[5] = 2.5;
    let mut oracle = DenseOracle::new(tree, 64, 7, vec![0.0; n]);
    oracle.push(spike);
    for _ in 0..200 {
        let draw = state.sample(&mut oracle, 0, 1).unwrap();
        assert_eq!(draw.index, Some(5));
        assert!(draw.rounds >= 1);
    }
}

#[test]
fn two_coordinate_difference_follows_the_squared_law() {
    let n = 8;
    let tree = diagonal_tree(n);
    let mut state = tracker(n, 23);
    let mut diff = vec![0.0; n];
    diff[0] = 3.0;
    diff[1] = 4.0;
    let mut oracle = DenseOracle::new(tree, 64, 41, vec![0.0; n]);
    oracle.push(diff);

    let draws = 100_000;
    let mut counts = [0usize; 2];
    for _ in 0..draws {
        let draw = state.sample(&mut oracle, 0, 1).unwrap();
        let i = draw.index.expect("nonzero difference");
        assert!(i < 2, "sampled a coordinate with zero change");
        counts[i] += 1;
    }
    let freq0 = counts[0] as f64 / draws as f64;
    let freq1 = counts[1] as f64 / draws as f64;
    // Squared-change law: 3²/(3²+4²) and 4²/(3²+4²).
    assert!((freq0 - 9.0 / 25.0).abs() <= 0.03, "freq of the 3-entry: {freq0}");
    assert!((freq1 - 16.0 / 25.0).abs() <= 0.03, "freq of the 4-entry: {freq1}");
    let expected = [draws as f64 * 9.0 / 25.0, draws as f64 * 16.0 / 25.0];
    let chi2: f64 = (0..2)
        .map(|i| {
            let d = counts[i] as f64 - expected[i];
            d * d / expected[i]
        })
        .sum();
    assert!(chi2 < 10.0, "chi-square statistic {chi2} too large for one degree of freedom");
}

#[test]
fn sampler_distribution_matches_the_squared_law_in_total_variation() {
    let n = 64;
    let tree = diagonal_tree(n);
    let mut state = tracker(n, 99);
    let mut rng = ChaCha8Rng::seed_from_u64(5150);
    let diff: Vec<f64> = (0..n)
        .map(|_| {
            let mag = rng.gen_range(0.2..2.0);
            if rng.gen::<bool>() {
                mag
            } else {
                -mag
            }
        })
        .collect();
    let mass: f64 = diff.iter().map(|d| d * d).sum();
    let mut oracle = DenseOracle::new(tree, 96, 77, vec![0.0; n]);
    oracle.push(diff.clone());

    let draws = 100_000;
    let mut counts = vec![0usize; n];
    for _ in 0..draws {
        let i = state.sample(&mut oracle, 0, 1).unwrap().index.unwrap();
        counts[i] += 1;
    }
    let tv: f64 = (0..n)
        .map(|i| {
            let p = diff[i] * diff[i] / mass;
            let q = counts[i] as f64 / draws as f64;
            (p - q).abs()
        })
        .sum::<f64>()
        / 2.0;
    assert!(tv <= 0.05, "total-variation distance {tv} exceeds 0.05");
}

#[test]
fn acceptance_rejection_terminates_in_expected_constant_rounds() {
    let n = 32;
    let tree = diagonal_tree(n);
    let mut state = tracker(n, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(8181);
    let diff: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let mut oracle = DenseOracle::new(tree, 96, 13, vec![0.0; n]);
    oracle.push(diff);

    let draws = 2_000;
    let mut total_rounds = 0usize;
    for _ in 0..draws {
        total_rounds += state.sample(&mut oracle, 0, 1).unwrap().rounds;
    }
    let mean = total_rounds as f64 / draws as f64;
    assert!(mean <= 50.0, "mean accept/reject rounds {mean} exceed 50");
}

#[test]
fn zero_difference_signals_nothing_to_sample() {
    let n = 16;
    let tree = diagonal_tree(n);
    let mut state = tracker(n, 17);
    let y0: Vec<f64> = (0..n).map(|i| i as f64 / 3.0).collect();
    let mut oracle = DenseOracle::new(Arc::clone(&tree), 64, 29, y0.clone());
    oracle.push(y0.clone());

    let draw = state.sample(&mut oracle, 0, 1).unwrap();
    assert_eq!(draw.index, None);
    assert_eq!(draw.rounds, 0);
    assert_eq!(state.estimate(&mut oracle, 1, 1, tree.root()), 0.0);

    // A frozen step with a small positive budget skips its windows outright.
    let params = LinfParams::new(0.05, 0.05, 0.0005, 8).with_seed(17);
    let mut state = LinfState::new(Arc::clone(&tree), params, &y0).unwrap();
    let report = state.query(&mut oracle).unwrap();
    for w in &report.windows {
        assert!(w.budget > 0 && w.budget < n, "budget {} should force sampling", w.budget);
        assert!(w.skipped, "window over a frozen step was not skipped");
        assert_eq!(w.draws, 0);
        assert!(w.corrected.is_empty());
    }
}

#[test]
fn leaf_estimates_concentrate_around_true_coordinate_change() {
    let n = 16;
    let tree = diagonal_tree(n);
    let eta = tree.height();
    let r = 128 * eta * eta;
    let tol = 1.0 / (2.0 * eta as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(616);
    let diff: Vec<f64> = (0..n)
        .map(|_| {
            let mag = rng.gen_range(0.5..2.0);
            if rng.gen::<bool>() {
                mag
            } else {
                -mag
            }
        })
        .collect();
    let state = tracker(n, 21);

    let trials = 300;
    let mut failures = 0;
    for t in 0..trials {
        let mut oracle = DenseOracle::new(Arc::clone(&tree), r, 1000 + t, vec![0.0; n]);
        oracle.push(diff.clone());
        let i = (t as usize) % n;
        let est = state.estimate(&mut oracle, 0, 1, tree.leaf_for(i));
        let truth = diff[i] * diff[i];
        if ((est - truth) / truth).abs() > tol {
            failures += 1;
        }
    }
    assert!(
        failures * 100 <= trials,
        "{failures}/{trials} leaf estimates missed the {tol:.3} relative tolerance"
    );
}

#[test]
fn estimates_add_across_siblings_within_projection_tolerance() {
    let n = 16;
    let tree = diagonal_tree(n);
    let eta = tree.height();
    let r = 128 * eta * eta;
    let tol = 1.0 / (2.0 * eta as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let diff: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..1.0)).collect();
    let state = tracker(n, 77);

    let trials = 300;
    let mut failures = 0;
    for t in 0..trials {
        let mut oracle = DenseOracle::new(Arc::clone(&tree), r, 5000 + t, vec![0.0; n]);
        oracle.push(diff.clone());
        let root = tree.root();
        let whole = state.estimate(&mut oracle, 0, 1, root);
        let parts: f64 = tree
            .children(root)
            .iter()
            .map(|&c| state.estimate(&mut oracle, 0, 1, c))
            .sum();
        if ((whole - parts) / whole).abs() > tol {
            failures += 1;
        }
    }
    assert!(
        failures * 100 <= trials,
        "{failures}/{trials} sibling sums missed the {tol:.3} relative tolerance"
    );
}

#[test]
fn oracle_projections_are_consistent_at_leaves() {
    let n = 24;
    let tree = diagonal_tree(n);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let mut oracle = DenseOracle::new(Arc::clone(&tree), 48, 33, y.clone());

    for i in 0..n {
        let leaf = tree.leaf_for(i);
        let got = linf_maintenance::VectorOracle::type_i(&mut oracle, 0, leaf);
        let coord = linf_maintenance::VectorOracle::type_ii(&mut oracle, 0, i);
        let col = oracle.phi.column(i).to_vec();
        for (g, c) in got.iter().zip(&col) {
            assert!((g - c * coord).abs() <= 1e-12, "leaf projection differs from column times coordinate");
        }
    }
    let at_root = linf_maintenance::VectorOracle::type_i(&mut oracle, 0, tree.root());
    let dense = oracle.phi.apply(&y);
    for (g, d) in at_root.iter().zip(&dense) {
        assert!((g - d).abs() <= 1e-10, "root projection differs from the full product");
    }
}
