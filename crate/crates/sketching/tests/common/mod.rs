//! Shared fixtures: random elimination trees and compatible matrices.

use elim_tree::EliminationTree;
use rand::rngs::StdRng;
use rand::Rng;
use sparse_core::{build_csc, SparseMatrix};

pub struct Instance {
    pub a: SparseMatrix,
    pub tree: EliminationTree,
    /// Positive per-column diagonal scalars.
    pub hess: Vec<f64>,
}

/// Random tree on `d` vertices whose identity order is a valid elimination
/// order: every parent is a later vertex.
pub fn random_tree(rng: &mut StdRng, d: usize) -> EliminationTree {
    let mut parent = vec![usize::MAX; d];
    for v in 0..d.saturating_sub(1) {
        parent[v] = rng.gen_range(v + 1..d);
    }
    EliminationTree::from_parent_and_order(parent, (0..d).collect()).unwrap()
}

/// One diagonal column per vertex plus `extra` columns whose patterns are
/// short sub-paths of root paths, as factorization requires.
pub fn random_instance(rng: &mut StdRng, d: usize, extra: usize) -> Instance {
    let tree = random_tree(rng, d);
    let mut trips = Vec::new();
    for v in 0..d {
        trips.push((v, v, rng.gen_range(0.5..2.0) * sign(rng)));
    }
    for j in 0..extra {
        let col = d + j;
        let start = rng.gen_range(0..d);
        let path = elim_tree::path_to_root(&tree, start);
        let len = rng.gen_range(1..=path.len().min(3));
        for &row in &path[..len] {
            trips.push((row, col, rng.gen_range(0.3..1.5) * sign(rng)));
        }
    }
    let a = build_csc(d, d + extra, &trips, None).unwrap();
    let hess = (0..d + extra).map(|_| rng.gen_range(0.5..4.0)).collect();
    Instance { a, tree, hess }
}

fn sign(rng: &mut StdRng) -> f64 {
    if rng.gen_bool(0.5) {
        1.0
    } else {
        -1.0
    }
}

/// `⌈log₂ x⌉` for `x ≥ 1`.
pub fn ceil_log2(x: usize) -> usize {
    assert!(x >= 1);
    (usize::BITS - (x - 1).leading_zeros()) as usize
}
