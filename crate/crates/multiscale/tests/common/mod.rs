//! Shared generators for the implicit-state tests: random elimination
//! trees, random scalar-block matrices whose column patterns lie on root
//! paths, and interior anchor perturbations.

use elim_tree::EliminationTree;
use rand::Rng;
use robust_ipm::BarrierBlock;
use sparse_core::{build_csc, SparseMatrix};

/// Random elimination tree on `d` vertices with identity order.
pub fn random_tree<R: Rng>(rng: &mut R, d: usize) -> EliminationTree {
    let mut parent = vec![usize::MAX; d];
    for v in 0..d.saturating_sub(1) {
        parent[v] = rng.gen_range(v + 1..d);
    }
    EliminationTree::from_parent_and_order(parent, (0..d).collect()).unwrap()
}

pub struct Instance {
    pub a: SparseMatrix,
    pub barriers: Vec<BarrierBlock>,
    pub tree: EliminationTree,
}

/// `d` diagonal columns (keeping the normal matrix nonsingular) plus
/// `extra` coupling columns supported on random root-path subsets, each with
/// its own interval barrier.
pub fn random_instance<R: Rng>(rng: &mut R, d: usize, extra: usize) -> Instance {
    let tree = random_tree(rng, d);
    let mut triplets = Vec::new();
    let mut col = 0usize;
    for r in 0..d {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        triplets.push((r, col, sign * rng.gen_range(0.6..1.8)));
        col += 1;
    }
    for _ in 0..extra {
        let v = rng.gen_range(0..d);
        let path = elim_tree::path_to_root(&tree, v);
        let mut pattern: Vec<usize> =
            path.iter().copied().filter(|_| rng.gen_bool(0.6)).take(4).collect();
        if pattern.is_empty() {
            pattern.push(v);
        }
        pattern.sort_unstable();
        for &r in &pattern {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            triplets.push((r, col, sign * rng.gen_range(0.3..1.2)));
        }
        col += 1;
    }
    let a = build_csc(d, col, &triplets, None).unwrap();
    let barriers: Vec<BarrierBlock> = (0..col)
        .map(|_| {
            let lo = -rng.gen_range(0.5..1.5);
            let hi = rng.gen_range(0.5..1.5);
            BarrierBlock::interval(lo, hi)
        })
        .collect();
    Instance { a, barriers, tree }
}

/// A strictly interior point of every barrier interval.
pub fn interior_point<R: Rng>(rng: &mut R, barriers: &[BarrierBlock]) -> Vec<f64> {
    barriers
        .iter()
        .map(|b| {
            let (lo, hi) = interval_of(b);
            lo + rng.gen_range(0.25..0.75) * (hi - lo)
        })
        .collect()
}

/// Perturbs up to `max_blocks` coordinates of `(x̄, s̄)`, keeping x̄ strictly
/// interior; returns the new anchors.
pub fn perturb_anchor<R: Rng>(
    rng: &mut R,
    barriers: &[BarrierBlock],
    x_bar: &[f64],
    s_bar: &[f64],
    max_blocks: usize,
) -> (Vec<f64>, Vec<f64>) {
    let n = barriers.len();
    let mut x = x_bar.to_vec();
    let mut s = s_bar.to_vec();
    let count = rng.gen_range(1..=max_blocks.min(n));
    for _ in 0..count {
        let i = rng.gen_range(0..n);
        let (lo, hi) = interval_of(&barriers[i]);
        let width = hi - lo;
        if rng.gen_bool(0.8) {
            let moved = x[i] + rng.gen_range(-0.05..0.05) * width;
            x[i] = moved.clamp(lo + 0.05 * width, hi - 0.05 * width);
        }
        if rng.gen_bool(0.8) {
            s[i] += rng.gen_range(-0.1..0.1);
        }
    }
    (x, s)
}

fn interval_of(b: &BarrierBlock) -> (f64, f64) {
    match b {
        BarrierBlock::Interval { lower, upper, .. } => (*lower, *upper),
        BarrierBlock::PositiveRay { .. } => (0.0, 2.0),
    }
}
