//! Shared fixtures: a dense versioned oracle over a balanced sampling tree.

use std::sync::Arc;

use elim_tree::EliminationTree;
use linf_maintenance::VectorOracle;
use sketching::{SamplingTree, SketchMatrix};
use sparse_core::build_csc;

/// A balanced sampling tree over `n` coordinates: one diagonal column per
/// vertex of a path-shaped elimination tree, so every coordinate gets its
/// own leaf and the inner structure has logarithmic height.
pub fn diagonal_tree(n: usize) -> Arc<SamplingTree> {
    let parent: Vec<usize> = (0..n)
        .map(|v| if v + 1 < n { v + 1 } else { usize::MAX })
        .collect();
    let order: Vec<usize> = (0..n).collect();
    let elim = EliminationTree::from_parent_and_order(parent, order).unwrap();
    let entries: Vec<(usize, usize, f64)> = (0..n).map(|j| (j, j, 1.0)).collect();
    let a = build_csc(n, n, &entries, None).unwrap();
    Arc::new(SamplingTree::balanced(&elim, &a).unwrap())
}

/// Oracle answering both access types from explicitly stored versions:
/// type-I reads project the stored vector through a real sketch matrix, so
/// estimates carry genuine projection noise.
pub struct DenseOracle {
    pub tree: Arc<SamplingTree>,
    pub phi: SketchMatrix,
    pub versions: Vec<Vec<f64>>,
}

impl DenseOracle {
    pub fn new(tree: Arc<SamplingTree>, r: usize, seed: u64, initial: Vec<f64>) -> DenseOracle {
        let n = tree.nvars();
        assert_eq!(initial.len(), n, "initial vector must have one entry per leaf");
        DenseOracle {
            phi: SketchMatrix::new(r, n, seed),
            tree,
            versions: vec![initial],
        }
    }

    /// Appends the next version of the sequence.
    pub fn push(&mut self, next: Vec<f64>) {
        assert_eq!(next.len(), self.versions[0].len());
        self.versions.push(next);
    }

    pub fn latest(&self) -> &[f64] {
        self.versions.last().unwrap()
    }
}

impl VectorOracle for DenseOracle {
    fn type_i(&mut self, version: usize, v: usize) -> Vec<f64> {
        let y = &self.versions[version];
        let mut out = vec![0.0; self.phi.nrows()];
        for &i in self.tree.label(v) {
            self.phi.add_scaled(&mut out, i, y[i]);
        }
        out
    }

    fn type_ii(&mut self, version: usize, i: usize) -> f64 {
        self.versions[version][i]
    }
}
