//! Exact per-node sketches of an explicitly stored vector.

use crate::{SamplingTree, SketchError, SketchMatrix};
use std::sync::Arc;

/// Maintains `Φ_{χ(v)} g` at every node of a sampling tree for a dense
/// vector `g` that the caller mutates one coordinate at a time.
///
/// A coordinate write touches exactly the nodes on the leaf-to-root path of
/// that coordinate's leaf, each by one scaled column addition, so an update
/// costs `O(height · r)` and a query is a slice read.
#[derive(Debug, Clone)]
pub struct VectorSketch {
    tree: Arc<SamplingTree>,
    phi: SketchMatrix,
    g: Vec<f64>,
    /// Per-node projected partial sums, each of length `r`.
    y: Vec<Vec<f64>>,
}

impl VectorSketch {
    /// Builds the sketch of `g0` by accumulating each nonzero coordinate
    /// along its leaf-to-root path.
    pub fn new(
        tree: Arc<SamplingTree>,
        phi: &SketchMatrix,
        g0: &[f64],
    ) -> Result<VectorSketch, SketchError> {
        if g0.len() != tree.nvars() {
            return Err(SketchError::Dimension {
                reason: "vector length differs from the tree's coordinate count",
            });
        }
        if phi.ncols() < tree.nvars() {
            return Err(SketchError::Dimension {
                reason: "projection has fewer columns than coordinates",
            });
        }
        let r = phi.nrows();
        let mut y = vec![vec![0.0; r]; tree.nnodes()];
        for (i, &gi) in g0.iter().enumerate() {
            if gi != 0.0 {
                for v in tree.path_to_root(tree.leaf_for(i)) {
                    phi.add_scaled(&mut y[v], i, gi);
                }
            }
        }
        Ok(VectorSketch {
            tree,
            phi: phi.clone(),
            g: g0.to_vec(),
            y,
        })
    }

    /// Writes `g[i] = value`, repairing the sketches on the leaf's root
    /// path. Returns `false` when the value is unchanged and nothing was
    /// touched.
    pub fn set(&mut self, i: usize, value: f64) -> bool {
        let delta = value - self.g[i];
        if delta == 0.0 {
            return false;
        }
        self.g[i] = value;
        for v in self.tree.path_to_root(self.tree.leaf_for(i)) {
            self.phi.add_scaled(&mut self.y[v], i, delta);
        }
        true
    }

    /// The sketch `Φ_{χ(v)} g` at node `v`.
    pub fn value(&self, v: usize) -> &[f64] {
        &self.y[v]
    }

    /// The maintained vector.
    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// One coordinate of the maintained vector.
    pub fn coordinate(&self, i: usize) -> f64 {
        self.g[i]
    }

    /// Projection dimension `r`.
    pub fn sketch_dim(&self) -> usize {
        self.phi.nrows()
    }

    /// The underlying sampling tree.
    pub fn tree(&self) -> &SamplingTree {
        &self.tree
    }

    /// Recomputes one node's sketch from scratch; diagnostic use.
    pub fn recompute(&self, v: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.phi.nrows()];
        for &i in self.tree.label(v) {
            self.phi.add_scaled(&mut out, i, self.g[i]);
        }
        out
    }
}

/// Maximum absolute difference between two equal-length slices.
#[cfg(test)]
pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
