//! From-scratch evaluation oracle for per-node sketches.

use crate::{SamplingTree, SketchError, SketchMatrix};
use sparse_cholesky::CholeskyFactor;
use sparse_core::SparseMatrix;
use std::sync::Arc;

/// Computes node sketches by brute force, with no maintained state.
///
/// Every call walks the node's full label set, so costs grow linearly with
/// `|χ(v)|` and (for the triangular-solve image) with a dense backward
/// solve. That is the point: the answers depend on nothing but the current
/// inputs, which makes this the cross-checking oracle for the incremental
/// [`crate::BalancedSketch`] and [`crate::VectorSketch`] at test scale.
#[derive(Debug, Clone)]
pub struct SimpleSketch {
    tree: Arc<SamplingTree>,
    phi: SketchMatrix,
    a: SparseMatrix,
}

impl SimpleSketch {
    pub fn new(
        tree: Arc<SamplingTree>,
        phi: &SketchMatrix,
        a: &SparseMatrix,
    ) -> Result<SimpleSketch, SketchError> {
        if a.ncols() != tree.nvars() || a.nrows() != tree.nverts() {
            return Err(SketchError::Dimension {
                reason: "matrix shape differs from the tree's",
            });
        }
        if phi.ncols() < a.ncols() {
            return Err(SketchError::Dimension {
                reason: "projection has fewer columns than coordinates",
            });
        }
        Ok(SimpleSketch {
            tree,
            phi: phi.clone(),
            a: a.clone(),
        })
    }

    /// `Φ_{χ(v)} g` for a dense vector `g`.
    pub fn plain(&self, g: &[f64], v: usize) -> Vec<f64> {
        assert_eq!(g.len(), self.tree.nvars());
        let mut out = vec![0.0; self.phi.nrows()];
        for &j in self.tree.label(v) {
            self.phi.add_scaled(&mut out, j, g[j]);
        }
        out
    }

    /// `Φ_{χ(v)} H^{-1/2} Aᵀ L⁻ᵀ h` at the factor's current state, where
    /// `H` is the diagonal with per-coordinate scalars `hess`.
    pub fn projected(
        &self,
        factor: &CholeskyFactor,
        hess: &[f64],
        h: &[f64],
        v: usize,
    ) -> Vec<f64> {
        assert_eq!(hess.len(), self.tree.nvars());
        assert_eq!(h.len(), self.tree.nverts());
        let w = factor.solve_upper_dense(h);
        let mut out = vec![0.0; self.phi.nrows()];
        for &j in self.tree.label(v) {
            let dot: f64 = self
                .a
                .col_rows(j)
                .iter()
                .zip(self.a.col_values(j))
                .map(|(&u, &aj)| aj * w[u])
                .sum();
            self.phi.add_scaled(&mut out, j, dot / hess[j].sqrt());
        }
        out
    }

    /// The underlying sampling tree.
    pub fn tree(&self) -> &SamplingTree {
        &self.tree
    }
}
