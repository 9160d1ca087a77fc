//! Core sparse-matrix types shared by the solver stack.
//!
//! The central type is [`SparseMatrix`], an immutable compressed sparse-column
//! (CSC) matrix whose columns are grouped into contiguous *blocks*. Downstream
//! crates treat each block as a single variable group: the block's row pattern
//! (the union of the supports of its columns) determines which rows of the
//! normal-equation matrix the block touches, and the [`dual_graph`] built from
//! those patterns drives all elimination-order machinery.
//!
//! Values are `f64` throughout. Construction drops entries that are exactly
//! zero after duplicate summation; no magnitude threshold is applied.

mod graph;
mod matrix;

pub use graph::Graph;
pub use matrix::{build_csc, column_block_pattern, MatrixError, SparseMatrix};

/// Dot product of two equal-length slices.
///
/// Panics if the lengths differ; callers pair vectors whose dimensions are
/// fixed by the same matrix, so a mismatch is a programming error.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dot: length mismatch");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm of a slice.
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Maximum absolute entry of a slice (zero for an empty slice).
pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// Builds the dual graph of a matrix: one vertex per *row*, with an edge
/// between two rows whenever some column block's pattern contains both.
///
/// Every block pattern therefore induces a clique. Blocks with patterns of
/// size zero or one contribute no edges, and parallel edges collapse.
pub fn dual_graph(a: &SparseMatrix) -> Graph {
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); a.nrows()];
    for block in 0..a.nblocks() {
        let pat = a.block_pattern(block);
        for (k, &u) in pat.iter().enumerate() {
            for &v in &pat[k + 1..] {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    Graph::from_adjacency(adj)
}
