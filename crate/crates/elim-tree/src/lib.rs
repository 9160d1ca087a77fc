//! Elimination orders and trees from tree decompositions.
//!
//! Given a graph and a valid tree decomposition, this crate builds an
//! elimination order by recursive balanced separators and materializes a
//! bounded-height elimination tree whose root paths cover the true fill-in
//! ancestor structure of the order. On top of the tree it provides the
//! traversal machinery used by the factorization and sampling layers:
//! root-path and ancestor queries, deepest-vertex (`low`) lookups, a
//! heavy-light ordering with contiguous subtree runs, and the boundary sets
//! of a balanced binary tree built over that ordering.
//!
//! Decompositions can be parsed from the PACE-2017 `.td` text format.

mod btree;
mod td;
mod tree;

pub use btree::{lambda_sets, BalancedBinaryTree, LambdaSets};
pub use td::{balanced_separator_from_td, validate_td, SeparatorPart, TdError, TreeDecomposition};
pub use tree::{
    heavy_light_order, is_ancestor, low, make_elim_order_and_tree, path_to_root, EliminationTree,
    TreeError,
};
