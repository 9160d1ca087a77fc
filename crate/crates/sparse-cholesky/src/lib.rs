//! Sparse Cholesky factorization of `A H⁻¹ Aᵀ` along an elimination tree,
//! with versioned rank-one updates and path-restricted solves.
//!
//! When the constraint matrix has small treewidth and its rows are ordered
//! by a suitable elimination tree, the Cholesky factor of the normal matrix
//! fills in only along tree root paths. This crate stores each column dense
//! on its root path, so the fill bound is structural rather than numerical,
//! and supports:
//!
//! - factorization from a block-diagonal Hessian ([`factorize`]),
//! - signed rank-one updates whose touched column set is certified to lie
//!   on one root path ([`CholeskyFactor::rank_one_update`]),
//! - Hessian block replacement as a short sequence of rank-one updates
//!   ([`CholeskyFactor::update_hessian_block`]),
//! - sparse forward solves, path-restricted backward solves, and
//!   single-coordinate backward solves that each touch only the relevant
//!   root paths,
//! - a per-column change log so any of those operations can also be
//!   evaluated against the factor as it was at an earlier version.

mod factor;
mod hessian;

pub use factor::{factorize, CholeskyFactor, SparseVec};
pub use hessian::{DiagonalBlockHessian, HessianBlock};

/// Errors from factorization, updates, and solves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CholError {
    /// A pivot was not finite and positive during factorization.
    NotPositiveDefinite { column: usize },
    /// A rank-one downdate would destroy positive definiteness.
    DowndateFailed { column: usize },
    /// A vector support or index set was required to lie on one root path
    /// of the elimination tree but does not.
    PatternNotOnPath { index: usize },
    /// A historical query asked for a version newer than the factor.
    VersionInFuture { requested: u64, current: u64 },
    /// Mismatched dimensions between matrix, Hessian, or tree.
    DimensionMismatch { reason: &'static str },
    /// The elimination tree's vertex order must be the identity; permute
    /// the matrix rows first.
    OrderNotIdentity,
    /// A Hessian block was not symmetric positive definite.
    HessianNotPositiveDefinite { block: usize },
}

impl std::fmt::Display for CholError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CholError::NotPositiveDefinite { column } => {
                write!(f, "matrix not positive definite at column {column}")
            }
            CholError::DowndateFailed { column } => {
                write!(f, "rank-one downdate lost positive definiteness at column {column}")
            }
            CholError::PatternNotOnPath { index } => {
                write!(f, "support (near index {index}) does not lie on one root path")
            }
            CholError::VersionInFuture { requested, current } => {
                write!(f, "version {requested} requested but factor is at {current}")
            }
            CholError::DimensionMismatch { reason } => write!(f, "dimension mismatch: {reason}"),
            CholError::OrderNotIdentity => {
                write!(f, "elimination order must be the identity; permute rows first")
            }
            CholError::HessianNotPositiveDefinite { block } => {
                write!(f, "Hessian block {block} is not symmetric positive definite")
            }
        }
    }
}

impl std::error::Error for CholError {}
