//! Randomized sketches of the implicitly-represented iterate.
//!
//! The solver's detection machinery needs, for many subsets `χ(v) ⊆ [n]`,
//! the projected partial sums `Φ_{χ(v)} y` of vectors `y` it can never
//! afford to materialize. The subsets come from a *sampling tree*: a
//! constant-degree rooted tree whose nodes are labelled with coordinate
//! sets, the root owning all of `[n]`, children partitioning their parent,
//! and leaves owning single coordinates ([`SamplingTree`]).
//!
//! Three maintenance structures live on top of it:
//!
//! * [`VectorSketch`] keeps `Φ_{χ(v)} g` at every node for an explicitly
//!   stored vector `g`, updated along one leaf-to-root path per changed
//!   coordinate.
//! * [`BalancedSketch`] keeps `Φ_{χ(v)} H^{-1/2} Aᵀ L⁻ᵀ h` — the sketch of
//!   a triangular-solve image that changes *densely* when a single Hessian
//!   entry moves. Per-node factor timestamps plus boundary-set tables from
//!   the heavy-light order confine every repair to one root path, with the
//!   backlog replayed lazily at query time from the factor's column
//!   history.
//! * [`SimpleSketch`] is the recompute-everything reference for the same
//!   quantity, kept as a cross-checking oracle.
//!
//! [`SketchMatrix`] supplies the projection itself: a seed-keyed Gaussian
//! matrix whose every entry is reproducible without storage.

mod balanced;
mod matrix;
mod simple;
mod tree;
mod vector;

pub use balanced::BalancedSketch;
pub use matrix::SketchMatrix;
pub use simple::SimpleSketch;
pub use tree::{SamplingTree, TreeKind};
pub use vector::VectorSketch;

use sparse_cholesky::CholError;

/// Errors from sketch construction and maintenance.
#[derive(Debug, Clone, PartialEq)]
pub enum SketchError {
    /// Input sizes disagree, or a column pattern is unusable.
    Dimension { reason: &'static str },
    /// A factor modification or historical solve failed.
    Factor(CholError),
}

impl From<CholError> for SketchError {
    fn from(e: CholError) -> Self {
        SketchError::Factor(e)
    }
}

impl std::fmt::Display for SketchError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SketchError::Dimension { reason } => write!(f, "dimension mismatch: {reason}"),
            SketchError::Factor(e) => write!(f, "factor update failed: {e}"),
        }
    }
}

impl std::error::Error for SketchError {}

/// `out += c · x`, the workhorse of every per-node repair.
pub(crate) fn axpy(out: &mut [f64], c: f64, x: &[f64]) {
    debug_assert_eq!(out.len(), x.len());
    for (o, &v) in out.iter_mut().zip(x) {
        *o += c * v;
    }
}

/// A conservative projection dimension for `n` coordinates, `k` queries, a
/// sampling tree of height `height`, and an update horizon of `horizon`
/// steps: the larger of `⌈16·ln³(horizon+3)⌉` and
/// `⌈4·height²·ln(16·n·k)⌉`.
///
/// Both branches grow only logarithmically in the workload, but the
/// constants make this generous; callers with measured accuracy needs
/// usually pass a much smaller dimension directly.
pub fn default_sketch_dim(n: usize, k: usize, height: usize, horizon: usize) -> usize {
    let a = 16.0 * ((horizon as f64) + 3.0).ln().powi(3);
    let b = 4.0 * (height as f64).powi(2) * (16.0 * n as f64 * k as f64).ln();
    (a.max(b).ceil() as usize).max(1)
}
