//! Coordinate-wise tracking of a drifting vector sequence.
//!
//! A solver iterate `y` changes a little on every step — densely, but with
//! bounded movement `‖y(ℓ) − y(ℓ−1)‖₂ ≤ ζ`. Reading all of `y` each step to
//! keep an entry-wise approximation would cost `n` per step; this crate
//! maintains `z` with `‖z − y(ℓ)‖∞ ≤ ε` while reading only coordinates that
//! have plausibly moved.
//!
//! The producer of the sequence exposes it through a [`VectorOracle`]:
//! type-I reads return the random projection `Φ_{χ(v)} y(ℓ')` of a version's
//! restriction to a sampling-tree node's coordinate set, and type-II reads
//! return a single exact coordinate. On step `ℓ`, [`LinfState::query`] looks
//! back over every power-of-two window `(ℓ−2ʲ, ℓ]` that ends exactly at `ℓ`
//! and importance-samples coordinates in proportion to their squared change
//! across the window, descending the sampling tree by comparing projected
//! change-mass between siblings ([`LinfState::sample`]). Sampled coordinates
//! whose stored value has strayed beyond `ε` are refreshed from a type-II
//! read. Long windows get large sample budgets, but fire rarely — so a
//! coordinate that creeps slowly is still caught by the wide window that
//! eventually covers its whole drift.

mod dyadic;
mod state;

pub use dyadic::dyadic_cover;
pub use state::{windows_at, LinfParams, LinfState, QueryReport, SampleOutcome, WindowReport};

/// Versioned read access to the tracked vector sequence.
///
/// Implementations serve every version from `0` (the initial vector) through
/// the latest step, and must be consistent: all reads at one version describe
/// a single underlying vector, so a type-I read at a leaf node equals that
/// leaf's projection column times the type-II value of its coordinate.
///
/// Methods take `&mut self` because implementations typically repair lazy
/// internal state while answering; the *values* returned for a given version
/// must nevertheless never change between calls.
pub trait VectorOracle {
    /// The projection `Φ_{χ(v)} y(version)` of version `version` restricted
    /// to the coordinate set of sampling-tree node `v`.
    fn type_i(&mut self, version: usize, v: usize) -> Vec<f64>;

    /// The exact coordinate `y(version)ᵢ`.
    fn type_ii(&mut self, version: usize, i: usize) -> f64;
}

/// Errors from window bookkeeping and sampling.
#[derive(Debug, Clone, PartialEq)]
pub enum LinfError {
    /// A requested interval is empty or falls outside `[1, k]`.
    BadRange { a: usize, b: usize, k: usize },
    /// More steps were queried than the structure was sized for.
    HorizonExceeded { step: usize, horizon: usize },
    /// Input sizes disagree or a parameter is out of range.
    Dimension { reason: &'static str },
    /// The accept/reject loop ran far past its expected round count,
    /// which indicates an inconsistent oracle.
    SamplingStalled { rounds: usize },
}

impl std::fmt::Display for LinfError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LinfError::BadRange { a, b, k } => {
                write!(f, "interval [{a}, {b}] is not a valid sub-range of [1, {k}]")
            }
            LinfError::HorizonExceeded { step, horizon } => {
                write!(f, "step {step} exceeds the supported horizon of {horizon} queries")
            }
            LinfError::Dimension { reason } => write!(f, "bad input: {reason}"),
            LinfError::SamplingStalled { rounds } => {
                write!(f, "sampler made no progress after {rounds} rounds")
            }
        }
    }
}

impl std::error::Error for LinfError {}
