//! Implicit maintenance of an interior-point iterate.
//!
//! A centering step moves the primal-dual pair by a correction computed at a
//! *frozen anchor* `(x̄, s̄, t̄)`. As long as the anchor does not change, every
//! step applies the same displacement, so the pair can be stored as
//!
//! ```text
//! x = x̂ + H^{-1/2} β_x c_x − H^{-1} Aᵀ L⁻ᵀ (β_x·coeffs + ε_x)
//! s = ŝ +            Aᵀ L⁻ᵀ (β_s·coeffs + ε_s)
//! ```
//!
//! where `H` is the diagonal barrier Hessian at `x̄` and `L` the sparse
//! Cholesky factor of `A H⁻¹ Aᵀ`. Applying a step then only bumps the two
//! scalars `β_x, β_s` ([`MultiscaleState::apply_step`]), and refreshing a few
//! anchor coordinates touches a number of stored entries proportional to
//! `|changed blocks| · tree height` ([`MultiscaleState::update`]) instead of
//! re-materializing two dense vectors per iteration.
//!
//! [`ReferenceSimulator`] is a dense re-computing implementation of the same
//! operations, kept as the cross-checking oracle for tests and debugging.

mod simulator;
mod state;

pub use simulator::ReferenceSimulator;
pub use state::{MultiscaleState, UpdateReport};

use sparse_cholesky::CholError;

/// Errors raised by the implicit-state operations.
#[derive(Debug, Clone, PartialEq)]
pub enum MsError {
    /// Input sizes disagree or the matrix is not in scalar-block form.
    Dimension { reason: &'static str },
    /// An anchor coordinate left its barrier domain.
    NotInterior { block: usize },
    /// A factor modification failed; the state is poisoned afterwards.
    Factor(CholError),
    /// The state was used after a failed update left it inconsistent.
    Poisoned,
}

impl From<CholError> for MsError {
    fn from(e: CholError) -> Self {
        MsError::Factor(e)
    }
}

impl std::fmt::Display for MsError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MsError::Dimension { reason } => write!(f, "dimension mismatch: {reason}"),
            MsError::NotInterior { block } => {
                write!(f, "anchor coordinate {block} is outside its barrier domain")
            }
            MsError::Factor(e) => write!(f, "factor update failed: {e}"),
            MsError::Poisoned => write!(f, "state invalid after a failed update"),
        }
    }
}

impl std::error::Error for MsError {}
