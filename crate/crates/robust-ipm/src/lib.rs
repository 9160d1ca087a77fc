//! Robust interior-point path following for box-constrained linear
//! programs `min c⊤x` over `Ax = b`, `ℓ < x < u`.
//!
//! The method tracks the weighted central path through a per-block error
//! vector `μᵢ = sᵢ/t + wᵢφᵢ'(xᵢ)` and the soft-max potential
//! `Φ = Σᵢ cosh(λγᵢ/wᵢ)` of its local norms. Because steps are driven by
//! `μ` measured at *approximations* `(x̄, s̄, t̄)` of the iterate, the heavy
//! per-step state can be delegated to an incremental engine; this crate
//! ships the exact reference engine, the engine trait, the adaptive
//! centering loop, the tripled-program initialization that starts exactly
//! on the central path, and the end-to-end [`solve`].
//!
//! All linear algebra runs through the elimination-tree Cholesky
//! factorization, so a solve's cost is governed by the tree height rather
//! than the constraint count.

mod barrier;
mod center;
mod engine;
mod initial;
mod params;
mod potential;
mod solve;

pub use barrier::{total_complexity, total_weight, BarrierBlock};
pub use center::{centering, CenteringStats};
pub use engine::{CenteringEngine, EngineProvider, ExactEngine, ExactProvider, StepReport};
pub use initial::{build_initial_modified_program, extract_original_point, ModifiedProgram};
pub use params::IpmParams;
pub use potential::{cosh_safe, gamma_mu, potential, sinh_safe, step_coefficients};
pub use solve::{solve, solve_exact, solve_with_options, Certificate, Solution, SolveOptions};

/// Errors from the path-following machinery.
#[derive(Debug, Clone, PartialEq)]
pub enum IpmError {
    /// A point sat on or outside its block's domain boundary.
    DomainViolation { block: usize },
    /// `AAᵀ` is singular.
    NotFullRowRank,
    /// The potential escaped its ceiling even at the safe step rate.
    PotentialBlowup { potential: f64, bound: f64 },
    /// A centering run exceeded its iteration budget.
    IterationCap { cap: usize },
    /// No strictly feasible point could be produced.
    NoInteriorPoint { reason: String },
    /// Factorization or other numerical failure.
    Numeric { reason: String },
    /// Malformed program data.
    InvalidInput { reason: String },
}

impl std::fmt::Display for IpmError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IpmError::DomainViolation { block } => {
                write!(f, "point outside barrier domain at block {block}")
            }
            IpmError::NotFullRowRank => write!(f, "A not full row rank"),
            IpmError::PotentialBlowup { potential, bound } => {
                write!(f, "potential blowup: {potential:.3e} exceeds bound {bound:.3e}")
            }
            IpmError::IterationCap { cap } => {
                write!(f, "centering exceeded its iteration cap of {cap}")
            }
            IpmError::NoInteriorPoint { reason } => write!(f, "no interior point found: {reason}"),
            IpmError::Numeric { reason } => write!(f, "numerical failure: {reason}"),
            IpmError::InvalidInput { reason } => write!(f, "invalid input: {reason}"),
        }
    }
}

impl std::error::Error for IpmError {}
