use crate::barrier::{total_complexity, total_weight, BarrierBlock};
use crate::potential::cosh_safe;

/// All scalar knobs of the path-following schedule. Every field is computed
/// from the program data by the constructors; nothing is hand-set.
#[derive(Debug, Clone)]
pub struct IpmParams {
    /// Potential sharpness `λ = 64·ln(256·m·Σwᵢ)` (natural log).
    pub lambda: f64,
    /// Centering tolerance anchor `ε̄`.
    pub eps_bar: f64,
    /// Step aggressiveness `α = ε̄/2`.
    pub alpha: f64,
    /// Allowed relative drift of the cached path parameter:
    /// `ε_t = (ε̄/4)·minᵢ wᵢ/(wᵢ+νᵢ)`.
    pub eps_t: f64,
    /// Guaranteed-safe per-iteration shrink `α/(64√κ)`; the adaptive
    /// schedule never drops below this floor.
    pub step_shrink: f64,
    /// Initial path parameter `2¹⁶(m+κ)⁵·(LR/δ_init)·(R/r)`.
    pub t_start: f64,
    /// Final path parameter.
    pub t_end: f64,
    /// Interior radius `r` (distance from some feasible point to the
    /// domain boundary), supplied by the caller.
    pub inner_radius: f64,
    /// Domain diameter `R = ‖u−ℓ‖₂`.
    pub outer_radius: f64,
    /// Objective scale `L = ‖c‖₂`.
    pub lipschitz: f64,
    /// Initialization slack; fixed 1/128.
    pub delta_init: f64,
    /// `κ = Σwᵢνᵢ`.
    pub kappa: f64,
    /// `Σwᵢ`.
    pub sum_weights: f64,
    /// Number of barrier blocks `m`.
    pub nblocks: usize,
}

impl IpmParams {
    /// Parameters with the fully conservative tolerance anchor
    /// `ε̄ = 1/(1440λ)`. The resulting schedule is astronomically slow (the
    /// safe shrink floor alone forces billions of iterations) but is the
    /// reference point the relations are tested against.
    pub fn theory(
        blocks: &[BarrierBlock],
        lipschitz: f64,
        outer_radius: f64,
        inner_radius: f64,
        t_end: f64,
    ) -> Self {
        Self::with_anchor(None, blocks, lipschitz, outer_radius, inner_radius, t_end)
    }

    /// Parameters with the practical anchor `ε̄ = 1/4`. All other fields
    /// keep their defining relations to `ε̄`, `λ`, and `κ`; the adaptive
    /// shrink schedule polices the potential at run time.
    pub fn practical(
        blocks: &[BarrierBlock],
        lipschitz: f64,
        outer_radius: f64,
        inner_radius: f64,
        t_end: f64,
    ) -> Self {
        Self::with_anchor(Some(0.25), blocks, lipschitz, outer_radius, inner_radius, t_end)
    }

    /// Shared constructor; `anchor = None` selects `ε̄ = 1/(1440λ)`.
    pub fn with_anchor(
        anchor: Option<f64>,
        blocks: &[BarrierBlock],
        lipschitz: f64,
        outer_radius: f64,
        inner_radius: f64,
        t_end: f64,
    ) -> Self {
        let m = blocks.len();
        let sum_w = total_weight(blocks);
        let kappa = total_complexity(blocks);
        let lambda = 64.0 * (256.0 * m as f64 * sum_w).ln();
        let eps_bar = anchor.unwrap_or(1.0 / (1440.0 * lambda));
        let alpha = eps_bar / 2.0;
        let min_ratio = blocks
            .iter()
            .map(|b| b.weight() / (b.weight() + b.nu()))
            .fold(f64::INFINITY, f64::min);
        let eps_t = (eps_bar / 4.0) * min_ratio;
        let step_shrink = alpha / (64.0 * kappa.sqrt());
        // Guard for zero objectives: with L = 0 the nominal start value
        // collapses, so fall back to the target scale (any positive start
        // above t_end works; every feasible point is optimal).
        let lr = (lipschitz * outer_radius).max(t_end);
        let delta_init = 1.0 / 128.0;
        let t_start = 2f64.powi(16)
            * (m as f64 + kappa).powi(5)
            * (lr / delta_init)
            * (outer_radius / inner_radius);
        IpmParams {
            lambda,
            eps_bar,
            alpha,
            eps_t,
            step_shrink,
            t_start,
            t_end,
            inner_radius,
            outer_radius,
            lipschitz,
            delta_init,
            kappa,
            sum_weights: sum_w,
            nblocks: m,
        }
    }

    /// Hard ceiling on the potential: `cosh(λ/64)`.
    pub fn phi_cap(&self) -> f64 {
        cosh_safe(self.lambda / 64.0)
    }

    /// Lower edge of the control band: `cosh(λ/128)`. Below it the schedule
    /// may accelerate; above it every step must not increase the potential.
    pub fn phi_band_low(&self) -> f64 {
        cosh_safe(self.lambda / 128.0)
    }

    /// Deceleration threshold `cosh(λ/96)`, strictly between the band edge
    /// and the cap.
    pub fn phi_band_mid(&self) -> f64 {
        cosh_safe(self.lambda / 96.0)
    }

    /// Iteration budget for one centering run:
    /// `(10√κ + 150)·ln(t_hi/t_lo) + 100`.
    ///
    /// The `10√κ` term is the asymptotic rate of the schedule. The additive
    /// `150` per log unit is a floor for small programs: the potential cap
    /// tolerates a per-block deviation of about `λ/64`, and one shrink by
    /// `η` perturbs a block deviation by about `λη`, so the sustainable
    /// shrink rate is bounded by a dimension-independent constant near
    /// `1/64` per accepted step no matter how small `κ` is.
    pub fn iteration_cap(&self, t_hi: f64, t_lo: f64) -> usize {
        let span = if t_hi > t_lo && t_lo > 0.0 {
            (t_hi / t_lo).ln()
        } else {
            0.0
        };
        ((10.0 * self.kappa.sqrt() + 150.0) * span + 100.0).ceil() as usize
    }
}
