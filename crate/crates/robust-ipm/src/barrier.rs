use crate::IpmError;

/// One-dimensional barrier block: a bounded interval with the two-sided log
/// barrier, or the positive ray with `−log x` (used by the auxiliary
/// variables of the initialization program). Each block carries a weight
/// `w ≥ 1`; its self-concordance parameter is 1.
#[derive(Debug, Clone, PartialEq)]
pub enum BarrierBlock {
    /// `x ∈ (lower, upper)` with `φ(x) = −log(upper−x) − log(x−lower)`.
    Interval { lower: f64, upper: f64, weight: f64 },
    /// `x ∈ (0, ∞)` with `φ(x) = −log x`.
    PositiveRay { weight: f64 },
}

impl BarrierBlock {
    /// Interval block with unit weight.
    pub fn interval(lower: f64, upper: f64) -> Self {
        BarrierBlock::Interval { lower, upper, weight: 1.0 }
    }

    /// Positive-ray block with unit weight.
    pub fn ray() -> Self {
        BarrierBlock::PositiveRay { weight: 1.0 }
    }

    pub fn weight(&self) -> f64 {
        match *self {
            BarrierBlock::Interval { weight, .. } => weight,
            BarrierBlock::PositiveRay { weight } => weight,
        }
    }

    /// Self-concordance parameter of the block barrier.
    pub fn nu(&self) -> f64 {
        1.0
    }

    /// Whether `x` is strictly inside the block's domain.
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            BarrierBlock::Interval { lower, upper, .. } => lower < x && x < upper,
            BarrierBlock::PositiveRay { .. } => x > 0.0,
        }
    }

    /// Barrier value; `+∞` outside the domain.
    pub fn value(&self, x: f64) -> f64 {
        if !self.contains(x) {
            return f64::INFINITY;
        }
        match *self {
            BarrierBlock::Interval { lower, upper, .. } => {
                -(upper - x).ln() - (x - lower).ln()
            }
            BarrierBlock::PositiveRay { .. } => -x.ln(),
        }
    }

    /// `φ'(x)`; requires `x` strictly interior.
    pub fn grad(&self, x: f64) -> f64 {
        debug_assert!(self.contains(x));
        match *self {
            BarrierBlock::Interval { lower, upper, .. } => {
                1.0 / (upper - x) - 1.0 / (x - lower)
            }
            BarrierBlock::PositiveRay { .. } => -1.0 / x,
        }
    }

    /// `φ''(x) > 0`; requires `x` strictly interior.
    pub fn hess(&self, x: f64) -> f64 {
        debug_assert!(self.contains(x));
        match *self {
            BarrierBlock::Interval { lower, upper, .. } => {
                let du = upper - x;
                let dl = x - lower;
                1.0 / (du * du) + 1.0 / (dl * dl)
            }
            BarrierBlock::PositiveRay { .. } => 1.0 / (x * x),
        }
    }

    /// Minimizer of `coeff·x + t·w·φ(x)` over the block domain, found by
    /// safeguarded 1-D Newton (bisection fallback keeps the bracket valid)
    /// down to a locally scaled gradient below 1e−12.
    pub fn argmin_linear(&self, coeff: f64, t: f64) -> Result<f64, IpmError> {
        let w = self.weight();
        let tw = t * w;
        match *self {
            BarrierBlock::PositiveRay { .. } => {
                // g(x) = coeff − tw/x: root only for positive coeff.
                if coeff <= 0.0 {
                    return Err(IpmError::Numeric {
                        reason: "ray block objective unbounded below".to_string(),
                    });
                }
                Ok(tw / coeff)
            }
            BarrierBlock::Interval { lower, upper, .. } => {
                // g(x) = coeff + tw·φ'(x) is strictly increasing on the
                // interval, from −∞ to +∞, so the root exists and is unique.
                let mut lo = lower;
                let mut hi = upper;
                let mut x = 0.5 * (lower + upper);
                for _ in 0..64 {
                    let g = coeff + tw * self.grad(x);
                    let h = tw * self.hess(x);
                    if g.abs() <= 1e-12 * (coeff.abs() + tw * self.hess(x).sqrt()).max(1e-300) {
                        break;
                    }
                    if g > 0.0 {
                        hi = x;
                    } else {
                        lo = x;
                    }
                    let newton = x - g / h;
                    x = if newton > lo && newton < hi {
                        newton
                    } else {
                        0.5 * (lo + hi)
                    };
                }
                Ok(x)
            }
        }
    }
}

/// `Σᵢ wᵢ` over the blocks.
pub fn total_weight(blocks: &[BarrierBlock]) -> f64 {
    blocks.iter().map(|b| b.weight()).sum()
}

/// `κ = Σᵢ wᵢνᵢ`, the complexity measure governing step counts.
pub fn total_complexity(blocks: &[BarrierBlock]) -> f64 {
    blocks.iter().map(|b| b.weight() * b.nu()).sum()
}
