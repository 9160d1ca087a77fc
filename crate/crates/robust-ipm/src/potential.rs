use crate::barrier::BarrierBlock;
use crate::IpmError;

/// Overflow-safe `cosh`: `e^{|a|}(1 + e^{−2|a|})/2` with the exponent
/// clamped so a wildly off-contract argument yields a huge finite value
/// (which the step controller rejects) instead of a NaN cascade.
pub fn cosh_safe(a: f64) -> f64 {
    let a = a.abs().min(700.0);
    let e = a.exp();
    e * (1.0 + (-2.0 * a).exp()) / 2.0
}

/// Overflow-safe `sinh`, clamped like [`cosh_safe`].
pub fn sinh_safe(a: f64) -> f64 {
    let s = a.signum();
    let a = a.abs().min(700.0);
    let e = a.exp();
    s * e * (1.0 - (-2.0 * a).exp()) / 2.0
}

/// Per-block error vector and its local dual norm:
/// `μᵢ = sᵢ/t + wᵢφᵢ'(xᵢ)` and `γᵢ = |μᵢ|/√φᵢ''(xᵢ)`.
pub fn gamma_mu(
    x: &[f64],
    s: &[f64],
    t: f64,
    barriers: &[BarrierBlock],
) -> Result<(Vec<f64>, Vec<f64>), IpmError> {
    debug_assert_eq!(x.len(), barriers.len());
    debug_assert_eq!(s.len(), barriers.len());
    let mut mu = Vec::with_capacity(barriers.len());
    let mut gamma = Vec::with_capacity(barriers.len());
    for (i, blk) in barriers.iter().enumerate() {
        if !blk.contains(x[i]) {
            return Err(IpmError::DomainViolation { block: i });
        }
        let m = s[i] / t + blk.weight() * blk.grad(x[i]);
        mu.push(m);
        gamma.push(m.abs() / blk.hess(x[i]).sqrt());
    }
    Ok((mu, gamma))
}

/// Soft-max potential `Φ = Σᵢ cosh(λγᵢ/wᵢ)`.
pub fn potential(gamma: &[f64], lambda: f64, barriers: &[BarrierBlock]) -> f64 {
    gamma
        .iter()
        .zip(barriers)
        .map(|(&g, b)| cosh_safe(lambda * g / b.weight()))
        .sum()
}

/// Step coefficients
/// `cᵢ = sinh(λγᵢ/wᵢ) / (γᵢ·√(Σⱼ wⱼ⁻¹cosh²(λγⱼ/wⱼ)))`
/// (with the `γᵢ → 0` limit `(λ/wᵢ)/√(Σⱼ·)` filled in), plus the
/// normalization `ᾱ = α²·Σⱼ wⱼ⁻¹cosh²(λγⱼ/wⱼ)` used by the maintained
/// representation.
pub fn step_coefficients(
    gamma: &[f64],
    lambda: f64,
    barriers: &[BarrierBlock],
    alpha: f64,
) -> (Vec<f64>, f64) {
    // cosh² would overflow first; cap each factor so the sum stays finite.
    let cosh_capped = |a: f64| cosh_safe(a).min(1e150);
    let sum: f64 = gamma
        .iter()
        .zip(barriers)
        .map(|(&g, b)| {
            let ch = cosh_capped(lambda * g / b.weight());
            ch * ch / b.weight()
        })
        .sum();
    let denom = sum.sqrt();
    let coeffs = gamma
        .iter()
        .zip(barriers)
        .map(|(&g, b)| {
            let w = b.weight();
            let arg = lambda * g / w;
            if arg < 1e-8 {
                (lambda / w) / denom
            } else {
                sinh_safe(arg) / (g * denom)
            }
        })
        .collect();
    (coeffs, alpha * alpha * sum)
}
