use crate::engine::{CenteringEngine, StepReport};
use crate::params::IpmParams;
use crate::IpmError;

/// Record of one centering run.
#[derive(Debug, Clone, Default)]
pub struct CenteringStats {
    /// Committed steps.
    pub iterations: usize,
    /// Proposals rejected by the potential guard (shrink retried smaller).
    pub rejections: usize,
    /// Per accepted step, in order.
    pub reports: Vec<StepReport>,
    /// Potential at exit.
    pub final_potential: f64,
}

/// Drives the path parameter from `t_start` down to `t_end` while keeping
/// the potential under `cosh(λ/64)`.
///
/// The shrink rate per iteration adapts: it starts at the guaranteed-safe
/// floor `α/(64√κ)` and grows geometrically while the post-shrink potential
/// stays below `cosh(λ/128)`, holds steady in the middle of the band, and
/// halves when the shrink pushes past `cosh(λ/96)`; any violation of the
/// potential rules rejects the proposal, restores the state, and backs the
/// rate off toward the floor. At the floor itself a violation is a hard
/// error, matching the guarantee that floor-rate steps never blow up the
/// potential.
pub fn centering(
    engine: &mut dyn CenteringEngine,
    params: &IpmParams,
    t_start: f64,
    t_end: f64,
) -> Result<CenteringStats, IpmError> {
    let cap = params.iteration_cap(t_start, t_end);
    let phi_cap = params.phi_cap();
    let band_low = params.phi_band_low();
    let band_mid = params.phi_band_mid();
    let floor = params.step_shrink;
    let at_floor = |eta: f64| eta <= floor * (1.0 + 1e-12);

    let mut stats = CenteringStats::default();
    let mut t = t_start;
    let mut eta = floor;

    let phi0 = engine.sync_t(t)?;
    stats.final_potential = phi0;
    if phi0 > phi_cap * (1.0 + 1e-9) {
        return Err(IpmError::PotentialBlowup { potential: phi0, bound: phi_cap });
    }

    while t > t_end {
        if stats.iterations + stats.rejections >= cap {
            return Err(IpmError::IterationCap { cap });
        }
        let t_prop = ((1.0 - eta) * t).max(t_end);
        let phi_pre = engine.sync_t(t_prop)?;
        if phi_pre > phi_cap {
            // The shrink alone overshot the ceiling; retract it.
            engine.sync_t(t)?;
            if at_floor(eta) {
                return Err(IpmError::PotentialBlowup { potential: phi_pre, bound: phi_cap });
            }
            eta = (eta / 4.0).max(floor);
            stats.rejections += 1;
            continue;
        }

        let report = engine.step()?;
        let increased = report.phi_after > phi_pre * (1.0 + 1e-9);
        let violation = report.phi_after > phi_cap || (phi_pre >= band_low && increased);
        if violation {
            if engine.supports_undo() && !at_floor(eta) {
                engine.undo_step();
                engine.sync_t(t)?;
                eta = (eta / 4.0).max(floor);
                stats.rejections += 1;
                continue;
            }
            return Err(IpmError::PotentialBlowup {
                potential: report.phi_after,
                bound: phi_cap,
            });
        }

        t = t_prop;
        stats.iterations += 1;
        stats.final_potential = report.phi_after;
        // Rate feedback reads the post-shrink potential: the correction step
        // usually recenters almost completely, so its own outcome carries no
        // graded signal about how hard the shrink pushed against the band.
        // Inside the band the rate still creeps upward slowly so it does not
        // freeze at whatever value first crossed the lower edge.
        if phi_pre <= band_low {
            eta = (eta * 1.5).min(0.5);
        } else if phi_pre >= band_mid {
            eta = (eta / 1.5).max(floor);
        } else {
            eta = (eta * 1.05).min(0.5);
        }
        stats.reports.push(report);
    }
    Ok(stats)
}
