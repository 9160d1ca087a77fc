use crate::barrier::BarrierBlock;
use crate::center::{centering, CenteringStats};
use crate::engine::{EngineProvider, ExactProvider};
use crate::initial::{build_initial_modified_program, extract_original_point};
use crate::params::IpmParams;
use crate::potential::{gamma_mu, potential};
use crate::IpmError;
use elim_tree::{make_elim_order_and_tree, validate_td, TreeDecomposition};
use sparse_core::SparseMatrix;

/// Residual and gap guarantees attached to a solution.
#[derive(Debug, Clone)]
pub struct Certificate {
    /// `‖Ax − b‖₂` at the returned point.
    pub primal_residual: f64,
    /// Duality-gap bound `4·t_end·Σwᵢνᵢ` implied by the final centering.
    pub gap_bound: f64,
    /// Potential at exit.
    pub final_potential: f64,
    /// Path parameter the run terminated at.
    pub t_end: f64,
}

/// Result of a solve, with per-phase step records for diagnostics.
#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub s: Vec<f64>,
    pub objective: f64,
    /// Total committed centering steps across both phases and the
    /// re-centering between them.
    pub iterations: usize,
    pub certificate: Certificate,
    pub phase1: CenteringStats,
    pub phase2: CenteringStats,
    /// Fixed-t correction steps taken between the phases.
    pub polish_steps: usize,
}

/// Tuning knobs for [`solve_with_options`].
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Override for the centering tolerance anchor ε̄ (default: the
    /// practical 1/4; the conservative value is unusably slow).
    pub eps_bar_anchor: Option<f64>,
    /// Small-component cutoff for the elimination-order construction;
    /// default `2·(width+1) + 2`.
    pub base_cutoff: Option<usize>,
    /// Cap on fixed-t correction steps between the phases.
    pub max_polish_steps: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { eps_bar_anchor: Some(0.25), base_cutoff: None, max_polish_steps: 200 }
    }
}

/// Solves `min c⊤x` over `Ax = b`, `lower < x < upper` with the exact
/// reference engine.
#[allow(clippy::too_many_arguments)]
pub fn solve_exact(
    a: &SparseMatrix,
    b: &[f64],
    c: &[f64],
    lower: &[f64],
    upper: &[f64],
    td: &TreeDecomposition,
    inner_radius: f64,
    eps: f64,
) -> Result<Solution, IpmError> {
    solve(a, b, c, lower, upper, td, inner_radius, eps, &ExactProvider)
}

/// Solves `min c⊤x` over `Ax = b`, `lower < x < upper`, with the engine
/// supplied by `provider` (exact reference or maintained representation).
#[allow(clippy::too_many_arguments)]
pub fn solve(
    a: &SparseMatrix,
    b: &[f64],
    c: &[f64],
    lower: &[f64],
    upper: &[f64],
    td: &TreeDecomposition,
    inner_radius: f64,
    eps: f64,
    provider: &dyn EngineProvider,
) -> Result<Solution, IpmError> {
    solve_with_options(a, b, c, lower, upper, td, inner_radius, eps, provider, &SolveOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn solve_with_options(
    a: &SparseMatrix,
    b: &[f64],
    c: &[f64],
    lower: &[f64],
    upper: &[f64],
    td: &TreeDecomposition,
    inner_radius: f64,
    eps: f64,
    provider: &dyn EngineProvider,
    opts: &SolveOptions,
) -> Result<Solution, IpmError> {
    let n = a.ncols();
    let d = a.nrows();
    if b.len() != d || c.len() != n || lower.len() != n || upper.len() != n {
        return Err(IpmError::InvalidInput { reason: "dimension mismatch".to_string() });
    }
    if n == 0 || d == 0 {
        return Err(IpmError::InvalidInput { reason: "empty program".to_string() });
    }
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(IpmError::InvalidInput { reason: "eps must lie in (0, 1/2]".to_string() });
    }
    if !(inner_radius > 0.0) {
        return Err(IpmError::InvalidInput { reason: "inner radius must be positive".to_string() });
    }
    for i in 0..n {
        if !(lower[i].is_finite() && upper[i].is_finite() && lower[i] < upper[i]) {
            return Err(IpmError::InvalidInput {
                reason: format!("bounds of variable {i} are not a finite interval"),
            });
        }
    }

    // Elimination order over the constraint rows, then move to position
    // space once: afterwards the tree order is the identity and every
    // factorization works in place.
    let dual = sparse_core::dual_graph(a);
    validate_td(&dual, td).map_err(|e| IpmError::InvalidInput {
        reason: format!("tree decomposition invalid: {e}"),
    })?;
    let cutoff = opts.base_cutoff.unwrap_or(2 * (td.width() + 1) + 2);
    let tree0 = make_elim_order_and_tree(&dual, td, cutoff)
        .map_err(|e| IpmError::Numeric { reason: format!("elimination order: {e}") })?;
    let perm: Vec<usize> = (0..d).map(|v| tree0.position(v)).collect();
    let a_p = a.permute_rows(&perm);
    let mut b_p = vec![0.0; d];
    for (r, &br) in b.iter().enumerate() {
        b_p[perm[r]] = br;
    }
    let tree = tree0.relabeled_by_position();

    let barriers: Vec<BarrierBlock> =
        (0..n).map(|i| BarrierBlock::interval(lower[i], upper[i])).collect();
    let lipschitz = sparse_core::norm2(c);
    let outer: f64 = (0..n)
        .map(|i| (upper[i] - lower[i]) * (upper[i] - lower[i]))
        .sum::<f64>()
        .sqrt();
    let kappa_orig: f64 = barriers.iter().map(|b| b.weight() * b.nu()).sum();
    let lr = lipschitz * outer;
    let gap_target = if lr > 0.0 { eps * lr } else { eps };
    let t_end = gap_target / (4.0 * kappa_orig);

    // One parameter set for the whole run, derived from the widened
    // program's block count (the larger of the two phases).
    let mut widened_blocks = barriers.clone();
    widened_blocks.extend((0..2 * n).map(|_| BarrierBlock::ray()));
    let params = IpmParams::with_anchor(
        opts.eps_bar_anchor,
        &widened_blocks,
        lipschitz,
        outer,
        inner_radius,
        t_end,
    );
    let t_mid = lr.max(t_end);

    // Phase 1: center the widened program from the exact start down to the
    // handoff parameter.
    let modified = build_initial_modified_program(&a_p, &b_p, c, &barriers, &tree, &params)?;
    let mut engine1 = provider.make(
        &modified.a,
        &modified.b,
        &modified.barriers,
        &tree,
        modified.x0.clone(),
        modified.s0.clone(),
        modified.t_start,
        &params,
    )?;
    let phase1 = centering(engine1.as_mut(), &params, modified.t_start, t_mid)?;

    // Collapse to the original variables; a handful of fixed-t correction
    // steps tightens the center until the collapse goes through within the
    // potential ceiling.
    let phi_cap = params.phi_cap() * (1.0 + 1e-9);
    let mut polish_steps = 0usize;
    let (x_mid, s_mid) = loop {
        let (x3, s3) = engine1.finish();
        let extracted =
            extract_original_point(&x3, &s3, &barriers, t_mid, params.delta_init).and_then(
                |(x, s)| {
                    let (_, gamma) = gamma_mu(&x, &s, t_mid, &barriers)?;
                    let phi = potential(&gamma, params.lambda, &barriers);
                    if phi <= phi_cap {
                        Ok((x, s))
                    } else {
                        Err(IpmError::PotentialBlowup { potential: phi, bound: phi_cap })
                    }
                },
            );
        match extracted {
            Ok(pair) => break pair,
            Err(_) if polish_steps < opts.max_polish_steps => {
                engine1.sync_t(t_mid)?;
                let rep = engine1.step()?;
                if rep.phi_after > phi_cap {
                    return Err(IpmError::PotentialBlowup {
                        potential: rep.phi_after,
                        bound: phi_cap,
                    });
                }
                polish_steps += 1;
            }
            Err(e) => return Err(e),
        }
    };

    // Phase 2: original program down to the target parameter.
    let mut engine2 =
        provider.make(&a_p, &b_p, &barriers, &tree, x_mid, s_mid, t_mid, &params)?;
    let phase2 = centering(engine2.as_mut(), &params, t_mid, t_end)?;
    let (x, s) = engine2.finish();

    let ax = a_p.matvec(&x);
    let residual: f64 = ax
        .iter()
        .zip(&b_p)
        .map(|(&p, &q)| (p - q) * (p - q))
        .sum::<f64>()
        .sqrt();
    let norm_a = a_p.to_triplets().iter().map(|&(_, _, v)| v * v).sum::<f64>().sqrt();
    let feas_tol = 1e-9 * (norm_a * sparse_core::norm2(&x) + sparse_core::norm2(&b_p));
    if residual > feas_tol.max(1e-300) {
        return Err(IpmError::Numeric {
            reason: format!("feasibility drift {residual:.3e} exceeds tolerance {feas_tol:.3e}"),
        });
    }
    for i in 0..n {
        if !(x[i] > lower[i] && x[i] < upper[i]) {
            return Err(IpmError::Numeric {
                reason: format!("returned point touches the boundary at variable {i}"),
            });
        }
    }

    let objective = sparse_core::dot(c, &x);
    let iterations = phase1.iterations + polish_steps + phase2.iterations;
    Ok(Solution {
        objective,
        iterations,
        certificate: Certificate {
            primal_residual: residual,
            gap_bound: 4.0 * t_end * kappa_orig,
            final_potential: phase2.final_potential,
            t_end,
        },
        phase1,
        phase2,
        polish_steps,
        x,
        s,
    })
}
