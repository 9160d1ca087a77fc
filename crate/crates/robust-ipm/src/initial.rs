use crate::barrier::BarrierBlock;
use crate::params::IpmParams;
use crate::potential::gamma_mu;
use crate::IpmError;
use elim_tree::EliminationTree;
use sparse_cholesky::{factorize, DiagonalBlockHessian};
use sparse_core::{build_csc, SparseMatrix};

/// The widened program `[A, A, −A]` together with its barriers and an
/// exactly centered starting pair at `t_start`.
///
/// The first copy of the variables keeps the original interval barriers;
/// the two auxiliary copies live on the positive ray. The starting point
/// combines the unconstrained barrier minimizer `x_c` with its projection
/// `x_∘` onto the affine constraints so that the widened point is feasible,
/// strictly interior, and has error vector exactly zero.
pub struct ModifiedProgram {
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub barriers: Vec<BarrierBlock>,
    pub x0: Vec<f64>,
    pub s0: Vec<f64>,
    pub t_start: f64,
    /// Blockwise minimizer of `c⊤x + t_start·Σwᵢφᵢ(xᵢ)`.
    pub x_center: Vec<f64>,
    /// Projection of `x_center` onto `{Ax = b}`.
    pub x_affine: Vec<f64>,
}

/// Builds the widened program and its centered start.
///
/// `a`'s rows must already be in elimination order (the tree's order is the
/// identity). Fails with `NotFullRowRank` when `AAᵀ` is singular.
pub fn build_initial_modified_program(
    a: &SparseMatrix,
    b: &[f64],
    c: &[f64],
    barriers: &[BarrierBlock],
    tree: &EliminationTree,
    params: &IpmParams,
) -> Result<ModifiedProgram, IpmError> {
    let n = a.ncols();
    if b.len() != a.nrows() || c.len() != n || barriers.len() != n {
        return Err(IpmError::InvalidInput {
            reason: "initial point: dimensions disagree".to_string(),
        });
    }
    let t = params.t_start;

    // Blockwise barrier-penalized minimizer: ∇(c⊤x + tΣwφ) = 0 exactly.
    let mut x_center = Vec::with_capacity(n);
    for i in 0..n {
        x_center.push(barriers[i].argmin_linear(c[i], t)?);
    }

    // Minimum-norm correction onto the affine constraints.
    let identity = DiagonalBlockHessian::from_scalars(vec![1.0; n])
        .map_err(|e| IpmError::Numeric { reason: e.to_string() })?;
    let factor = factorize(a, identity, tree).map_err(|_| IpmError::NotFullRowRank)?;
    let ax = a.matvec(&x_center);
    let resid: Vec<f64> = b.iter().zip(&ax).map(|(&bi, &axi)| bi - axi).collect();
    let y = factor.solve_upper_dense(&factor.solve_lower_dense(&resid));
    let correction = a.matvec_transpose(&y);
    let x_affine: Vec<f64> = (0..n).map(|i| x_center[i] + correction[i]).collect();

    let big_r = params.outer_radius;
    let shift = sparse_core::norm2(&correction);
    if shift > 2.0 * big_r * (1.0 + 1e-9) {
        return Err(IpmError::NoInteriorPoint {
            reason: format!(
                "projection moved the barrier center by {shift:.3e} > 2R = {:.3e}; \
                 the constraints appear to have no interior point in the boxes",
                2.0 * big_r
            ),
        });
    }

    // Widened matrix [A, A, −A]; every column is its own block.
    let base = a.to_triplets();
    let mut triplets = Vec::with_capacity(3 * base.len());
    for &(r, j, v) in &base {
        triplets.push((r, j, v));
        triplets.push((r, n + j, v));
        triplets.push((r, 2 * n + j, -v));
    }
    let a3 = build_csc(a.nrows(), 3 * n, &triplets, None)
        .map_err(|e| IpmError::Numeric { reason: e.to_string() })?;

    let mut barriers3 = barriers.to_vec();
    barriers3.extend((0..2 * n).map(|_| BarrierBlock::ray()));

    let wall = 3.0 * big_r;
    let mut x0 = Vec::with_capacity(3 * n);
    let mut s0 = Vec::with_capacity(3 * n);
    x0.extend_from_slice(&x_center);
    for i in 0..n {
        let xi2 = wall + x_affine[i] - x_center[i];
        debug_assert!(xi2 > 0.0, "auxiliary coordinate must stay positive");
        x0.push(xi2);
    }
    x0.extend((0..n).map(|_| wall));
    // Blockwise optimality of `x_center` means `-t·w·φ'(x_center) = c`
    // exactly; using `c` itself keeps the dual seed consistent with the
    // objective to the last bit. Evaluating the gradient instead would
    // cancel catastrophically: near the box center `φ'` is a difference of
    // two reciprocals of size `1/Δ`, so `t·φ'` carries an absolute error of
    // order `t·ulp/Δ²`, which at the enormous starting `t` dwarfs `c`.
    s0.extend_from_slice(c);
    for i in 0..n {
        s0.push(t / x0[n + i]);
    }
    s0.extend((0..n).map(|_| t / wall));

    // The construction centers the widened program exactly; verify.
    let (_, gamma0) = gamma_mu(&x0, &s0, t, &barriers3)?;
    let worst = gamma0.iter().fold(0.0f64, |m, &g| m.max(g));
    if worst > 1e-8 {
        return Err(IpmError::Numeric {
            reason: format!("initial point off center: max gamma {worst:.3e}"),
        });
    }

    Ok(ModifiedProgram {
        a: a3,
        b: b.to_vec(),
        barriers: barriers3,
        x0,
        s0,
        t_start: t,
        x_center,
        x_affine,
    })
}

/// Collapses a widened iterate back to the original variables:
/// `x = x⁽¹⁾ + x⁽²⁾ − x⁽³⁾`, `s = s⁽¹⁾`.
///
/// Requires the result to be strictly interior to the original domain, and
/// the per-block error norms at `t_prime` to grow by at most
/// `delta_init`; both fail with "initialization insufficient" otherwise
/// (the caller can re-center the widened program and retry).
pub fn extract_original_point(
    x3: &[f64],
    s3: &[f64],
    barriers: &[BarrierBlock],
    t_prime: f64,
    delta_init: f64,
) -> Result<(Vec<f64>, Vec<f64>), IpmError> {
    let n = barriers.len();
    debug_assert_eq!(x3.len(), 3 * n);
    debug_assert_eq!(s3.len(), 3 * n);
    let x: Vec<f64> = (0..n).map(|i| x3[i] + x3[n + i] - x3[2 * n + i]).collect();
    let s: Vec<f64> = s3[..n].to_vec();

    for (i, blk) in barriers.iter().enumerate() {
        if !blk.contains(x[i]) {
            return Err(IpmError::NoInteriorPoint {
                reason: format!("initialization insufficient: block {i} left its domain"),
            });
        }
    }
    // Error-growth contract of the collapse.
    let (_, gamma_old) = gamma_mu(&x3[..n], &s3[..n], t_prime, barriers)?;
    let (_, gamma_new) = gamma_mu(&x, &s, t_prime, barriers)?;
    for i in 0..n {
        if gamma_new[i] > gamma_old[i] + delta_init * (1.0 + 1e-6) + 1e-12 {
            return Err(IpmError::NoInteriorPoint {
                reason: format!(
                    "initialization insufficient: block {i} error grew from \
                     {:.3e} to {:.3e}",
                    gamma_old[i], gamma_new[i]
                ),
            });
        }
    }
    Ok((x, s))
}
