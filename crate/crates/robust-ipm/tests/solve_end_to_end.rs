//! End-to-end solver runs on small programs whose optima are computed
//! independently (closed forms or exhaustive vertex enumeration).

mod common;

use common::{banded_lp, vertex_optimum};
use elim_tree::TreeDecomposition;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use robust_ipm::{solve_exact, BarrierBlock, IpmError, IpmParams};
use sparse_core::build_csc;

#[test]
fn corner_optimum_on_two_variable_program() {
    // min -x0 over x0 + x1 = 1, 0 < x < 1: optimum -1 at the corner (1, 0).
    let a = build_csc(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)], None).unwrap();
    let td = TreeDecomposition::single_bag(1);
    let sol = solve_exact(
        &a,
        &[1.0],
        &[-1.0, 0.0],
        &[0.0, 0.0],
        &[1.0, 1.0],
        &td,
        0.1,
        1e-6,
    )
    .unwrap();

    // Gap target eps·‖c‖·‖u − lower‖ = 1e-6·√2.
    let gap = 1e-6 * 2.0f64;
    assert!(sol.objective <= -1.0 + gap, "objective {} misses the corner", sol.objective);
    assert!(sol.objective >= -1.0 - 1e-7);
    assert!((sol.x[0] - 1.0).abs() < 1e-4);
    assert!(sol.x[1].abs() < 1e-4);
    assert!(sol.x[0] < 1.0 && sol.x[1] > 0.0, "returned point must stay interior");
    assert!(sol.certificate.primal_residual <= 1e-9 * 3.0);
    assert!(sol.iterations > 0);
}

#[test]
fn zero_objective_returns_strictly_feasible_point() {
    let a = build_csc(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)], None).unwrap();
    let td = TreeDecomposition::single_bag(1);
    let sol =
        solve_exact(&a, &[1.0], &[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], &td, 0.1, 1e-3).unwrap();
    assert!((sol.x[0] + sol.x[1] - 1.0).abs() < 1e-9);
    for &xi in &sol.x {
        assert!(xi > 0.0 && xi < 1.0);
    }
    assert_eq!(sol.objective, 0.0);
}

#[test]
fn banded_programs_match_vertex_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(07_19);
    for case in 0..6 {
        let d = 3 + case % 3;
        let bandwidth = 1 + case % 2;
        let lp = banded_lp(&mut rng, d, bandwidth);
        let opt = vertex_optimum(&lp.a, &lp.b, &lp.c, &lp.lower, &lp.upper)
            .expect("generated program is feasible");

        let eps = 1e-5;
        let sol = solve_exact(
            &lp.a, &lp.b, &lp.c, &lp.lower, &lp.upper, &lp.td, 0.05, eps,
        )
        .unwrap_or_else(|e| panic!("case {case}: solver failed: {e}"));

        let scale = 1.0 + opt.abs();
        assert!(
            sol.objective <= opt + sol.certificate.gap_bound + 1e-6 * scale,
            "case {case}: objective {} exceeds certified window around {opt}",
            sol.objective
        );
        assert!(
            sol.objective >= opt - 1e-6 * scale,
            "case {case}: objective {} beats the exact optimum {opt}",
            sol.objective
        );
        for i in 0..lp.a.ncols() {
            assert!(sol.x[i] > lp.lower[i] && sol.x[i] < lp.upper[i]);
        }
    }
}

#[test]
fn feasible_point_is_certified_even_without_optimality_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let lp = banded_lp(&mut rng, 10, 2);
    let sol = solve_exact(&lp.a, &lp.b, &lp.c, &lp.lower, &lp.upper, &lp.td, 0.05, 1e-4)
        .expect("solver succeeds on a feasible banded program");

    // x* is feasible, so the optimum is at most c⊤x*; the certificate then
    // bounds the solver's objective by that value plus the gap.
    let reference: f64 = lp.c.iter().zip(&lp.feasible).map(|(&ci, &xi)| ci * xi).sum();
    assert!(sol.objective <= reference + sol.certificate.gap_bound + 1e-9);
    assert!(sol.certificate.gap_bound > 0.0);
    assert!(sol.certificate.t_end > 0.0);
    assert!(sol.certificate.final_potential.is_finite());
}

#[test]
fn schedule_keeps_potential_inside_the_band() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let lp = banded_lp(&mut rng, 8, 2);
    let n = lp.a.ncols();
    let sol = solve_exact(&lp.a, &lp.b, &lp.c, &lp.lower, &lp.upper, &lp.td, 0.05, 1e-4)
        .expect("solver succeeds");

    // Rebuild the parameter set the solver used: widened block list (each
    // original interval plus two rays), practical anchor, and the t range
    // recorded in the certificate.
    let mut blocks: Vec<BarrierBlock> =
        (0..n).map(|i| BarrierBlock::interval(lp.lower[i], lp.upper[i])).collect();
    blocks.extend((0..2 * n).map(|_| BarrierBlock::ray()));
    let lipschitz = sparse_core::norm2(&lp.c);
    let outer: f64 = (0..n)
        .map(|i| (lp.upper[i] - lp.lower[i]).powi(2))
        .sum::<f64>()
        .sqrt();
    let params = IpmParams::with_anchor(
        Some(0.25),
        &blocks,
        lipschitz,
        outer,
        0.05,
        sol.certificate.t_end,
    );
    let cap = params.phi_cap() * (1.0 + 1e-9);
    let band_low = params.phi_band_low();

    let mut checked = 0usize;
    for rep in sol.phase1.reports.iter().chain(sol.phase2.reports.iter()) {
        assert!(rep.phi_after <= cap, "potential {} broke the ceiling {cap}", rep.phi_after);
        if rep.phi_before >= band_low {
            assert!(
                rep.phi_after <= rep.phi_before * (1.0 + 1e-9),
                "potential rose from {} to {} above the band edge",
                rep.phi_before,
                rep.phi_after
            );
        }
        checked += 1;
    }
    assert!(checked > 0, "no step reports were recorded");
    assert_eq!(sol.phase1.rejections, 0, "phase 1 rejected steps");
    assert_eq!(sol.phase2.rejections, 0, "phase 2 rejected steps");
}

#[test]
fn iteration_count_grows_slowly_with_program_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let small = banded_lp(&mut rng, 14, 1);
    let large = banded_lp(&mut rng, 56, 1);
    let sol_small =
        solve_exact(&small.a, &small.b, &small.c, &small.lower, &small.upper, &small.td, 0.05, 1e-4)
            .expect("small program solves");
    let sol_large =
        solve_exact(&large.a, &large.b, &large.c, &large.lower, &large.upper, &large.td, 0.05, 1e-4)
            .expect("large program solves");
    let ratio = sol_large.iterations as f64 / sol_small.iterations.max(1) as f64;
    assert!(
        ratio <= 2.5,
        "iterations grew from {} to {} (ratio {ratio:.2})",
        sol_small.iterations,
        sol_large.iterations
    );
}

#[test]
fn unreachable_right_hand_side_is_rejected() {
    // x0 + x1 = 10 cannot meet 0 < x < 1; the start-point construction
    // detects the distance to the affine subspace.
    let a = build_csc(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)], None).unwrap();
    let td = TreeDecomposition::single_bag(1);
    let err = solve_exact(&a, &[10.0], &[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], &td, 0.1, 1e-4)
        .unwrap_err();
    assert!(matches!(err, IpmError::NoInteriorPoint { .. }), "got {err:?}");
}

#[test]
fn malformed_inputs_are_rejected() {
    let a = build_csc(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)], None).unwrap();
    let td = TreeDecomposition::single_bag(1);
    // Mismatched dimensions.
    let err = solve_exact(&a, &[1.0, 2.0], &[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], &td, 0.1, 1e-4)
        .unwrap_err();
    assert!(matches!(err, IpmError::InvalidInput { .. }));
    // Crossed bounds.
    let err = solve_exact(&a, &[1.0], &[0.0, 0.0], &[0.0, 2.0], &[1.0, 1.0], &td, 0.1, 1e-4)
        .unwrap_err();
    assert!(matches!(err, IpmError::InvalidInput { .. }));
    // Out-of-range tolerance.
    let err = solve_exact(&a, &[1.0], &[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], &td, 0.1, 0.9)
        .unwrap_err();
    assert!(matches!(err, IpmError::InvalidInput { .. }));
}
