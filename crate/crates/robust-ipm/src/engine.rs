use crate::barrier::BarrierBlock;
use crate::params::IpmParams;
use crate::potential::{gamma_mu, potential, step_coefficients};
use crate::IpmError;
use elim_tree::EliminationTree;
use sparse_cholesky::{factorize, CholeskyFactor, DiagonalBlockHessian};
use sparse_core::SparseMatrix;

/// Outcome of one committed (or virtually rejected) centering step.
#[derive(Debug, Clone, Copy)]
pub struct StepReport {
    /// Path parameter the step was taken at (the engine's cached t̄).
    pub t_bar: f64,
    /// Potential before the step, at (x̄, s̄, t̄).
    pub phi_before: f64,
    /// Potential after the step; infinite when the candidate left the
    /// domain and was discarded.
    pub phi_after: f64,
    /// `‖δ_x‖_x̄` (local primal norm of the step).
    pub step_norm_x: f64,
    /// `‖δ_s‖*_x̄ / t̄` (scaled local dual norm of the slack step).
    pub step_norm_s: f64,
}

/// One iteration's worth of central-path state management: the centering
/// loop owns the schedule, the engine owns the iterate and its
/// approximations and performs the actual linear algebra.
pub trait CenteringEngine {
    /// Move the path parameter to `t` and return the potential measured at
    /// the engine's (possibly approximate) state.
    fn sync_t(&mut self, t: f64) -> Result<f64, IpmError>;

    /// Potential at the current state without changing anything.
    fn potential(&self) -> f64;

    /// The engine's cached path parameter t̄.
    fn t_bar(&self) -> f64;

    /// Take one centering step at the current (x̄, s̄, t̄).
    fn step(&mut self) -> Result<StepReport, IpmError>;

    /// Whether [`Self::undo_step`] can roll back the latest step.
    fn supports_undo(&self) -> bool {
        false
    }

    /// Roll back the most recent committed step (only valid immediately
    /// after it, before any other mutation).
    fn undo_step(&mut self) {}

    /// Materialize the exact iterate `(x, s)`.
    fn finish(&mut self) -> (Vec<f64>, Vec<f64>);
}

/// Factory for engines, letting the top-level solve stay generic over the
/// exact reference mode and the incrementally maintained mode.
pub trait EngineProvider {
    fn make(
        &self,
        a: &SparseMatrix,
        b: &[f64],
        barriers: &[BarrierBlock],
        tree: &EliminationTree,
        x: Vec<f64>,
        s: Vec<f64>,
        t: f64,
        params: &IpmParams,
    ) -> Result<Box<dyn CenteringEngine>, IpmError>;
}

/// Provider for [`ExactEngine`].
pub struct ExactProvider;

impl EngineProvider for ExactProvider {
    fn make(
        &self,
        a: &SparseMatrix,
        b: &[f64],
        barriers: &[BarrierBlock],
        tree: &EliminationTree,
        x: Vec<f64>,
        s: Vec<f64>,
        t: f64,
        params: &IpmParams,
    ) -> Result<Box<dyn CenteringEngine>, IpmError> {
        Ok(Box::new(ExactEngine::new(
            a.clone(),
            b.to_vec(),
            barriers.to_vec(),
            tree.clone(),
            x,
            s,
            t,
            params,
        )?))
    }
}

/// Reference engine: keeps the exact iterate, refreshes every quantity every
/// step, and refactorizes the normal matrix at the current Hessian for each
/// solve. Supports undo, so the adaptive schedule can reject steps freely.
pub struct ExactEngine {
    a: SparseMatrix,
    b: Vec<f64>,
    barriers: Vec<BarrierBlock>,
    tree: EliminationTree,
    lambda: f64,
    alpha: f64,
    norm_a: f64,
    x: Vec<f64>,
    /// Slack at engine construction. Every later slack is `s_seed + Aᵀu`.
    s_seed: Vec<f64>,
    /// Accumulated row-space coefficient of the slack updates.
    u: Vec<f64>,
    /// Materialized slack `s_seed + Aᵀu`, recomputed from scratch after
    /// every change to `u`. Accumulating the slack directly instead would
    /// freeze absolute rounding noise of the early iterations into it: at
    /// the enormous starting path parameter the slack transients are many
    /// orders above the objective, and additive noise at that scale never
    /// fades, silently bending the objective the dual certifies. The
    /// explicit `(seed, u)` split keeps `c − s` in the row space to the
    /// last bit no matter how large the transients were.
    s_cur: Vec<f64>,
    t: f64,
    mu: Vec<f64>,
    gamma: Vec<f64>,
    phi: f64,
    /// Pre-step snapshot for undo: (x, u, s_cur, mu, gamma, phi).
    prev: Option<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>, f64)>,
    accepted_steps: usize,
    /// Cached identity-Hessian factor of `AAᵀ` for feasibility repair.
    repair_factor: Option<CholeskyFactor>,
}

impl ExactEngine {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: SparseMatrix,
        b: Vec<f64>,
        barriers: Vec<BarrierBlock>,
        tree: EliminationTree,
        x: Vec<f64>,
        s: Vec<f64>,
        t: f64,
        params: &IpmParams,
    ) -> Result<Self, IpmError> {
        if a.ncols() != barriers.len() || x.len() != barriers.len() || s.len() != barriers.len() {
            return Err(IpmError::InvalidInput {
                reason: "engine dimensions disagree".to_string(),
            });
        }
        let norm_a = a.to_triplets().iter().map(|&(_, _, v)| v * v).sum::<f64>().sqrt();
        let (mu, gamma) = gamma_mu(&x, &s, t, &barriers)?;
        let phi = potential(&gamma, params.lambda, &barriers);
        let u = vec![0.0; a.nrows()];
        Ok(ExactEngine {
            a,
            b,
            barriers,
            tree,
            lambda: params.lambda,
            alpha: params.alpha,
            norm_a,
            x,
            s_cur: s.clone(),
            s_seed: s,
            u,
            t,
            mu,
            gamma,
            phi,
            prev: None,
            accepted_steps: 0,
            repair_factor: None,
        })
    }

    /// Rebuilds `s_cur = s_seed + Aᵀu` from scratch.
    fn materialize_slack(&mut self) {
        let aty = self.a.matvec_transpose(&self.u);
        for i in 0..self.s_cur.len() {
            self.s_cur[i] = self.s_seed[i] + aty[i];
        }
    }

    fn refresh(&mut self) -> Result<(), IpmError> {
        let (mu, gamma) = gamma_mu(&self.x, &self.s_cur, self.t, &self.barriers)?;
        self.phi = potential(&gamma, self.lambda, &self.barriers);
        self.mu = mu;
        self.gamma = gamma;
        Ok(())
    }

    /// Pull the iterate back onto `Ax = b` if float drift accumulated; the
    /// correction is the minimum-norm one and is far below the step scale.
    fn repair_feasibility(&mut self) -> Result<(), IpmError> {
        let ax = self.a.matvec(&self.x);
        let rnorm: f64 = ax
            .iter()
            .zip(&self.b)
            .map(|(&p, &q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        let xnorm = sparse_core::norm2(&self.x);
        let bnorm = sparse_core::norm2(&self.b);
        if rnorm <= 1e-12 * (self.norm_a * xnorm + bnorm) {
            return Ok(());
        }
        if self.repair_factor.is_none() {
            let h = DiagonalBlockHessian::from_scalars(vec![1.0; self.a.ncols()])
                .map_err(|e| IpmError::Numeric { reason: e.to_string() })?;
            let f = factorize(&self.a, h, &self.tree).map_err(|_| IpmError::NotFullRowRank)?;
            self.repair_factor = Some(f);
        }
        let f = self.repair_factor.as_ref().unwrap();
        let resid: Vec<f64> = self.b.iter().zip(&ax).map(|(&q, &p)| q - p).collect();
        let y = f.solve_upper_dense(&f.solve_lower_dense(&resid));
        let aty = self.a.matvec_transpose(&y);
        for (xi, d) in self.x.iter_mut().zip(&aty) {
            *xi += d;
        }
        self.refresh()
    }
}

impl CenteringEngine for ExactEngine {
    fn sync_t(&mut self, t: f64) -> Result<f64, IpmError> {
        self.t = t;
        self.refresh()?;
        Ok(self.phi)
    }

    fn potential(&self) -> f64 {
        self.phi
    }

    fn t_bar(&self) -> f64 {
        self.t
    }

    fn step(&mut self) -> Result<StepReport, IpmError> {
        let n = self.barriers.len();
        let phi_before = self.phi;
        let (coeffs, _) = step_coefficients(&self.gamma, self.lambda, &self.barriers, self.alpha);
        // Per-block damping: a multiplier above 1 would overshoot the
        // center and amplify the error instead of contracting it. The
        // clamp is inactive at the conservative tolerance anchor (there
        // α·cᵢ ≤ αλ ≪ 1) and only tames the practical schedule.
        let delta_mu: Vec<f64> = (0..n)
            .map(|i| -(self.alpha * coeffs[i]).min(1.0) * self.mu[i])
            .collect();

        let h: Vec<f64> = (0..n).map(|i| self.barriers[i].hess(self.x[i])).collect();
        let hess = DiagonalBlockHessian::from_scalars(h.clone())
            .map_err(|e| IpmError::Numeric { reason: e.to_string() })?;
        let factor = factorize(&self.a, hess, &self.tree)
            .map_err(|e| IpmError::Numeric { reason: format!("step factorization: {e}") })?;

        // δ_x = H⁻¹(δ_μ − Aᵀy), δ_s = t̄·Aᵀy with y = (AH⁻¹Aᵀ)⁻¹AH⁻¹δ_μ:
        // the projection splitting of δ_μ into null(A) and range(Aᵀ) parts.
        let z: Vec<f64> = (0..n).map(|i| delta_mu[i] / h[i]).collect();
        let rhs = self.a.matvec(&z);
        let y = factor.solve_upper_dense(&factor.solve_lower_dense(&rhs));
        let aty = self.a.matvec_transpose(&y);
        let delta_x: Vec<f64> = (0..n).map(|i| z[i] - aty[i] / h[i]).collect();

        let step_norm_x = (0..n).map(|i| h[i] * delta_x[i] * delta_x[i]).sum::<f64>().sqrt();
        // The slack moves by t̄·Aᵀy, so its scaled local norm is ‖Aᵀy‖_{H⁻¹}.
        let step_norm_s = (0..n).map(|i| aty[i] * aty[i] / h[i]).sum::<f64>().sqrt();
        let a_dx = sparse_core::norm2(&self.a.matvec(&delta_x));
        let dx_norm = sparse_core::norm2(&delta_x);
        // Float noise scales with ‖z‖ (δ_x is a difference of z-sized
        // terms), so allow for it alongside the nominal relative bound.
        let z_norm = sparse_core::norm2(&z);
        assert!(
            a_dx <= 1e-9 * self.norm_a * dx_norm + 1e-11 * self.norm_a * z_norm + 1e-300,
            "projection residual too large: {a_dx:e}"
        );
        let cap = 9.0 / 8.0 * self.alpha * (1.0 + 1e-9);
        assert!(step_norm_x <= cap, "primal step {step_norm_x} exceeds bound {cap}");
        assert!(step_norm_s <= cap, "dual step {step_norm_s} exceeds bound {cap}");

        let x_new: Vec<f64> = (0..n).map(|i| self.x[i] + delta_x[i]).collect();
        if x_new
            .iter()
            .zip(&self.barriers)
            .any(|(&xi, blk)| !blk.contains(xi))
        {
            // Candidate left the domain: report a rejected step without
            // committing anything.
            self.prev = None;
            return Ok(StepReport {
                t_bar: self.t,
                phi_before,
                phi_after: f64::INFINITY,
                step_norm_x,
                step_norm_s,
            });
        }

        let u_new: Vec<f64> =
            self.u.iter().zip(&y).map(|(&ui, &yi)| ui + self.t * yi).collect();
        let prev_x = std::mem::replace(&mut self.x, x_new);
        let prev_u = std::mem::replace(&mut self.u, u_new);
        let prev_s = self.s_cur.clone();
        self.materialize_slack();
        let (mu_new, gamma_new) = gamma_mu(&self.x, &self.s_cur, self.t, &self.barriers)?;
        let phi_new = potential(&gamma_new, self.lambda, &self.barriers);
        self.prev = Some((
            prev_x,
            prev_u,
            prev_s,
            std::mem::replace(&mut self.mu, mu_new),
            std::mem::replace(&mut self.gamma, gamma_new),
            self.phi,
        ));
        self.phi = phi_new;
        self.accepted_steps += 1;
        if self.accepted_steps % 512 == 0 {
            self.repair_feasibility()?;
        }
        Ok(StepReport {
            t_bar: self.t,
            phi_before,
            phi_after: self.phi,
            step_norm_x,
            step_norm_s,
        })
    }

    fn supports_undo(&self) -> bool {
        true
    }

    fn undo_step(&mut self) {
        if let Some((x, u, s_cur, mu, gamma, phi)) = self.prev.take() {
            self.x = x;
            self.u = u;
            self.s_cur = s_cur;
            self.mu = mu;
            self.gamma = gamma;
            self.phi = phi;
        }
    }

    fn finish(&mut self) -> (Vec<f64>, Vec<f64>) {
        (self.x.clone(), self.s_cur.clone())
    }
}
