use crate::MsError;
use robust_ipm::{cosh_safe, gamma_mu, potential, sinh_safe, BarrierBlock};
use sparse_cholesky::{factorize, CholeskyFactor, DiagonalBlockHessian, HessianBlock, SparseVec};
use sparse_core::SparseMatrix;
use std::collections::{BTreeSet, HashMap};

/// What one anchor update touched.
///
/// `entries_changed` is the number of distinct stored entries written across
/// `x̂`, `c_x`, `coeffs`, `ε_x` and `ε_s` (the dual offset `ŝ` is never
/// written by an update). The per-array index lists let a caller that mirrors
/// these vectors into derived structures (sketches, samplers) resynchronize
/// exactly the entries that moved.
#[derive(Debug, Clone, Default)]
pub struct UpdateReport {
    /// Blocks whose anchor coordinates were replaced.
    pub changed_blocks: Vec<usize>,
    /// Distinct entries written across all maintained arrays.
    pub entries_changed: usize,
    /// Whether this call triggered the periodic full recompute (its writes
    /// are dense and amortized, not bounded by the sparse-update contract).
    pub rebuilt: bool,
    /// Indices written in `x̂`.
    pub touched_x_hat: Vec<usize>,
    /// Indices written in `c_x`.
    pub touched_c_x: Vec<usize>,
    /// Indices written in `coeffs`.
    pub touched_coeffs: Vec<usize>,
    /// Indices written in `ε_x`.
    pub touched_eps_x: Vec<usize>,
    /// Indices written in `ε_s`.
    pub touched_eps_s: Vec<usize>,
    /// Factor columns changed by the Hessian refresh, ascending.
    pub changed_factor_columns: Vec<usize>,
    /// Factor version before the update.
    pub factor_version_before: u64,
    /// Factor version after the update.
    pub factor_version_after: u64,
}

/// Implicitly maintained primal-dual pair.
///
/// The represented pair is
///
/// ```text
/// x = x̂ + H^{-1/2} β_x c_x − H^{-1} Aᵀ L⁻ᵀ (β_x·coeffs + ε_x)
/// s = ŝ +            Aᵀ L⁻ᵀ (β_s·coeffs + ε_s)
/// ```
///
/// with `H = diag(φᵢ''(x̄ᵢ))` and `L Lᵀ = A H⁻¹ Aᵀ`. The maintained
/// direction data satisfies, by construction and after every update:
///
/// 1. `ᾱ = α² Σⱼ wⱼ⁻¹ cosh²(λ γ̄ⱼ / wⱼ)`,
/// 2. `δ̄_μ,ᵢ = −α² · (sinh(λγ̄ᵢ/wᵢ)/γ̄ᵢ) · μ̄ᵢ`  (the `ᾱ^{1/2}`-scaled
///    centering direction; the block formula is local because the global
///    normalization cancels against the scale factor),
/// 3. `c_x = H^{-1/2} δ̄_μ`,
/// 4. `coeffs = L⁻¹ A H⁻¹ δ̄_μ`,
///
/// so one centering step is exactly `β_x += ᾱ^{-1/2}`, `β_s += t̄·ᾱ^{-1/2}`
/// — two scalar additions ([`Self::apply_step`]). Replacing a few anchor
/// coordinates rewrites only entries along the affected elimination-tree
/// root paths ([`Self::update`]), never the represented pair itself.
pub struct MultiscaleState {
    a: SparseMatrix,
    barriers: Vec<BarrierBlock>,
    lambda: f64,
    alpha: f64,

    // Anchor and quantities derived from it.
    x_bar: Vec<f64>,
    s_bar: Vec<f64>,
    t_bar: f64,
    gamma_bar: Vec<f64>,
    mu_bar: Vec<f64>,
    /// Barrier Hessian diagonal `φᵢ''(x̄ᵢ)`, mirrored from the factor.
    hess: Vec<f64>,
    factor: CholeskyFactor,

    // Representation.
    x_hat: Vec<f64>,
    s_hat: Vec<f64>,
    c_x: Vec<f64>,
    eps_x: Vec<f64>,
    eps_s: Vec<f64>,
    beta_x: f64,
    beta_s: f64,
    coeffs: Vec<f64>,
    alpha_bar: f64,
    delta_mu_bar: Vec<f64>,

    updates_since_rebuild: usize,
    poisoned: bool,
}

/// Updates between periodic dense recomputes of the direction data; washes
/// out incremental float drift long before it approaches test tolerances.
const REBUILD_PERIOD: usize = 1 << 12;

/// `sinh(λγ/w)/γ` with its `γ → 0` limit `λ/w`, switched at the same
/// threshold as the step-coefficient evaluation so the two agree bitwise.
fn sinh_ratio(lambda: f64, w: f64, gamma: f64) -> f64 {
    let arg = lambda * gamma / w;
    if arg < 1e-8 {
        lambda / w
    } else {
        sinh_safe(arg) / gamma
    }
}

/// `α² Σⱼ wⱼ⁻¹ cosh²(λγⱼ/wⱼ)`, the squared step normalization.
fn scale_factor(gamma: &[f64], lambda: f64, alpha: f64, barriers: &[BarrierBlock]) -> f64 {
    let sum: f64 = gamma
        .iter()
        .zip(barriers)
        .map(|(&g, b)| {
            let ch = cosh_safe(lambda * g / b.weight()).min(1e150);
            ch * ch / b.weight()
        })
        .sum();
    alpha * alpha * sum
}

fn delta_mu_entry(lambda: f64, alpha: f64, w: f64, gamma: f64, mu: f64) -> f64 {
    -alpha * alpha * sinh_ratio(lambda, w, gamma) * mu
}

/// `Lᵀ z = g` solved on the root path of `lowv` only (the path principal
/// submatrix is exact for entries on the path), against the live columns or
/// a historical version, with `g` read lazily so only path entries of the
/// virtual right-hand side are ever materialized.
fn path_transpose_solve(
    factor: &CholeskyFactor,
    version: Option<u64>,
    g: &dyn Fn(usize) -> f64,
    lowv: usize,
) -> Result<(Vec<usize>, Vec<f64>), MsError> {
    let path = factor.column_rows(lowv).to_vec();
    let mut z = vec![0.0; path.len()];
    for k in (0..path.len()).rev() {
        let j = path[k];
        let col: &[f64] = match version {
            None => factor.column_values(j),
            Some(v) => factor.historical_column(j, v)?,
        };
        let mut acc = g(j);
        for k2 in (k + 1)..path.len() {
            acc -= col[k2 - k] * z[k2];
        }
        z[k] = acc / col[0];
    }
    Ok((path, z))
}

impl MultiscaleState {
    /// Builds the implicit pair `(x, s)` anchored at `(x̄, s̄, t̄)`.
    ///
    /// `a` must be in scalar-block form (one column per block) with every
    /// column's row pattern on one elimination-tree root path, and the tree
    /// order must be the identity — the same preconditions as the sparse
    /// factorization. Immediately after construction the representation
    /// reproduces `(x, s)` exactly: `x̂ = x`, `ŝ = s`, `β = ε = 0`.
    #[allow(clippy::too_many_arguments)]
    pub fn initialize(
        a: &SparseMatrix,
        barriers: &[BarrierBlock],
        tree: &elim_tree::EliminationTree,
        lambda: f64,
        alpha: f64,
        x: &[f64],
        s: &[f64],
        x_bar: &[f64],
        s_bar: &[f64],
        t_bar: f64,
    ) -> Result<Self, MsError> {
        let n = a.ncols();
        if a.nblocks() != n {
            return Err(MsError::Dimension { reason: "matrix must have scalar blocks" });
        }
        if barriers.len() != n
            || x.len() != n
            || s.len() != n
            || x_bar.len() != n
            || s_bar.len() != n
        {
            return Err(MsError::Dimension { reason: "vector lengths disagree with columns" });
        }
        if !(t_bar.is_finite() && t_bar > 0.0) {
            return Err(MsError::Dimension { reason: "path parameter must be positive" });
        }
        for (i, blk) in barriers.iter().enumerate() {
            if !blk.contains(x_bar[i]) {
                return Err(MsError::NotInterior { block: i });
            }
        }

        let (mu_bar, gamma_bar) = gamma_mu(x_bar, s_bar, t_bar, barriers)
            .map_err(|_| MsError::Dimension { reason: "anchor rejected by barrier" })?;
        let hess: Vec<f64> = x_bar
            .iter()
            .zip(barriers)
            .map(|(&xi, b)| b.hess(xi))
            .collect();
        let factor = factorize(a, DiagonalBlockHessian::from_scalars(hess.clone())?, tree)?;

        let alpha_bar = scale_factor(&gamma_bar, lambda, alpha, barriers);
        let delta_mu_bar: Vec<f64> = (0..n)
            .map(|i| delta_mu_entry(lambda, alpha, barriers[i].weight(), gamma_bar[i], mu_bar[i]))
            .collect();
        let c_x: Vec<f64> = (0..n).map(|i| delta_mu_bar[i] / hess[i].sqrt()).collect();
        let hinv_delta: Vec<f64> = (0..n).map(|i| delta_mu_bar[i] / hess[i]).collect();
        let coeffs = factor.solve_lower_dense(&a.matvec(&hinv_delta));
        let d = a.nrows();

        Ok(MultiscaleState {
            a: a.clone(),
            barriers: barriers.to_vec(),
            lambda,
            alpha,
            x_bar: x_bar.to_vec(),
            s_bar: s_bar.to_vec(),
            t_bar,
            gamma_bar,
            mu_bar,
            hess,
            factor,
            x_hat: x.to_vec(),
            s_hat: s.to_vec(),
            c_x,
            eps_x: vec![0.0; d],
            eps_s: vec![0.0; d],
            beta_x: 0.0,
            beta_s: 0.0,
            coeffs,
            alpha_bar,
            delta_mu_bar,
            updates_since_rebuild: 0,
            poisoned: false,
        })
    }

    fn assert_live(&self) {
        assert!(!self.poisoned, "implicit state used after a failed update");
    }

    /// Applies one centering step to the implicit pair: the represented
    /// `(x, s)` move by the full correction computed at the current anchor.
    /// Only the two scalars `β_x, β_s` change.
    pub fn apply_step(&mut self) {
        self.apply_step_scaled(1.0);
    }

    /// [`Self::apply_step`] scaled by `theta`: the pair moves by `theta`
    /// times the anchor correction. Aggressive schedules damp with
    /// `theta < 1` when the undamped per-block multiplier would overshoot.
    pub fn apply_step_scaled(&mut self, theta: f64) {
        self.assert_live();
        let k = theta / self.alpha_bar.sqrt();
        self.beta_x += k;
        self.beta_s += self.t_bar * k;
    }

    /// Materializes the represented pair `(x, s)`.
    pub fn output(&self) -> (Vec<f64>, Vec<f64>) {
        self.assert_live();
        let n = self.a.ncols();
        let d = self.a.nrows();
        let gx: Vec<f64> =
            (0..d).map(|r| self.beta_x * self.coeffs[r] + self.eps_x[r]).collect();
        let gs: Vec<f64> =
            (0..d).map(|r| self.beta_s * self.coeffs[r] + self.eps_s[r]).collect();
        let wx = self.a.matvec_transpose(&self.factor.solve_upper_dense(&gx));
        let ws = self.a.matvec_transpose(&self.factor.solve_upper_dense(&gs));
        let x: Vec<f64> = (0..n)
            .map(|i| {
                self.x_hat[i] + self.beta_x * self.c_x[i] / self.hess[i].sqrt()
                    - wx[i] / self.hess[i]
            })
            .collect();
        let s: Vec<f64> = (0..n).map(|i| self.s_hat[i] + ws[i]).collect();
        (x, s)
    }

    /// One coordinate `(xᵢ, sᵢ)` of the represented pair, touching only the
    /// root paths of the rows supporting column `i` (plus the column
    /// itself), never a dense vector.
    pub fn entry(&self, i: usize) -> (f64, f64) {
        self.assert_live();
        let mut corr_x = 0.0;
        let mut corr_s = 0.0;
        for (&r, &av) in self.a.col_rows(i).iter().zip(self.a.col_values(i)) {
            // (L⁻ᵀ g)_r = (L⁻¹ e_r)ᵀ g, supported on the root path of r.
            let (rows, vals) = self.factor.solve_lower(&(vec![r], vec![1.0]));
            let mut zx = 0.0;
            let mut zs = 0.0;
            for (&row, &v) in rows.iter().zip(&vals) {
                zx += v * (self.beta_x * self.coeffs[row] + self.eps_x[row]);
                zs += v * (self.beta_s * self.coeffs[row] + self.eps_s[row]);
            }
            corr_x += av * zx;
            corr_s += av * zs;
        }
        let h = self.hess[i];
        (
            self.x_hat[i] + self.beta_x * self.c_x[i] / h.sqrt() - corr_x / h,
            self.s_hat[i] + corr_s,
        )
    }

    /// Replaces the anchor coordinates that differ in `(x̄_new, s̄_new)` and
    /// refreshes the Hessian, the factor and the direction data, without
    /// changing the represented pair.
    ///
    /// Writes are confined to the changed blocks and the elimination-tree
    /// root paths above them; the report counts and lists them. On a factor
    /// failure the state is poisoned and must be discarded.
    pub fn update(&mut self, x_bar_new: &[f64], s_bar_new: &[f64]) -> Result<UpdateReport, MsError> {
        self.assert_live();
        let n = self.a.ncols();
        if x_bar_new.len() != n || s_bar_new.len() != n {
            return Err(MsError::Dimension { reason: "anchor lengths disagree with columns" });
        }
        let changed: Vec<usize> = (0..n)
            .filter(|&i| {
                x_bar_new[i].to_bits() != self.x_bar[i].to_bits()
                    || s_bar_new[i].to_bits() != self.s_bar[i].to_bits()
            })
            .collect();
        let mut report = UpdateReport {
            factor_version_before: self.factor.version(),
            factor_version_after: self.factor.version(),
            ..UpdateReport::default()
        };
        if changed.is_empty() {
            return Ok(report);
        }
        for &i in &changed {
            if !self.barriers[i].contains(x_bar_new[i]) {
                return Err(MsError::NotInterior { block: i });
            }
        }
        report.changed_blocks = changed.clone();
        let version_before = self.factor.version();

        let mut touched_x_hat = BTreeSet::new();
        let mut touched_c_x = BTreeSet::new();
        let mut touched_coeffs = BTreeSet::new();
        let mut touched_eps_x = BTreeSet::new();
        let mut touched_eps_s = BTreeSet::new();

        // New per-block anchor data.
        struct BlockChange {
            i: usize,
            h_new: f64,
            mu_new: f64,
            gamma_new: f64,
            delta_new: f64,
        }
        let blocks: Vec<BlockChange> = changed
            .iter()
            .map(|&i| {
                let b = &self.barriers[i];
                let h_new = b.hess(x_bar_new[i]);
                let mu_new = s_bar_new[i] / self.t_bar + b.weight() * b.grad(x_bar_new[i]);
                let gamma_new = mu_new.abs() / h_new.sqrt();
                let delta_new =
                    delta_mu_entry(self.lambda, self.alpha, b.weight(), gamma_new, mu_new);
                BlockChange { i, h_new, mu_new, gamma_new, delta_new }
            })
            .collect();

        // Direction refresh at the old factor: fold the changed blocks'
        // contribution into coeffs, compensate ε so the combination
        // β·coeffs + ε (and with it the whole correction term) is
        // untouched, and absorb the per-block H and c_x jumps into x̂.
        // The dual offset ŝ needs no compensation: the Hessian cancels out
        // of the dual correction term entirely.
        let mut hat_comp = Vec::with_capacity(blocks.len());
        for bc in &blocks {
            let i = bc.i;
            let pat = self.a.col_rows(i);
            let corr_x = if pat.is_empty() {
                0.0
            } else {
                let (rows, z) = path_transpose_solve(
                    &self.factor,
                    None,
                    &|j| self.beta_x * self.coeffs[j] + self.eps_x[j],
                    pat[0],
                )?;
                let mut zmap = HashMap::with_capacity(rows.len());
                for (&r, &v) in rows.iter().zip(&z) {
                    zmap.insert(r, v);
                }
                pat.iter()
                    .zip(self.a.col_values(i))
                    .map(|(&r, &av)| av * zmap[&r])
                    .sum()
            };
            // Old and new values of this block's explicit terms
            // `β_x·c_x/√h − corr/h`; their difference folds into x̂.
            let h_old = self.hess[i];
            hat_comp.push(
                self.beta_x * (self.c_x[i] / h_old.sqrt() - bc.delta_new / bc.h_new)
                    - corr_x * (1.0 / h_old - 1.0 / bc.h_new),
            );
        }
        // The c_x jump above needs the new value; write it now, then apply
        // the accumulated x̂ compensation.
        let mut delta_v: Vec<(usize, f64)> = Vec::with_capacity(blocks.len());
        for (bc, comp) in blocks.iter().zip(&hat_comp) {
            let i = bc.i;
            let w = self.barriers[i].weight();
            delta_v.push((i, bc.delta_new / bc.h_new - self.delta_mu_bar[i] / self.hess[i]));
            let ch_old = cosh_safe(self.lambda * self.gamma_bar[i] / w).min(1e150);
            let ch_new = cosh_safe(self.lambda * bc.gamma_new / w).min(1e150);
            self.alpha_bar += self.alpha * self.alpha * (ch_new * ch_new - ch_old * ch_old) / w;
            self.x_hat[i] += comp;
            touched_x_hat.insert(i);
            self.c_x[i] = bc.delta_new / bc.h_new.sqrt();
            touched_c_x.insert(i);
            self.delta_mu_bar[i] = bc.delta_new;
            self.gamma_bar[i] = bc.gamma_new;
            self.mu_bar[i] = bc.mu_new;
        }

        // coeffs += L⁻¹ A Δ(H⁻¹δ̄_μ), ε ∓ β·(the same), still at the old
        // factor, so the correction term is preserved exactly.
        let mut rhs: HashMap<usize, f64> = HashMap::new();
        for &(i, dv) in &delta_v {
            if dv == 0.0 {
                continue;
            }
            for (&r, &av) in self.a.col_rows(i).iter().zip(self.a.col_values(i)) {
                *rhs.entry(r).or_insert(0.0) += av * dv;
            }
        }
        let (reach, vals) = self.factor.solve_lower(&to_sparse_vec(rhs));
        for (&r, &v) in reach.iter().zip(&vals) {
            if v == 0.0 {
                continue;
            }
            self.coeffs[r] += v;
            self.eps_x[r] -= self.beta_x * v;
            self.eps_s[r] -= self.beta_s * v;
            touched_coeffs.insert(r);
            touched_eps_x.insert(r);
            touched_eps_s.insert(r);
        }

        // Factor refresh: one signed rank-one pair per block whose Hessian
        // entry actually moved.
        let mut changed_cols = BTreeSet::new();
        for bc in &blocks {
            if bc.h_new.to_bits() == self.hess[bc.i].to_bits() {
                continue;
            }
            match self.factor.update_hessian_block(&self.a, bc.i, HessianBlock::Scalar(bc.h_new)) {
                Ok(cols) => changed_cols.extend(cols),
                Err(e) => {
                    self.poisoned = true;
                    return Err(MsError::Factor(e));
                }
            }
            self.hess[bc.i] = bc.h_new;
        }

        if !changed_cols.is_empty() {
            // Factor swap: transfer ε across the column changes so the
            // correction term solved against the new factor reproduces the
            // one solved against the old, then re-solve the coefficient
            // tail against the new columns and compensate ε once more.
            let mut zx: HashMap<usize, f64> = HashMap::new();
            let mut zs: HashMap<usize, f64> = HashMap::new();
            for bc in &blocks {
                let pat = self.a.col_rows(bc.i);
                if pat.is_empty() {
                    continue;
                }
                let (rows, vx) = path_transpose_solve(
                    &self.factor,
                    Some(version_before),
                    &|j| self.beta_x * self.coeffs[j] + self.eps_x[j],
                    pat[0],
                )?;
                let (_, vs) = path_transpose_solve(
                    &self.factor,
                    Some(version_before),
                    &|j| self.beta_s * self.coeffs[j] + self.eps_s[j],
                    pat[0],
                )?;
                for ((&r, &x), &s) in rows.iter().zip(&vx).zip(&vs) {
                    zx.insert(r, x);
                    zs.insert(r, s);
                }
            }
            let mut dl_coeffs: HashMap<usize, f64> = HashMap::new();
            for &c in &changed_cols {
                let rows = self.factor.column_rows(c);
                let cur = self.factor.column_values(c).to_vec();
                let old = self.factor.historical_column(c, version_before)?.to_vec();
                let mut tx = 0.0;
                let mut ts = 0.0;
                for (k, &r) in rows.iter().enumerate() {
                    let dl = cur[k] - old[k];
                    if dl == 0.0 {
                        continue;
                    }
                    tx += dl * zx[&r];
                    ts += dl * zs[&r];
                    *dl_coeffs.entry(r).or_insert(0.0) += dl * self.coeffs[c];
                }
                if tx != 0.0 || ts != 0.0 {
                    self.eps_x[c] += tx;
                    self.eps_s[c] += ts;
                    touched_eps_x.insert(c);
                    touched_eps_s.insert(c);
                }
            }
            let (reach2, vals2) = self.factor.solve_lower(&to_sparse_vec(dl_coeffs));
            for (&r, &v) in reach2.iter().zip(&vals2) {
                if v == 0.0 {
                    continue;
                }
                self.coeffs[r] -= v;
                self.eps_x[r] += self.beta_x * v;
                self.eps_s[r] += self.beta_s * v;
                touched_coeffs.insert(r);
                touched_eps_x.insert(r);
                touched_eps_s.insert(r);
            }
        }

        for &i in &changed {
            self.x_bar[i] = x_bar_new[i];
            self.s_bar[i] = s_bar_new[i];
        }

        report.changed_factor_columns = changed_cols.into_iter().collect();
        report.factor_version_after = self.factor.version();
        report.entries_changed = touched_x_hat.len()
            + touched_c_x.len()
            + touched_coeffs.len()
            + touched_eps_x.len()
            + touched_eps_s.len();
        report.touched_x_hat = touched_x_hat.into_iter().collect();
        report.touched_c_x = touched_c_x.into_iter().collect();
        report.touched_coeffs = touched_coeffs.into_iter().collect();
        report.touched_eps_x = touched_eps_x.into_iter().collect();
        report.touched_eps_s = touched_eps_s.into_iter().collect();

        self.updates_since_rebuild += 1;
        if self.updates_since_rebuild >= REBUILD_PERIOD {
            self.full_rebuild(&mut report);
        }
        Ok(report)
    }

    /// Replaces the cached path parameter with `t_new` and recomputes every
    /// direction quantity at the new value, compensating so the represented
    /// pair is unchanged. Dense in the direction data (`O(n·height)`), but
    /// never touches the Hessian or the factor.
    pub fn refresh_t(&mut self, t_new: f64) -> Result<UpdateReport, MsError> {
        self.assert_live();
        if !(t_new.is_finite() && t_new > 0.0) {
            return Err(MsError::Dimension { reason: "path parameter must be positive" });
        }
        self.t_bar = t_new;
        let mut report = UpdateReport {
            factor_version_before: self.factor.version(),
            factor_version_after: self.factor.version(),
            ..UpdateReport::default()
        };
        self.full_rebuild(&mut report);
        Ok(report)
    }

    /// Dense recompute of `γ̄, μ̄, δ̄_μ, ᾱ, c_x, coeffs` from the anchor,
    /// with x̂/ε compensation keeping the represented pair fixed. The
    /// Hessian and factor are exact already and are left alone.
    fn full_rebuild(&mut self, report: &mut UpdateReport) {
        let n = self.a.ncols();
        let d = self.a.nrows();
        let (mu, gamma) = gamma_mu(&self.x_bar, &self.s_bar, self.t_bar, &self.barriers)
            .expect("anchor was checked interior");
        self.alpha_bar = scale_factor(&gamma, self.lambda, self.alpha, &self.barriers);
        for i in 0..n {
            let delta_new =
                delta_mu_entry(self.lambda, self.alpha, self.barriers[i].weight(), gamma[i], mu[i]);
            let c_new = delta_new / self.hess[i].sqrt();
            self.x_hat[i] += self.beta_x * (self.c_x[i] - c_new) / self.hess[i].sqrt();
            self.c_x[i] = c_new;
            self.delta_mu_bar[i] = delta_new;
        }
        self.gamma_bar = gamma;
        self.mu_bar = mu;
        let hinv_delta: Vec<f64> = (0..n).map(|i| self.delta_mu_bar[i] / self.hess[i]).collect();
        let coeffs_new = self.factor.solve_lower_dense(&self.a.matvec(&hinv_delta));
        for r in 0..d {
            let dc = coeffs_new[r] - self.coeffs[r];
            self.eps_x[r] -= self.beta_x * dc;
            self.eps_s[r] -= self.beta_s * dc;
        }
        self.coeffs = coeffs_new;
        self.updates_since_rebuild = 0;

        report.rebuilt = true;
        report.touched_x_hat = (0..n).collect();
        report.touched_c_x = (0..n).collect();
        report.touched_coeffs = (0..d).collect();
        report.touched_eps_x = (0..d).collect();
        report.touched_eps_s = (0..d).collect();
        report.entries_changed = 2 * n + 3 * d;
    }

    /// Largest relative deviation of the maintained direction data from a
    /// fresh dense recomputation — the on-demand check of the four stored
    /// relations. Zero up to float drift on a healthy state.
    pub fn invariant_residual(&self) -> f64 {
        self.assert_live();
        let n = self.a.ncols();
        let (mu, gamma) =
            gamma_mu(&self.x_bar, &self.s_bar, self.t_bar, &self.barriers).expect("anchor interior");
        let abar = scale_factor(&gamma, self.lambda, self.alpha, &self.barriers);
        let mut worst: f64 = (self.alpha_bar - abar).abs() / abar.max(1e-300);
        let mut delta_scale: f64 = 1e-300;
        for i in 0..n {
            let fresh =
                delta_mu_entry(self.lambda, self.alpha, self.barriers[i].weight(), gamma[i], mu[i]);
            delta_scale = delta_scale.max(fresh.abs());
            worst = worst.max((self.delta_mu_bar[i] - fresh).abs());
            worst = worst.max((self.c_x[i] - fresh / self.hess[i].sqrt()).abs());
        }
        let hinv_delta: Vec<f64> = (0..n).map(|i| self.delta_mu_bar[i] / self.hess[i]).collect();
        let coeffs = self.factor.solve_lower_dense(&self.a.matvec(&hinv_delta));
        for (have, want) in self.coeffs.iter().zip(&coeffs) {
            worst = worst.max((have - want).abs());
        }
        worst / delta_scale.max(1.0)
    }

    /// Number of variables (= barrier blocks).
    pub fn nvars(&self) -> usize {
        self.a.ncols()
    }

    /// The cached path parameter t̄.
    pub fn t_bar(&self) -> f64 {
        self.t_bar
    }

    /// The primal anchor x̄.
    pub fn x_bar(&self) -> &[f64] {
        &self.x_bar
    }

    /// The dual anchor s̄.
    pub fn s_bar(&self) -> &[f64] {
        &self.s_bar
    }

    /// Per-block centering errors `γ̄` at the anchor.
    pub fn gamma_bar(&self) -> &[f64] {
        &self.gamma_bar
    }

    /// Per-block error vectors `μ̄` at the anchor.
    pub fn mu_bar(&self) -> &[f64] {
        &self.mu_bar
    }

    /// Squared step normalization `ᾱ`.
    pub fn alpha_bar(&self) -> f64 {
        self.alpha_bar
    }

    /// Primal step accumulator `β_x`.
    pub fn beta_x(&self) -> f64 {
        self.beta_x
    }

    /// Dual step accumulator `β_s`.
    pub fn beta_s(&self) -> f64 {
        self.beta_s
    }

    /// Shared direction coefficients (the triangular-solve image of the
    /// centering direction).
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Primal correction offset `ε_x`.
    pub fn eps_x(&self) -> &[f64] {
        &self.eps_x
    }

    /// Dual correction offset `ε_s`.
    pub fn eps_s(&self) -> &[f64] {
        &self.eps_s
    }

    /// Whitened centering direction `c_x`.
    pub fn c_x(&self) -> &[f64] {
        &self.c_x
    }

    /// Primal dense offset x̂.
    pub fn x_hat(&self) -> &[f64] {
        &self.x_hat
    }

    /// Dual dense offset ŝ.
    pub fn s_hat(&self) -> &[f64] {
        &self.s_hat
    }

    /// Scaled centering direction `δ̄_μ`.
    pub fn delta_mu_bar(&self) -> &[f64] {
        &self.delta_mu_bar
    }

    /// Barrier Hessian diagonal at the anchor.
    pub fn hessian_scalars(&self) -> &[f64] {
        &self.hess
    }

    /// The maintained Cholesky factor of `A H⁻¹ Aᵀ`.
    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }

    /// The constraint matrix.
    pub fn matrix(&self) -> &SparseMatrix {
        &self.a
    }

    /// The barrier blocks.
    pub fn barriers(&self) -> &[BarrierBlock] {
        &self.barriers
    }

    /// Potential `Σᵢ cosh(λγ̄ᵢ/wᵢ)` measured at the anchor.
    pub fn anchor_potential(&self) -> f64 {
        potential(&self.gamma_bar, self.lambda, &self.barriers)
    }
}

fn to_sparse_vec(map: HashMap<usize, f64>) -> SparseVec {
    let mut pairs: Vec<(usize, f64)> = map.into_iter().filter(|&(_, v)| v != 0.0).collect();
    pairs.sort_unstable_by_key(|&(i, _)| i);
    (pairs.iter().map(|&(i, _)| i).collect(), pairs.into_iter().map(|(_, v)| v).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use elim_tree::EliminationTree;
    use robust_ipm::step_coefficients;
    use sparse_core::build_csc;

    /// Five variables over a three-row path tree (0 → 1 → 2): three
    /// "diagonal" columns plus two columns coupling along root paths.
    fn fixture() -> (SparseMatrix, Vec<BarrierBlock>, EliminationTree) {
        let tree =
            EliminationTree::from_parent_and_order(vec![1, 2, usize::MAX], vec![0, 1, 2]).unwrap();
        let triplets = vec![
            (0, 0, 1.5),
            (1, 1, -1.2),
            (2, 2, 0.9),
            (0, 3, 0.7),
            (1, 3, -0.4),
            (1, 4, 0.6),
            (2, 4, 1.1),
        ];
        let a = build_csc(3, 5, &triplets, None).unwrap();
        let barriers = vec![
            BarrierBlock::interval(-1.0, 1.0),
            BarrierBlock::interval(0.0, 2.0),
            BarrierBlock::interval(-2.0, 0.5),
            BarrierBlock::interval(-1.5, 1.5),
            BarrierBlock::interval(-0.5, 3.0),
        ];
        (a, barriers, tree)
    }

    fn fixture_state() -> MultiscaleState {
        let (a, barriers, tree) = fixture();
        let x = vec![0.2, 1.1, -0.7, 0.3, 0.8];
        let s = vec![0.4, -0.2, 0.1, 0.5, -0.3];
        let x_bar = vec![0.25, 1.05, -0.65, 0.35, 0.75];
        let s_bar = vec![0.35, -0.25, 0.15, 0.45, -0.25];
        MultiscaleState::initialize(&a, &barriers, &tree, 8.0, 0.1, &x, &s, &x_bar, &s_bar, 1.3)
            .unwrap()
    }

    #[test]
    fn initialize_reproduces_inputs() {
        let st = fixture_state();
        let (x, s) = st.output();
        let want_x = [0.2, 1.1, -0.7, 0.3, 0.8];
        let want_s = [0.4, -0.2, 0.1, 0.5, -0.3];
        for i in 0..5 {
            assert!((x[i] - want_x[i]).abs() <= 1e-12);
            assert!((s[i] - want_s[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn scale_factor_matches_step_normalization() {
        let st = fixture_state();
        let (_, abar) = step_coefficients(st.gamma_bar(), 8.0, st.barriers(), 0.1);
        assert_eq!(st.alpha_bar(), abar);
    }

    #[test]
    fn scale_factor_at_center_is_block_count_times_alpha_squared() {
        let (a, barriers, tree) = fixture();
        let t = 2.0;
        // s̄ = −t·w·φ'(x̄) makes every μ̄ᵢ vanish.
        let x_bar = vec![0.1, 0.9, -0.8, 0.0, 1.2];
        let s_bar: Vec<f64> = x_bar
            .iter()
            .zip(&barriers)
            .map(|(&xi, b)| -t * b.weight() * b.grad(xi))
            .collect();
        let alpha = 0.25;
        let st = MultiscaleState::initialize(
            &a, &barriers, &tree, 8.0, alpha, &x_bar, &s_bar, &x_bar, &s_bar, t,
        )
        .unwrap();
        let m = barriers.len() as f64;
        assert!((st.alpha_bar() - m * alpha * alpha).abs() <= 1e-12 * m);
        assert!(st.delta_mu_bar().iter().all(|&v| v.abs() <= 1e-15));
    }

    #[test]
    fn coefficients_match_dense_triangular_oracle() {
        let st = fixture_state();
        // Dense L⁻¹ A H⁻¹ δ̄_μ.
        let l = st.factor().to_dense();
        let n = st.nvars();
        let hinv: Vec<f64> = (0..n).map(|i| st.delta_mu_bar()[i] / st.hessian_scalars()[i]).collect();
        let rhs = st.matrix().matvec(&hinv);
        let d = rhs.len();
        let mut want = vec![0.0; d];
        for r in 0..d {
            let mut acc = rhs[r];
            for j in 0..r {
                acc -= l[r][j] * want[j];
            }
            want[r] = acc / l[r][r];
        }
        for r in 0..d {
            assert!(
                (st.coeffs()[r] - want[r]).abs() <= 1e-12 * (1.0 + want[r].abs()),
                "coefficient {r} disagrees with the dense solve"
            );
        }
    }

    #[test]
    fn step_with_zero_direction_changes_nothing() {
        let (a, barriers, tree) = fixture();
        let t = 2.0;
        let x_bar = vec![0.1, 0.9, -0.8, 0.0, 1.2];
        let s_bar: Vec<f64> = x_bar
            .iter()
            .zip(&barriers)
            .map(|(&xi, b)| -t * b.weight() * b.grad(xi))
            .collect();
        let mut st = MultiscaleState::initialize(
            &a, &barriers, &tree, 8.0, 0.1, &x_bar, &s_bar, &x_bar, &s_bar, t,
        )
        .unwrap();
        st.apply_step();
        st.apply_step();
        let (x, s) = st.output();
        for i in 0..5 {
            assert!((x[i] - x_bar[i]).abs() <= 1e-12);
            assert!((s[i] - s_bar[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn second_step_doubles_the_displacement() {
        let mut st = fixture_state();
        let (x0, s0) = st.output();
        st.apply_step();
        let (x1, s1) = st.output();
        st.apply_step();
        let (x2, s2) = st.output();
        for i in 0..st.nvars() {
            let d1 = x1[i] - x0[i];
            let d2 = x2[i] - x0[i];
            assert!((d2 - 2.0 * d1).abs() <= 1e-12 * (1.0 + d1.abs()), "variable {i}");
            let e1 = s1[i] - s0[i];
            let e2 = s2[i] - s0[i];
            assert!((e2 - 2.0 * e1).abs() <= 1e-12 * (1.0 + e1.abs()), "slack {i}");
        }
    }

    #[test]
    fn scaled_step_is_a_fraction_of_the_full_step() {
        let mut st = fixture_state();
        let (x0, _) = st.output();
        st.apply_step_scaled(0.25);
        let (xq, _) = st.output();
        st.apply_step_scaled(0.75);
        let (x1, _) = st.output();
        for i in 0..st.nvars() {
            let dq = xq[i] - x0[i];
            let d1 = x1[i] - x0[i];
            assert!((4.0 * dq - d1).abs() <= 1e-12 * (1.0 + d1.abs()));
        }
    }

    #[test]
    fn entry_matches_full_output() {
        let mut st = fixture_state();
        st.apply_step();
        let up_x: Vec<f64> =
            st.x_bar().iter().map(|&v| v + 0.01).collect();
        st.update(&up_x, &st.s_bar().to_vec()).unwrap();
        st.apply_step();
        let (x, s) = st.output();
        for i in 0..st.nvars() {
            let (xi, si) = st.entry(i);
            assert!((xi - x[i]).abs() <= 1e-10 * (1.0 + x[i].abs()), "x entry {i}");
            assert!((si - s[i]).abs() <= 1e-10 * (1.0 + s[i].abs()), "s entry {i}");
        }
    }

    #[test]
    fn entry_before_any_step_reads_the_offsets() {
        let st = fixture_state();
        for i in 0..st.nvars() {
            let (xi, si) = st.entry(i);
            assert_eq!(xi, st.x_hat()[i]);
            assert_eq!(si, st.s_hat()[i]);
        }
    }

    #[test]
    fn noop_update_touches_nothing() {
        let mut st = fixture_state();
        st.apply_step();
        let r = st.update(&st.x_bar().to_vec(), &st.s_bar().to_vec()).unwrap();
        assert_eq!(r.entries_changed, 0);
        assert!(r.changed_blocks.is_empty());
        assert!(r.changed_factor_columns.is_empty());
        assert_eq!(r.factor_version_before, r.factor_version_after);
    }

    #[test]
    fn update_rejects_boundary_anchor() {
        let mut st = fixture_state();
        let mut bad = st.x_bar().to_vec();
        bad[0] = 1.0; // right on the upper bound of block 0
        let err = st.update(&bad, &st.s_bar().to_vec()).unwrap_err();
        assert_eq!(err, MsError::NotInterior { block: 0 });
        // Rejected before any mutation: still usable.
        let _ = st.output();
    }

    #[test]
    fn path_parameter_refresh_preserves_the_pair() {
        let mut st = fixture_state();
        st.apply_step();
        st.apply_step();
        let (x0, s0) = st.output();
        let r = st.refresh_t(0.9).unwrap();
        assert!(r.rebuilt);
        assert_eq!(st.t_bar(), 0.9);
        let (x1, s1) = st.output();
        for i in 0..st.nvars() {
            assert!((x0[i] - x1[i]).abs() <= 1e-11 * (1.0 + x0[i].abs()));
            assert!((s0[i] - s1[i]).abs() <= 1e-11 * (1.0 + s0[i].abs()));
        }
        assert!(st.invariant_residual() <= 1e-12);
    }

    #[test]
    fn fresh_state_has_zero_invariant_residual() {
        let st = fixture_state();
        assert!(st.invariant_residual() <= 1e-13);
    }
}
