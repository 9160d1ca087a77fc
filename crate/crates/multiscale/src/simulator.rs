use crate::MsError;
use robust_ipm::{gamma_mu, step_coefficients, BarrierBlock};
use sparse_core::SparseMatrix;

/// Dense, recompute-everything implementation of the implicit-pair
/// operations, used to cross-check [`crate::MultiscaleState`].
///
/// It stores `(x, s)` explicitly and evaluates each step correction from
/// scratch at the anchor with a dense normal-matrix solve, so any
/// disagreement with the incremental structure localizes a bookkeeping bug
/// there. Only suitable for small instances.
pub struct ReferenceSimulator {
    a: SparseMatrix,
    barriers: Vec<BarrierBlock>,
    lambda: f64,
    alpha: f64,
    x: Vec<f64>,
    s: Vec<f64>,
    x_bar: Vec<f64>,
    s_bar: Vec<f64>,
    t_bar: f64,
}

impl ReferenceSimulator {
    /// Mirrors [`crate::MultiscaleState::initialize`].
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a: &SparseMatrix,
        barriers: &[BarrierBlock],
        lambda: f64,
        alpha: f64,
        x: &[f64],
        s: &[f64],
        x_bar: &[f64],
        s_bar: &[f64],
        t_bar: f64,
    ) -> Result<Self, MsError> {
        for (i, blk) in barriers.iter().enumerate() {
            if !blk.contains(x_bar[i]) {
                return Err(MsError::NotInterior { block: i });
            }
        }
        Ok(ReferenceSimulator {
            a: a.clone(),
            barriers: barriers.to_vec(),
            lambda,
            alpha,
            x: x.to_vec(),
            s: s.to_vec(),
            x_bar: x_bar.to_vec(),
            s_bar: s_bar.to_vec(),
            t_bar,
        })
    }

    /// One full centering step computed densely at the anchor.
    pub fn apply_step(&mut self) {
        self.apply_step_scaled(1.0);
    }

    /// A step scaled by `theta`, matching
    /// [`crate::MultiscaleState::apply_step_scaled`].
    pub fn apply_step_scaled(&mut self, theta: f64) {
        let n = self.a.ncols();
        let (mu, gamma) =
            gamma_mu(&self.x_bar, &self.s_bar, self.t_bar, &self.barriers).expect("anchor interior");
        let (coeffs, _) = step_coefficients(&gamma, self.lambda, &self.barriers, self.alpha);
        let h: Vec<f64> = (0..n).map(|i| self.barriers[i].hess(self.x_bar[i])).collect();
        let delta_mu: Vec<f64> =
            (0..n).map(|i| -theta * self.alpha * coeffs[i] * mu[i]).collect();

        // y = (A H⁻¹ Aᵀ)⁻¹ A H⁻¹ δ_μ by dense elimination.
        let z: Vec<f64> = (0..n).map(|i| delta_mu[i] / h[i]).collect();
        let rhs = self.a.matvec(&z);
        let d = rhs.len();
        let a_dense = self.a.to_dense();
        let mut m = vec![vec![0.0; d]; d];
        for (r, row_r) in a_dense.iter().enumerate() {
            for (c, row_c) in a_dense.iter().enumerate() {
                let mut acc = 0.0;
                for i in 0..n {
                    acc += row_r[i] * row_c[i] / h[i];
                }
                m[r][c] = acc;
            }
        }
        let y = gaussian_solve(m, rhs);
        let aty = self.a.matvec_transpose(&y);
        for i in 0..n {
            self.x[i] += z[i] - aty[i] / h[i];
            self.s[i] += self.t_bar * aty[i];
        }
    }

    /// Replaces anchor coordinates; the explicit pair is untouched.
    pub fn update(&mut self, x_bar_new: &[f64], s_bar_new: &[f64]) -> Result<(), MsError> {
        for (i, blk) in self.barriers.iter().enumerate() {
            if !blk.contains(x_bar_new[i]) {
                return Err(MsError::NotInterior { block: i });
            }
        }
        self.x_bar = x_bar_new.to_vec();
        self.s_bar = s_bar_new.to_vec();
        Ok(())
    }

    /// Replaces the cached path parameter.
    pub fn refresh_t(&mut self, t_new: f64) {
        self.t_bar = t_new;
    }

    /// The explicit pair.
    pub fn output(&self) -> (Vec<f64>, Vec<f64>) {
        (self.x.clone(), self.s.clone())
    }
}

/// In-place Gaussian elimination with partial pivoting; panics on a
/// numerically singular system (the oracle instances are well conditioned).
fn gaussian_solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let d = b.len();
    for col in 0..d {
        let piv = (col..d)
            .max_by(|&r1, &r2| m[r1][col].abs().partial_cmp(&m[r2][col].abs()).unwrap())
            .unwrap();
        assert!(m[piv][col].abs() > 1e-300, "singular normal matrix in the simulator");
        m.swap(col, piv);
        b.swap(col, piv);
        for r in (col + 1)..d {
            let f = m[r][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            for c in col..d {
                m[r][c] -= f * m[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; d];
    for r in (0..d).rev() {
        let mut acc = b[r];
        for c in (r + 1)..d {
            acc -= m[r][c] * x[c];
        }
        x[r] = acc / m[r][r];
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use elim_tree::EliminationTree;
    use sparse_core::build_csc;

    #[test]
    fn centered_anchor_gives_a_zero_step() {
        let tree =
            EliminationTree::from_parent_and_order(vec![1, usize::MAX], vec![0, 1]).unwrap();
        let a = build_csc(2, 3, &[(0, 0, 1.0), (1, 1, 1.0), (0, 2, 0.5), (1, 2, -0.5)], None)
            .unwrap();
        let _ = tree;
        let barriers = vec![
            BarrierBlock::interval(-1.0, 1.0),
            BarrierBlock::interval(-1.0, 1.0),
            BarrierBlock::interval(-1.0, 1.0),
        ];
        let t = 1.7;
        let x_bar = vec![0.3, -0.2, 0.1];
        let s_bar: Vec<f64> = x_bar
            .iter()
            .zip(&barriers)
            .map(|(&xi, b)| -t * b.weight() * b.grad(xi))
            .collect();
        let mut sim = ReferenceSimulator::new(
            &a, &barriers, 8.0, 0.1, &x_bar, &s_bar, &x_bar, &s_bar, t,
        )
        .unwrap();
        sim.apply_step();
        let (x, s) = sim.output();
        for i in 0..3 {
            assert!((x[i] - x_bar[i]).abs() <= 1e-14);
            assert!((s[i] - s_bar[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn elimination_matches_hand_inverse() {
        let m = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let x = gaussian_solve(m, vec![1.0, 2.0]);
        // [[4,1],[1,3]]⁻¹ [1,2] = [1/11, 7/11]
        assert!((x[0] - 1.0 / 11.0).abs() <= 1e-14);
        assert!((x[1] - 7.0 / 11.0).abs() <= 1e-14);
    }
}
