use crate::CholError;

/// One diagonal block of a block-diagonal positive-definite matrix: a plain
/// positive scalar for width-one blocks, or a small dense symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum HessianBlock {
    Scalar(f64),
    /// Row-major symmetric `n × n` values.
    Dense { n: usize, values: Vec<f64> },
}

impl HessianBlock {
    /// Block dimension.
    pub fn dim(&self) -> usize {
        match self {
            HessianBlock::Scalar(_) => 1,
            HessianBlock::Dense { n, .. } => *n,
        }
    }
}

/// Block-diagonal positive-definite matrix with per-block application of the
/// inverse, square root, and inverse square root.
///
/// Width-one blocks take scalar fast paths; wider blocks go through a
/// symmetric eigendecomposition (cyclic Jacobi), so every matrix function
/// shares one code path. Positive definiteness is validated on construction
/// and on every block replacement.
#[derive(Debug, Clone)]
pub struct DiagonalBlockHessian {
    blocks: Vec<BlockData>,
    dim: usize,
}

#[derive(Debug, Clone)]
enum BlockData {
    Scalar(f64),
    Dense {
        n: usize,
        values: Vec<f64>,
        /// Eigenvalues, all positive.
        eigvals: Vec<f64>,
        /// Eigenvectors, column-major: column k at `eigvecs[k*n..][..n]`.
        eigvecs: Vec<f64>,
    },
}

impl DiagonalBlockHessian {
    /// All width-one blocks from the given positive scalars.
    pub fn from_scalars(scalars: Vec<f64>) -> Result<Self, CholError> {
        Self::new(scalars.into_iter().map(HessianBlock::Scalar).collect())
    }

    /// Builds from explicit blocks, validating each is positive definite.
    pub fn new(blocks: Vec<HessianBlock>) -> Result<Self, CholError> {
        let mut data = Vec::with_capacity(blocks.len());
        let mut dim = 0;
        for (i, b) in blocks.into_iter().enumerate() {
            dim += b.dim();
            data.push(prepare_block(b, i)?);
        }
        Ok(DiagonalBlockHessian { blocks: data, dim })
    }

    /// Number of blocks.
    pub fn nblocks(&self) -> usize {
        self.blocks.len()
    }

    /// Dimension of block `i`.
    pub fn block_dim(&self, i: usize) -> usize {
        match &self.blocks[i] {
            BlockData::Scalar(_) => 1,
            BlockData::Dense { n, .. } => *n,
        }
    }

    /// Total dimension (sum of block dims).
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The scalar of a width-one block, if block `i` is one.
    pub fn scalar(&self, i: usize) -> Option<f64> {
        match &self.blocks[i] {
            BlockData::Scalar(h) => Some(*h),
            BlockData::Dense { .. } => None,
        }
    }

    /// The block as a [`HessianBlock`] value.
    pub fn block(&self, i: usize) -> HessianBlock {
        match &self.blocks[i] {
            BlockData::Scalar(h) => HessianBlock::Scalar(*h),
            BlockData::Dense { n, values, .. } => HessianBlock::Dense {
                n: *n,
                values: values.clone(),
            },
        }
    }

    /// Replaces block `i`, revalidating positive definiteness. The new block
    /// must keep the old dimension.
    pub fn set_block(&mut self, i: usize, block: HessianBlock) -> Result<(), CholError> {
        if block.dim() != self.block_dim(i) {
            return Err(CholError::DimensionMismatch {
                reason: "replacement Hessian block changes dimension",
            });
        }
        self.blocks[i] = prepare_block(block, i)?;
        Ok(())
    }

    /// `H_i⁻¹ x` for block `i`.
    pub fn apply_inv(&self, i: usize, x: &[f64]) -> Vec<f64> {
        self.apply_fn(i, x, |e| 1.0 / e)
    }

    /// `H_i^{1/2} x` for block `i`.
    pub fn apply_sqrt(&self, i: usize, x: &[f64]) -> Vec<f64> {
        self.apply_fn(i, x, f64::sqrt)
    }

    /// `H_i^{−1/2} x` for block `i`.
    pub fn apply_inv_sqrt(&self, i: usize, x: &[f64]) -> Vec<f64> {
        self.apply_fn(i, x, |e| 1.0 / e.sqrt())
    }

    fn apply_fn(&self, i: usize, x: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        match &self.blocks[i] {
            BlockData::Scalar(h) => {
                debug_assert_eq!(x.len(), 1);
                vec![f(*h) * x[0]]
            }
            BlockData::Dense {
                n,
                eigvals,
                eigvecs,
                ..
            } => {
                let n = *n;
                debug_assert_eq!(x.len(), n);
                // V f(Λ) Vᵀ x
                let mut out = vec![0.0; n];
                for k in 0..n {
                    let vk = &eigvecs[k * n..(k + 1) * n];
                    let coeff = f(eigvals[k]) * sparse_core::dot(vk, x);
                    for r in 0..n {
                        out[r] += coeff * vk[r];
                    }
                }
                out
            }
        }
    }
}

fn prepare_block(block: HessianBlock, index: usize) -> Result<BlockData, CholError> {
    match block {
        HessianBlock::Scalar(h) => {
            if !(h.is_finite() && h > 0.0) {
                return Err(CholError::HessianNotPositiveDefinite { block: index });
            }
            Ok(BlockData::Scalar(h))
        }
        HessianBlock::Dense { n, values } => {
            if values.len() != n * n || n == 0 {
                return Err(CholError::DimensionMismatch {
                    reason: "dense Hessian block has wrong value count",
                });
            }
            let (eigvals, eigvecs) = jacobi_eigen(n, &values);
            if eigvals.iter().any(|&e| !(e.is_finite() && e > 0.0)) {
                return Err(CholError::HessianNotPositiveDefinite { block: index });
            }
            Ok(BlockData::Dense {
                n,
                values,
                eigvals,
                eigvecs,
            })
        }
    }
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Returns
/// (eigenvalues, column-major eigenvectors). Intended for the small dense
/// blocks of a block-diagonal Hessian, not large matrices.
pub(crate) fn jacobi_eigen(n: usize, values: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut a: Vec<f64> = values.to_vec();
    // Symmetrize defensively; callers should pass symmetric data.
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (a[i * n + j] + a[j * n + i]);
            a[i * n + j] = m;
            a[j * n + i] = m;
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0; // row-major identity; treated column-major below
    }
    let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
    for _sweep in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        if off.sqrt() <= 1e-14 * norm {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[p * n + k];
                    let vkq = v[q * n + k];
                    v[p * n + k] = c * vkp - s * vkq;
                    v[q * n + k] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigvals: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    // v's row k is eigenvector k, and a row-major row occupies the same
    // flat range as a column-major column, so v is already the requested
    // column-major eigenvector matrix.
    (eigvals, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_blocks_apply_functions() {
        let h = DiagonalBlockHessian::from_scalars(vec![4.0, 0.25]).unwrap();
        assert_eq!(h.dim(), 2);
        assert_eq!(h.apply_inv(0, &[8.0]), vec![2.0]);
        assert_eq!(h.apply_sqrt(0, &[3.0]), vec![6.0]);
        assert_eq!(h.apply_inv_sqrt(1, &[1.0]), vec![2.0]);
        assert_eq!(h.scalar(1), Some(0.25));
    }

    #[test]
    fn rejects_non_positive_blocks() {
        assert!(DiagonalBlockHessian::from_scalars(vec![1.0, 0.0]).is_err());
        assert!(DiagonalBlockHessian::from_scalars(vec![-2.0]).is_err());
        let indefinite = HessianBlock::Dense {
            n: 2,
            values: vec![1.0, 2.0, 2.0, 1.0], // eigenvalues 3 and -1
        };
        assert!(DiagonalBlockHessian::new(vec![indefinite]).is_err());
    }

    #[test]
    fn dense_block_inverse_and_sqrt_are_consistent() {
        let block = HessianBlock::Dense {
            n: 2,
            values: vec![2.0, 1.0, 1.0, 3.0],
        };
        let h = DiagonalBlockHessian::new(vec![block]).unwrap();
        let x = [1.0, -2.0];
        // H·(H⁻¹x) = x
        let hx = h.apply_inv(0, &x);
        let back = [
            2.0 * hx[0] + 1.0 * hx[1],
            1.0 * hx[0] + 3.0 * hx[1],
        ];
        assert!((back[0] - x[0]).abs() < 1e-12);
        assert!((back[1] - x[1]).abs() < 1e-12);
        // H^{1/2}(H^{1/2}x) = Hx
        let rx = h.apply_sqrt(0, &x);
        let rrx = h.apply_sqrt(0, &rx);
        assert!((rrx[0] - (2.0 * x[0] + x[1])).abs() < 1e-12);
        assert!((rrx[1] - (x[0] + 3.0 * x[1])).abs() < 1e-12);
        // H^{−1/2}(H^{1/2}x) = x
        let ix = h.apply_inv_sqrt(0, &rx);
        assert!((ix[0] - x[0]).abs() < 1e-12);
        assert!((ix[1] - x[1]).abs() < 1e-12);
    }

    #[test]
    fn set_block_revalidates() {
        let mut h = DiagonalBlockHessian::from_scalars(vec![1.0, 1.0]).unwrap();
        assert!(h.set_block(1, HessianBlock::Scalar(5.0)).is_ok());
        assert_eq!(h.scalar(1), Some(5.0));
        assert!(h.set_block(0, HessianBlock::Scalar(-1.0)).is_err());
        assert!(h
            .set_block(
                0,
                HessianBlock::Dense {
                    n: 2,
                    values: vec![1.0, 0.0, 0.0, 1.0]
                }
            )
            .is_err());
    }

    #[test]
    fn jacobi_matches_known_eigensystem() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let (vals, vecs) = jacobi_eigen(2, &[2.0, 1.0, 1.0, 2.0]);
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        assert!((sorted[0] - 1.0).abs() < 1e-12);
        assert!((sorted[1] - 3.0).abs() < 1e-12);
        // Reconstruction V Λ Vᵀ.
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for k in 0..2 {
                    s += vals[k] * vecs[k * 2 + i] * vecs[k * 2 + j];
                }
                let want = if i == j { 2.0 } else { 1.0 };
                assert!((s - want).abs() < 1e-12, "({i},{j}): {s} vs {want}");
            }
        }
    }
}
