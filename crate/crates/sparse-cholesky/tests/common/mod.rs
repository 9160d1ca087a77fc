//! Shared generators and dense reference implementations for the
//! factorization tests.

use elim_tree::EliminationTree;
use rand::Rng;
use sparse_cholesky::{DiagonalBlockHessian, HessianBlock};
use sparse_core::SparseMatrix;

/// Random elimination tree on `d` vertices whose order is the identity:
/// each vertex below the top picks a parent above itself.
pub fn random_tree<R: Rng>(rng: &mut R, d: usize) -> EliminationTree {
    let mut parent = vec![usize::MAX; d];
    for v in 0..d.saturating_sub(1) {
        parent[v] = rng.gen_range(v + 1..d);
    }
    EliminationTree::from_parent_and_order(parent, (0..d).collect()).unwrap()
}

/// Random positive definite instance over a random tree.
///
/// Every row gets a private scalar block (so `A` contains a nonsingular
/// diagonal submatrix and the normal matrix is positive definite), plus
/// extra blocks of width 1–3 whose shared row pattern is a random subset of
/// a random root path.
pub fn random_instance<R: Rng>(
    rng: &mut R,
    d: usize,
    extra_blocks: usize,
) -> (SparseMatrix, DiagonalBlockHessian, EliminationTree) {
    let tree = random_tree(rng, d);
    let mut triplets = Vec::new();
    let mut block_sizes = Vec::new();
    let mut blocks = Vec::new();
    let mut col = 0usize;

    for r in 0..d {
        triplets.push((r, col, rng.gen_range(0.5..2.0)));
        block_sizes.push(1);
        blocks.push(HessianBlock::Scalar(rng.gen_range(0.5..2.0)));
        col += 1;
    }

    for _ in 0..extra_blocks {
        let v = rng.gen_range(0..d);
        let path = elim_tree::path_to_root(&tree, v);
        let mut pattern: Vec<usize> = path
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(0.6))
            .take(4)
            .collect();
        if pattern.is_empty() {
            pattern.push(v);
        }
        pattern.sort_unstable();
        let ni = rng.gen_range(1..=3usize);
        for c in 0..ni {
            for &r in &pattern {
                if c == 0 || rng.gen_bool(0.7) {
                    triplets.push((r, col + c, rng.gen_range(-1.0..1.0)));
                }
            }
        }
        block_sizes.push(ni);
        blocks.push(random_pd_block(rng, ni));
        col += ni;
    }

    let a = sparse_core::build_csc(d, col, &triplets, Some(&block_sizes)).unwrap();
    let h = DiagonalBlockHessian::new(blocks).unwrap();
    (a, h, tree)
}

/// Random symmetric positive definite block of dimension `n`
/// (`B Bᵀ + 0.3 I` for random `B`).
pub fn random_pd_block<R: Rng>(rng: &mut R, n: usize) -> HessianBlock {
    if n == 1 {
        return HessianBlock::Scalar(rng.gen_range(0.3..3.0));
    }
    let b: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut values = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            let mut acc = if r == c { 0.3 } else { 0.0 };
            for k in 0..n {
                acc += b[r * n + k] * b[c * n + k];
            }
            values[r * n + c] = acc;
        }
    }
    HessianBlock::Dense { n, values }
}

/// Dense `A H⁻¹ Aᵀ`.
pub fn dense_normal_matrix(a: &SparseMatrix, h: &DiagonalBlockHessian) -> Vec<Vec<f64>> {
    let d = a.nrows();
    let mut m = vec![vec![0.0; d]; d];
    let ad = a.to_dense();
    // H⁻¹ Aᵀ column by column (columns of Aᵀ are rows of A).
    for r in 0..d {
        let mut hinv_row = vec![0.0; a.ncols()];
        for i in 0..a.nblocks() {
            let cols: Vec<usize> = a.block_cols(i).collect();
            let seg: Vec<f64> = cols.iter().map(|&c| ad[r][c]).collect();
            let out = h.apply_inv(i, &seg);
            for (k, &c) in cols.iter().enumerate() {
                hinv_row[c] = out[k];
            }
        }
        for r2 in 0..d {
            m[r2][r] = sparse_core::dot(&ad[r2], &hinv_row);
        }
    }
    m
}

/// Dense Cholesky; `None` if a pivot is not strictly positive.
pub fn dense_cholesky(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let d = m.len();
    let mut l = vec![vec![0.0; d]; d];
    for j in 0..d {
        let mut diag = m[j][j];
        for k in 0..j {
            diag -= l[j][k] * l[j][k];
        }
        if !(diag.is_finite() && diag > 0.0) {
            return None;
        }
        l[j][j] = diag.sqrt();
        for r in j + 1..d {
            let mut acc = m[r][j];
            for k in 0..j {
                acc -= l[r][k] * l[j][k];
            }
            l[r][j] = acc / l[j][j];
        }
    }
    Some(l)
}

/// Largest absolute entry difference between two dense matrices.
pub fn max_abs_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (x - y).abs()))
        .fold(0.0, f64::max)
}
