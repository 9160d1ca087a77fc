use crate::{CholError, DiagonalBlockHessian, HessianBlock};
use elim_tree::EliminationTree;
use sparse_core::SparseMatrix;

/// Sparse lower-triangular Cholesky factor of `A H⁻¹ Aᵀ` stored along
/// elimination-tree root paths.
///
/// Column `j` is kept dense on the path from `j` to the root: the value at
/// path offset `k` is the entry in row `ancestor_at_distance(j, k)`. This
/// makes the fill certificate structural — entries outside a root path
/// simply do not exist — and lets rank-one updates and restricted solves
/// walk paths without index searches (the offset of row `r` in column `j`
/// is `depth(j) − depth(r)`).
///
/// Every mutation bumps the version stamp and appends full snapshots of the
/// changed columns to a per-column log, so any historical column (and hence
/// any historical triangular solve) can be reproduced exactly.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    tree: EliminationTree,
    /// paths[j] = root path of j, ascending (paths[j][0] == j).
    paths: Vec<Vec<usize>>,
    /// cols[j] aligned with paths[j].
    cols: Vec<Vec<f64>>,
    version: u64,
    /// log[j] = (version, column values) snapshots, version-ascending; the
    /// first entry is the freshly factorized column at version 0.
    log: Vec<Vec<(u64, Vec<f64>)>>,
    hessian: DiagonalBlockHessian,
}

/// Sparse vector as parallel (indices, values); indices strictly ascending.
pub type SparseVec = (Vec<usize>, Vec<f64>);

/// Factorizes `M = A H⁻¹ Aᵀ` under the elimination-tree order.
///
/// `A`'s rows must already be permuted so the tree's order is the identity
/// (`parent(v) > v`); every column block's row pattern must lie on one root
/// path. Only path entries are ever touched.
pub fn factorize(
    a: &SparseMatrix,
    hessian: DiagonalBlockHessian,
    tree: &EliminationTree,
) -> Result<CholeskyFactor, CholError> {
    let d = a.nrows();
    if tree.nvertices() != d {
        return Err(CholError::DimensionMismatch {
            reason: "tree size differs from row count",
        });
    }
    if hessian.nblocks() != a.nblocks() || hessian.dim() != a.ncols() {
        return Err(CholError::DimensionMismatch {
            reason: "Hessian blocks do not match matrix blocks",
        });
    }
    for v in 0..d {
        if tree.order()[v] != v {
            return Err(CholError::OrderNotIdentity);
        }
    }

    let paths: Vec<Vec<usize>> = (0..d).map(|j| elim_tree::path_to_root(tree, j)).collect();
    let mut cols: Vec<Vec<f64>> = paths.iter().map(|p| vec![0.0; p.len()]).collect();

    // Assemble M block by block. A block with pattern p contributes the
    // |p|×|p| matrix  A_p H_i⁻¹ A_pᵀ, all of whose entries live on the root
    // path of the deepest pattern vertex.
    for i in 0..a.nblocks() {
        let pat = a.block_pattern(i);
        if pat.is_empty() {
            continue;
        }
        elim_tree::low(tree, pat).map_err(|_| CholError::PatternNotOnPath { index: i })?;
        let ni = a.block_size(i);
        let cols_range: Vec<usize> = a.block_cols(i).collect();
        // Dense pattern-row copy of the block: rows × ni.
        let mut local = vec![vec![0.0; ni]; pat.len()];
        for (cl, &j) in cols_range.iter().enumerate() {
            for (&r, &val) in a.col_rows(j).iter().zip(a.col_values(j)) {
                let ri = pat.binary_search(&r).expect("pattern contains support");
                local[ri][cl] = val;
            }
        }
        // rows_hinv[r] = H_i⁻¹ · (local row r)ᵀ
        let rows_hinv: Vec<Vec<f64>> = local.iter().map(|row| hessian.apply_inv(i, row)).collect();
        for (ui, &u) in pat.iter().enumerate() {
            for (vi, &v) in pat.iter().enumerate() {
                if u < v {
                    continue; // lower triangle only
                }
                let m_uv = sparse_core::dot(&local[ui], &rows_hinv[vi]);
                // Offset of row u in column v's path storage.
                let off = tree.depth(v) - tree.depth(u);
                cols[v][off] += m_uv;
            }
        }
    }

    // Right-looking factorization along paths: finalize column j, then fold
    // its outer product into the columns of its ancestors.
    for j in 0..d {
        let diag = cols[j][0];
        if !(diag.is_finite() && diag > 1e-300) {
            return Err(CholError::NotPositiveDefinite { column: j });
        }
        let ljj = diag.sqrt();
        cols[j][0] = ljj;
        for k in 1..cols[j].len() {
            cols[j][k] /= ljj;
        }
        let path = &paths[j];
        for ku in 1..path.len() {
            let u = path[ku];
            let luj = cols[j][ku];
            if luj == 0.0 {
                continue;
            }
            for kr in ku..path.len() {
                cols[u][kr - ku] -= luj * cols[j][kr];
            }
        }
    }

    let log = cols.iter().map(|c| vec![(0u64, c.clone())]).collect();
    Ok(CholeskyFactor {
        tree: tree.clone(),
        paths,
        cols,
        version: 0,
        log,
        hessian,
    })
}

impl CholeskyFactor {
    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    /// Current version stamp; 0 right after factorization, +1 per rank-one
    /// update.
    pub fn version(&self) -> u64 {
        self.version
    }

    /// The elimination tree the factor is built on.
    pub fn tree(&self) -> &EliminationTree {
        &self.tree
    }

    /// The Hessian the factored matrix was assembled with.
    pub fn hessian(&self) -> &DiagonalBlockHessian {
        &self.hessian
    }

    /// Root path of column `j` (ascending row indices of its stored
    /// entries).
    pub fn column_rows(&self, j: usize) -> &[usize] {
        &self.paths[j]
    }

    /// Live values of column `j`, aligned with [`Self::column_rows`].
    pub fn column_values(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }

    /// Entry `L[r, j]`, zero outside the stored path.
    pub fn entry(&self, r: usize, j: usize) -> f64 {
        if r == j {
            return self.cols[j][0];
        }
        if !elim_tree::is_ancestor(&self.tree, r, j) {
            return 0.0;
        }
        self.cols[j][self.tree.depth(j) - self.tree.depth(r)]
    }

    /// Column `j` as it was at `version` (values aligned with
    /// [`Self::column_rows`]).
    pub fn historical_column(&self, j: usize, version: u64) -> Result<&[f64], CholError> {
        if version > self.version {
            return Err(CholError::VersionInFuture {
                requested: version,
                current: self.version,
            });
        }
        let log = &self.log[j];
        let idx = log.partition_point(|(v, _)| *v <= version) - 1;
        Ok(&log[idx].1)
    }

    fn column_at(&self, j: usize, version: Option<u64>) -> &[f64] {
        match version {
            None => &self.cols[j],
            Some(t) => {
                let log = &self.log[j];
                let idx = log.partition_point(|(v, _)| *v <= t) - 1;
                &log[idx].1
            }
        }
    }

    /// Applies the rank-one modification `M ± w wᵀ` to the factored matrix,
    /// returning the columns whose values changed (ascending; always a
    /// subset of the root path of `low(w)`).
    ///
    /// The support of `w` must lie on one root path. A downdate that
    /// destroys positive definiteness fails with the offending column, with
    /// the factor left unchanged.
    pub fn rank_one_update(&mut self, w: &SparseVec, sign: f64) -> Result<Vec<usize>, CholError> {
        debug_assert!(sign == 1.0 || sign == -1.0);
        let (idx, val) = w;
        debug_assert_eq!(idx.len(), val.len());
        let support: Vec<usize> = idx
            .iter()
            .zip(val)
            .filter(|(_, &v)| v != 0.0)
            .map(|(&i, _)| i)
            .collect();
        if support.is_empty() {
            return Ok(Vec::new());
        }
        let lowv = elim_tree::low(&self.tree, &support)
            .map_err(|_| CholError::PatternNotOnPath { index: support[0] })?;
        let path = &self.paths[lowv];

        // Work vector along the path; offset of row r is depth diff.
        let mut v = vec![0.0; path.len()];
        for (&i, &x) in idx.iter().zip(val.iter()) {
            if x != 0.0 {
                v[self.tree.depth(lowv) - self.tree.depth(i)] = x;
            }
        }

        // Hyperbolic column sweep: two passes so a failed downdate leaves
        // the factor untouched. First simulate diagonals only.
        {
            let mut vv = v.clone();
            for (k, &j) in path.iter().enumerate() {
                if vv[k] == 0.0 {
                    continue;
                }
                let dold = self.cols[j][0];
                let r2 = dold * dold + sign * vv[k] * vv[k];
                if !(r2.is_finite() && r2 > 1e-300) {
                    return Err(CholError::DowndateFailed { column: j });
                }
                let r = r2.sqrt();
                for k2 in (k + 1)..path.len() {
                    let lij = self.cols[j][k2 - k];
                    let vi = vv[k2];
                    vv[k2] = (dold * vi - vv[k] * lij) / r;
                }
            }
        }

        let mut changed = Vec::new();
        for (k, &j) in path.iter().enumerate() {
            if v[k] == 0.0 {
                continue;
            }
            let dold = self.cols[j][0];
            let r2 = dold * dold + sign * v[k] * v[k];
            debug_assert!(r2.is_finite() && r2 > 1e-300, "checked by the dry run");
            let r = r2.sqrt();
            self.cols[j][0] = r;
            for k2 in (k + 1)..path.len() {
                let off = k2 - k;
                let lij = self.cols[j][off];
                let vi = v[k2];
                self.cols[j][off] = (dold * lij + sign * v[k] * vi) / r;
                v[k2] = (dold * vi - v[k] * lij) / r;
            }
            changed.push(j);
        }

        self.version += 1;
        for &j in &changed {
            self.log[j].push((self.version, self.cols[j].clone()));
        }
        Ok(changed)
    }

    /// Replaces Hessian block `i` and updates the factor via one signed
    /// rank-one modification per eigendirection of the block difference
    /// (at most `2 nᵢ`), so only columns on the root path of the block's
    /// pattern change. Returns the union of changed columns.
    pub fn update_hessian_block(
        &mut self,
        a: &SparseMatrix,
        i: usize,
        block: HessianBlock,
    ) -> Result<Vec<usize>, CholError> {
        let pat = a.block_pattern(i).to_vec();
        let ni = a.block_size(i);
        if block.dim() != ni {
            return Err(CholError::DimensionMismatch {
                reason: "replacement block dimension mismatch",
            });
        }
        // ΔM = A_i (H'⁻¹ − H⁻¹) A_iᵀ, decomposed over the eigenpairs of the
        // ni×ni inverse difference.
        let old = self.hessian.block(i);
        let diff_inv = inverse_difference(&block, &old)?;
        let mut eigen = small_sym_eigen(ni, &diff_inv);
        // Apply additive directions first: every intermediate matrix then
        // dominates the final one, so no downdate can spuriously lose
        // positive definiteness along the way.
        eigen.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        self.hessian.set_block(i, block)?;

        let cols_range: Vec<usize> = a.block_cols(i).collect();
        let mut changed_union = Vec::new();
        for (lambda, u) in eigen {
            if lambda.abs() <= 1e-300 {
                continue;
            }
            // w = √|λ| · A_i u on the block's pattern.
            let scale = lambda.abs().sqrt();
            let mut wvals = vec![0.0; pat.len()];
            for (cl, &j) in cols_range.iter().enumerate() {
                for (&r, &aval) in a.col_rows(j).iter().zip(a.col_values(j)) {
                    let ri = pat.binary_search(&r).unwrap();
                    wvals[ri] += aval * u[cl] * scale;
                }
            }
            let w = (pat.clone(), wvals);
            let changed = self.rank_one_update(&w, lambda.signum())?;
            changed_union.extend(changed);
        }
        changed_union.sort_unstable();
        changed_union.dedup();
        Ok(changed_union)
    }

    /// Solves `L x = v` for sparse `v`; the result is supported on the union
    /// of root paths of `v`'s support and returned sparse over that set.
    pub fn solve_lower(&self, v: &SparseVec) -> SparseVec {
        self.solve_lower_impl(v, None)
    }

    /// [`Self::solve_lower`] against the factor as of `version`.
    pub fn solve_lower_at(&self, v: &SparseVec, version: u64) -> Result<SparseVec, CholError> {
        if version > self.version {
            return Err(CholError::VersionInFuture {
                requested: version,
                current: self.version,
            });
        }
        Ok(self.solve_lower_impl(v, Some(version)))
    }

    fn solve_lower_impl(&self, v: &SparseVec, version: Option<u64>) -> SparseVec {
        let (idx, val) = v;
        // Ancestor-closed reach: union of root paths of the support.
        let mut reach: Vec<usize> = idx
            .iter()
            .flat_map(|&i| self.paths[i].iter().copied())
            .collect();
        reach.sort_unstable();
        reach.dedup();
        let mut acc = std::collections::HashMap::with_capacity(reach.len() * 2);
        for (&i, &x) in idx.iter().zip(val.iter()) {
            *acc.entry(i).or_insert(0.0) += x;
        }
        let mut out = Vec::with_capacity(reach.len());
        for &j in &reach {
            let col = self.column_at(j, version);
            let xj = acc.get(&j).copied().unwrap_or(0.0) / col[0];
            out.push(xj);
            if xj != 0.0 {
                for (k, &r) in self.paths[j].iter().enumerate().skip(1) {
                    *acc.entry(r).or_insert(0.0) -= col[k] * xj;
                }
            }
        }
        (reach, out)
    }

    /// Solves `L x = v` for dense `v`, touching every stored entry once.
    pub fn solve_lower_dense(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        assert_eq!(v.len(), d, "solve_lower_dense: dimension mismatch");
        let mut x = v.to_vec();
        for j in 0..d {
            x[j] /= self.cols[j][0];
            let xj = x[j];
            if xj != 0.0 {
                for (k, &r) in self.paths[j].iter().enumerate().skip(1) {
                    x[r] -= self.cols[j][k] * xj;
                }
            }
        }
        x
    }

    /// Solves `Lᵀ x = v` for dense `v`.
    pub fn solve_upper_dense(&self, v: &[f64]) -> Vec<f64> {
        let d = self.dim();
        assert_eq!(v.len(), d, "solve_upper_dense: dimension mismatch");
        let mut x = vec![0.0; d];
        for j in (0..d).rev() {
            let mut acc = v[j];
            for (k, &r) in self.paths[j].iter().enumerate().skip(1) {
                acc -= self.cols[j][k] * x[r];
            }
            x[j] = acc / self.cols[j][0];
        }
        x
    }

    /// The entries `(L⁻ᵀ y)|_S` for a set `S` lying on one root path,
    /// computed on the path's principal submatrix only. Entries are returned
    /// in the order of `S`.
    pub fn solve_upper_restricted(&self, y: &[f64], s: &[usize]) -> Result<Vec<f64>, CholError> {
        self.solve_upper_restricted_impl(y, s, None)
    }

    /// [`Self::solve_upper_restricted`] against the factor as of `version`.
    pub fn solve_upper_restricted_at(
        &self,
        y: &[f64],
        s: &[usize],
        version: u64,
    ) -> Result<Vec<f64>, CholError> {
        if version > self.version {
            return Err(CholError::VersionInFuture {
                requested: version,
                current: self.version,
            });
        }
        self.solve_upper_restricted_impl(y, s, Some(version))
    }

    fn solve_upper_restricted_impl(
        &self,
        y: &[f64],
        s: &[usize],
        version: Option<u64>,
    ) -> Result<Vec<f64>, CholError> {
        if s.is_empty() {
            return Ok(Vec::new());
        }
        let lowv = elim_tree::low(&self.tree, s)
            .map_err(|_| CholError::PatternNotOnPath { index: s[0] })?;
        let path = &self.paths[lowv];
        // Backward solve on the path principal submatrix: for i on the path,
        // the equation row of Lᵀ touches only ancestors of i, all on the
        // path, so the restriction is exact.
        let mut x = vec![0.0; path.len()];
        for k in (0..path.len()).rev() {
            let j = path[k];
            let col = self.column_at(j, version);
            let mut acc = y[j];
            for k2 in (k + 1)..path.len() {
                acc -= col[k2 - k] * x[k2];
            }
            x[k] = acc / col[0];
        }
        let depth_low = self.tree.depth(lowv);
        Ok(s.iter().map(|&i| x[depth_low - self.tree.depth(i)]).collect())
    }

    /// The single coordinate `(L⁻ᵀ v)ᵢ`, via the sparse row `eᵢᵀ L⁻¹`
    /// supported on the root path of `i`.
    pub fn solve_upper_coordinate(&self, v: &[f64], i: usize) -> f64 {
        // eᵢᵀ L⁻ᵀ v = (L⁻¹ eᵢ)ᵀ v, and L⁻¹eᵢ is supported on 𝒫(i).
        let e = (vec![i], vec![1.0]);
        let (rows, xs) = self.solve_lower(&e);
        rows.iter().zip(xs).map(|(&r, x)| x * v[r]).sum()
    }

    /// Dense reconstruction of `L` for small oracles.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = vec![vec![0.0; d]; d];
        for j in 0..d {
            for (k, &r) in self.paths[j].iter().enumerate() {
                out[r][j] = self.cols[j][k];
            }
        }
        out
    }
}

/// H'⁻¹ − H⁻¹ for two blocks of equal dimension, dense row-major.
fn inverse_difference(new: &HessianBlock, old: &HessianBlock) -> Result<Vec<f64>, CholError> {
    let n = new.dim();
    let inv = |b: &HessianBlock| -> Result<Vec<f64>, CholError> {
        let h = DiagonalBlockHessian::new(vec![b.clone()])?;
        let mut out = vec![0.0; n * n];
        for c in 0..n {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            let col = h.apply_inv(0, &e);
            for r in 0..n {
                out[r * n + c] = col[r];
            }
        }
        Ok(out)
    };
    let a = inv(new)?;
    let b = inv(old)?;
    Ok(a.iter().zip(&b).map(|(x, y)| x - y).collect())
}

/// Eigenpairs (λ, vector) of a small dense symmetric matrix; scalar fast
/// path for 1×1. The matrix need not be definite.
fn small_sym_eigen(n: usize, m: &[f64]) -> Vec<(f64, Vec<f64>)> {
    if n == 1 {
        return vec![(m[0], vec![1.0])];
    }
    let (vals, vecs) = crate::hessian::jacobi_eigen(n, m);
    vals.iter()
        .enumerate()
        .map(|(k, &lambda)| (lambda, vecs[k * n..(k + 1) * n].to_vec()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use elim_tree::EliminationTree;
    use sparse_core::build_csc;

    fn chain_tree(d: usize) -> EliminationTree {
        let mut parent = vec![usize::MAX; d];
        for v in 0..d - 1 {
            parent[v] = v + 1;
        }
        EliminationTree::from_parent_and_order(parent, (0..d).collect()).unwrap()
    }

    fn identity_hessian(m: usize) -> DiagonalBlockHessian {
        DiagonalBlockHessian::from_scalars(vec![1.0; m]).unwrap()
    }

    #[test]
    fn one_by_one_identity() {
        let a = build_csc(1, 1, &[(0, 0, 1.0)], None).unwrap();
        let f = factorize(&a, identity_hessian(1), &chain_tree(1)).unwrap();
        assert_eq!(f.column_values(0), &[1.0]);
    }

    #[test]
    fn row_of_ones_gives_sqrt_two() {
        let a = build_csc(1, 2, &[(0, 0, 1.0), (0, 1, 1.0)], None).unwrap();
        let f = factorize(&a, identity_hessian(2), &chain_tree(1)).unwrap();
        assert!((f.column_values(0)[0] - 2.0f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn two_by_two_known_factor() {
        // A = [[2,0],[1,2]], H = I: M = [[4,2],[2,5]], L = [[2,0],[1,2]].
        let a = build_csc(2, 2, &[(0, 0, 2.0), (1, 0, 1.0), (1, 1, 2.0)], None).unwrap();
        let f = factorize(&a, identity_hessian(2), &chain_tree(2)).unwrap();
        let l = f.to_dense();
        assert!((l[0][0] - 2.0).abs() < 1e-14);
        assert!((l[1][0] - 1.0).abs() < 1e-14);
        assert!((l[1][1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn non_positive_definite_reports_column() {
        // A has a zero column block ⇒ M singular at that column.
        let a = build_csc(2, 2, &[(0, 0, 1.0), (1, 0, 1.0), (1, 1, 1.0)], None).unwrap();
        // M = [[1,1],[1,2]] is fine; make it fail by zeroing the second row
        // instead: column 1 pattern empty → M_11 = 0.
        let bad = build_csc(2, 1, &[(0, 0, 1.0)], None).unwrap();
        let err = factorize(&bad, identity_hessian(1), &chain_tree(2)).unwrap_err();
        assert_eq!(err, CholError::NotPositiveDefinite { column: 1 });
        drop(a);
    }

    #[test]
    fn rank_one_scalar_example() {
        // M = [4] → L = [2]; after +[2][2]ᵀ, M = [8] → L = 2√2.
        let a = build_csc(1, 1, &[(0, 0, 2.0)], None).unwrap();
        let mut f = factorize(&a, identity_hessian(1), &chain_tree(1)).unwrap();
        assert!((f.column_values(0)[0] - 2.0).abs() < 1e-15);
        let changed = f.rank_one_update(&(vec![0], vec![2.0]), 1.0).unwrap();
        assert_eq!(changed, vec![0]);
        assert!((f.column_values(0)[0] - 8.0f64.sqrt()).abs() < 1e-14);
        assert_eq!(f.version(), 1);
    }

    #[test]
    fn zero_vector_update_is_identity() {
        let a = build_csc(2, 2, &[(0, 0, 2.0), (1, 0, 1.0), (1, 1, 2.0)], None).unwrap();
        let mut f = factorize(&a, identity_hessian(2), &chain_tree(2)).unwrap();
        let before = f.to_dense();
        let changed = f.rank_one_update(&(vec![0, 1], vec![0.0, 0.0]), 1.0).unwrap();
        assert!(changed.is_empty());
        assert_eq!(f.to_dense(), before);
        assert_eq!(f.version(), 0, "no-op update does not bump the version");
    }

    #[test]
    fn update_then_downdate_restores() {
        let a = build_csc(2, 2, &[(0, 0, 2.0), (1, 0, 1.0), (1, 1, 2.0)], None).unwrap();
        let mut f = factorize(&a, identity_hessian(2), &chain_tree(2)).unwrap();
        let before = f.to_dense();
        let w = (vec![0, 1], vec![0.5, -0.25]);
        f.rank_one_update(&w, 1.0).unwrap();
        f.rank_one_update(&w, -1.0).unwrap();
        let after = f.to_dense();
        for r in 0..2 {
            for c in 0..2 {
                assert!(
                    (after[r][c] - before[r][c]).abs() <= 1e-9 * before[r][c].abs().max(1.0),
                    "entry ({r},{c}) not restored"
                );
            }
        }
    }

    #[test]
    fn downdate_failure_leaves_factor_intact() {
        let a = build_csc(1, 1, &[(0, 0, 1.0)], None).unwrap();
        let mut f = factorize(&a, identity_hessian(1), &chain_tree(1)).unwrap();
        let before = f.to_dense();
        let err = f.rank_one_update(&(vec![0], vec![2.0]), -1.0).unwrap_err();
        assert_eq!(err, CholError::DowndateFailed { column: 0 });
        assert_eq!(f.to_dense(), before);
        assert_eq!(f.version(), 0);
    }

    #[test]
    fn solve_lower_identity_and_known() {
        let a = build_csc(2, 2, &[(0, 0, 1.0), (1, 1, 1.0)], None).unwrap();
        let f = factorize(&a, identity_hessian(2), &chain_tree(2)).unwrap();
        let (rows, vals) = f.solve_lower(&(vec![0, 1], vec![3.0, -2.0]));
        assert_eq!(rows, vec![0, 1]);
        assert!((vals[0] - 3.0).abs() < 1e-15 && (vals[1] + 2.0).abs() < 1e-15);

        // L = [[2,0],[1,2]], v = [2,3] → x = [1,1].
        let a2 = build_csc(2, 2, &[(0, 0, 2.0), (1, 0, 1.0), (1, 1, 2.0)], None).unwrap();
        let f2 = factorize(&a2, identity_hessian(2), &chain_tree(2)).unwrap();
        let (_, x) = f2.solve_lower(&(vec![0, 1], vec![2.0, 3.0]));
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn solve_upper_restricted_examples() {
        let a = build_csc(2, 2, &[(0, 0, 1.0), (1, 1, 1.0)], None).unwrap();
        let f = factorize(&a, identity_hessian(2), &chain_tree(2)).unwrap();
        assert_eq!(f.solve_upper_restricted(&[5.0, 7.0], &[1]).unwrap(), vec![7.0]);
        assert!(f.solve_upper_restricted(&[5.0, 7.0], &[]).unwrap().is_empty());
    }

    #[test]
    fn solve_upper_coordinate_examples() {
        let a = build_csc(2, 2, &[(0, 0, 1.0), (1, 1, 1.0)], None).unwrap();
        let f = factorize(&a, identity_hessian(2), &chain_tree(2)).unwrap();
        assert!((f.solve_upper_coordinate(&[4.0, 9.0], 0) - 4.0).abs() < 1e-15);

        // L = [[1,0],[1,1]], v = [0,1] → (L⁻ᵀv) = [-1, 1]; coordinate 1 is 1.
        let m = build_csc(2, 2, &[(0, 0, 1.0), (1, 0, 1.0), (1, 1, 1.0)], None).unwrap();
        let f2 = factorize(&m, identity_hessian(2), &chain_tree(2)).unwrap();
        assert!((f2.solve_upper_coordinate(&[0.0, 1.0], 1) - 1.0).abs() < 1e-14);
        assert!((f2.solve_upper_coordinate(&[0.0, 1.0], 0) + 1.0).abs() < 1e-14);
        assert_eq!(f2.solve_upper_coordinate(&[0.0, 0.0], 0), 0.0);
    }

    #[test]
    fn dense_solves_invert_each_other() {
        // L = [[2,0],[1,2]]: L(Lᵀx) = v round-trips through both solves.
        let a = build_csc(2, 2, &[(0, 0, 2.0), (1, 0, 1.0), (1, 1, 2.0)], None).unwrap();
        let f = factorize(&a, identity_hessian(2), &chain_tree(2)).unwrap();
        let x = f.solve_lower_dense(&[2.0, 3.0]);
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        let y = f.solve_upper_dense(&[2.0, 2.0]);
        // Lᵀy = [2,2] → y = [1/2, 1]... check by applying Lᵀ.
        assert!((2.0 * y[0] + 1.0 * y[1] - 2.0).abs() < 1e-15);
        assert!((2.0 * y[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn historical_columns_replay() {
        let a = build_csc(1, 1, &[(0, 0, 1.0)], None).unwrap();
        let mut f = factorize(&a, identity_hessian(1), &chain_tree(1)).unwrap();
        let v0 = f.column_values(0).to_vec();
        f.rank_one_update(&(vec![0], vec![1.0]), 1.0).unwrap();
        let v1 = f.column_values(0).to_vec();
        f.rank_one_update(&(vec![0], vec![2.0]), 1.0).unwrap();
        let v2 = f.column_values(0).to_vec();
        assert_eq!(f.historical_column(0, 0).unwrap(), v0.as_slice());
        assert_eq!(f.historical_column(0, 1).unwrap(), v1.as_slice());
        assert_eq!(f.historical_column(0, 2).unwrap(), v2.as_slice());
        assert_eq!(
            f.historical_column(0, 3),
            Err(CholError::VersionInFuture {
                requested: 3,
                current: 2
            })
        );
    }
}
