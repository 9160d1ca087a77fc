use std::fmt;

/// Errors reported while building or querying a [`SparseMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixError {
    /// A triplet row index is `>= nrows`.
    RowOutOfRange { row: usize, nrows: usize },
    /// A triplet column index is `>= ncols`.
    ColOutOfRange { col: usize, ncols: usize },
    /// A triplet value is NaN or infinite.
    NonFiniteValue { row: usize, col: usize, value: f64 },
    /// The block sizes do not sum to the number of columns.
    BlockSizesMismatch { total: usize, ncols: usize },
    /// A block size of zero was supplied.
    EmptyBlock { block: usize },
    /// A block index passed to a query is `>= nblocks`.
    BlockOutOfRange { block: usize, nblocks: usize },
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::RowOutOfRange { row, nrows } => {
                write!(f, "row index {row} out of range for {nrows} rows")
            }
            MatrixError::ColOutOfRange { col, ncols } => {
                write!(f, "column index {col} out of range for {ncols} columns")
            }
            MatrixError::NonFiniteValue { row, col, value } => {
                write!(f, "non-finite value {value} at ({row}, {col})")
            }
            MatrixError::BlockSizesMismatch { total, ncols } => {
                write!(f, "block sizes sum to {total}, expected {ncols} columns")
            }
            MatrixError::EmptyBlock { block } => {
                write!(f, "block {block} has size zero")
            }
            MatrixError::BlockOutOfRange { block, nblocks } => {
                write!(f, "block index {block} out of range for {nblocks} blocks")
            }
        }
    }
}

impl std::error::Error for MatrixError {}

/// Immutable compressed sparse-column matrix with a block-column grouping.
///
/// Rows within each column are stored in strictly increasing order and every
/// stored value is finite and nonzero. Columns are partitioned left to right
/// into contiguous blocks; each block caches its *pattern*, the sorted union
/// of the row supports of its columns. The pattern of a width-one block is
/// simply that column's support.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    /// Column index at which each block starts; length `nblocks + 1`.
    block_ptr: Vec<usize>,
    /// Block owning each column; length `ncols`.
    block_of_col: Vec<usize>,
    /// Sorted union of the row supports of each block's columns.
    patterns: Vec<Vec<usize>>,
}

/// Builds a [`SparseMatrix`] from triplets `(row, col, value)`.
///
/// Duplicate coordinates are summed, and entries that are exactly zero after
/// summation are dropped (no magnitude threshold). When `block_sizes` is
/// `None` every column is its own block; otherwise the sizes must be positive
/// and sum to `ncols`.
pub fn build_csc(
    nrows: usize,
    ncols: usize,
    triplets: &[(usize, usize, f64)],
    block_sizes: Option<&[usize]>,
) -> Result<SparseMatrix, MatrixError> {
    for &(row, col, value) in triplets {
        if row >= nrows {
            return Err(MatrixError::RowOutOfRange { row, nrows });
        }
        if col >= ncols {
            return Err(MatrixError::ColOutOfRange { col, ncols });
        }
        if !value.is_finite() {
            return Err(MatrixError::NonFiniteValue { row, col, value });
        }
    }

    // Bucket by column, then sort each column by row and merge duplicates.
    let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ncols];
    for &(row, col, value) in triplets {
        per_col[col].push((row, value));
    }
    let mut col_ptr = Vec::with_capacity(ncols + 1);
    let mut row_idx = Vec::new();
    let mut values = Vec::new();
    col_ptr.push(0);
    for entries in &mut per_col {
        entries.sort_unstable_by_key(|&(row, _)| row);
        let mut k = 0;
        while k < entries.len() {
            let row = entries[k].0;
            let mut sum = 0.0;
            while k < entries.len() && entries[k].0 == row {
                sum += entries[k].1;
                k += 1;
            }
            if sum != 0.0 {
                row_idx.push(row);
                values.push(sum);
            }
        }
        col_ptr.push(row_idx.len());
    }

    let sizes: Vec<usize> = match block_sizes {
        Some(s) => s.to_vec(),
        None => vec![1; ncols],
    };
    for (block, &size) in sizes.iter().enumerate() {
        if size == 0 {
            return Err(MatrixError::EmptyBlock { block });
        }
    }
    let total: usize = sizes.iter().sum();
    if total != ncols {
        return Err(MatrixError::BlockSizesMismatch { total, ncols });
    }

    let mut block_ptr = Vec::with_capacity(sizes.len() + 1);
    let mut block_of_col = Vec::with_capacity(ncols);
    block_ptr.push(0);
    for (block, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            block_of_col.push(block);
        }
        block_ptr.push(block_ptr[block] + size);
    }

    let mut patterns = Vec::with_capacity(sizes.len());
    for block in 0..sizes.len() {
        let mut pat: Vec<usize> =
            row_idx[col_ptr[block_ptr[block]]..col_ptr[block_ptr[block + 1]]].to_vec();
        pat.sort_unstable();
        pat.dedup();
        patterns.push(pat);
    }

    Ok(SparseMatrix {
        nrows,
        ncols,
        col_ptr,
        row_idx,
        values,
        block_ptr,
        block_of_col,
        patterns,
    })
}

/// Returns the row pattern of block `i` of `a`, i.e. the sorted union of the
/// supports of the block's columns.
pub fn column_block_pattern(a: &SparseMatrix, i: usize) -> Result<&[usize], MatrixError> {
    if i >= a.nblocks() {
        return Err(MatrixError::BlockOutOfRange {
            block: i,
            nblocks: a.nblocks(),
        });
    }
    Ok(&a.patterns[i])
}

impl SparseMatrix {
    /// Number of rows.
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    /// Number of columns.
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Number of column blocks.
    pub fn nblocks(&self) -> usize {
        self.block_ptr.len() - 1
    }

    /// Number of stored (structurally nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Row indices of column `j`, strictly increasing.
    pub fn col_rows(&self, j: usize) -> &[usize] {
        &self.row_idx[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    /// Values of column `j`, aligned with [`Self::col_rows`].
    pub fn col_values(&self, j: usize) -> &[f64] {
        &self.values[self.col_ptr[j]..self.col_ptr[j + 1]]
    }

    /// Half-open column range of block `i`.
    pub fn block_cols(&self, i: usize) -> std::ops::Range<usize> {
        self.block_ptr[i]..self.block_ptr[i + 1]
    }

    /// Width (number of columns) of block `i`.
    pub fn block_size(&self, i: usize) -> usize {
        self.block_ptr[i + 1] - self.block_ptr[i]
    }

    /// Block owning column `j`.
    pub fn block_of_col(&self, j: usize) -> usize {
        self.block_of_col[j]
    }

    /// Row pattern of block `i` (sorted union of its columns' supports).
    ///
    /// Panicking twin of [`column_block_pattern`] for internal hot paths
    /// where the index is known valid.
    pub fn block_pattern(&self, i: usize) -> &[usize] {
        &self.patterns[i]
    }

    /// Stored entries as `(row, col, value)` triplets in column-major order.
    pub fn to_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(self.nnz());
        for j in 0..self.ncols {
            for (&row, &val) in self.col_rows(j).iter().zip(self.col_values(j)) {
                out.push((row, j, val));
            }
        }
        out
    }

    /// Copy with row `r` moved to row `perm[r]`; columns, values, and block
    /// structure are unchanged. `perm` must be a permutation of `0..nrows`.
    pub fn permute_rows(&self, perm: &[usize]) -> SparseMatrix {
        assert_eq!(perm.len(), self.nrows, "permute_rows: permutation length");
        let triplets: Vec<(usize, usize, f64)> = self
            .to_triplets()
            .into_iter()
            .map(|(r, c, v)| (perm[r], c, v))
            .collect();
        let block_sizes: Vec<usize> = (0..self.nblocks()).map(|i| self.block_size(i)).collect();
        build_csc(self.nrows, self.ncols, &triplets, Some(&block_sizes))
            .expect("row permutation preserves validity")
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matvec: dimension mismatch");
        let mut y = vec![0.0; self.nrows];
        for j in 0..self.ncols {
            let xj = x[j];
            if xj == 0.0 {
                continue;
            }
            for (&row, &val) in self.col_rows(j).iter().zip(self.col_values(j)) {
                y[row] += val * xj;
            }
        }
        y
    }

    /// `y = Aᵀ x`.
    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "matvec_transpose: dimension mismatch");
        let mut y = vec![0.0; self.ncols];
        for j in 0..self.ncols {
            let mut acc = 0.0;
            for (&row, &val) in self.col_rows(j).iter().zip(self.col_values(j)) {
                acc += val * x[row];
            }
            y[j] = acc;
        }
        y
    }

    /// Dense copy, row-major, mainly for small test oracles.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for (row, col, val) in self.to_triplets() {
            dense[row][col] = val;
        }
        dense
    }
}
