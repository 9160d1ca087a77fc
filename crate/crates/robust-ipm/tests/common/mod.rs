//! Shared generators and reference oracles for the end-to-end solver tests.

use elim_tree::TreeDecomposition;
use rand::Rng;
use sparse_core::{build_csc, SparseMatrix};

/// A bounded equality-form program with a known interior feasible point.
pub struct BandedLp {
    pub a: SparseMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub td: TreeDecomposition,
    /// Interior point used to manufacture the right-hand side.
    pub feasible: Vec<f64>,
}

/// Builds a banded program: `d` rows over `n = d + bandwidth` variables,
/// row `i` touching variables `i ..= i + bandwidth` with a dominant leading
/// coefficient, so the rows are independent by construction. The right-hand
/// side is `A x*` for a point `x*` strictly inside the box, which guarantees
/// a nonempty interior. The decomposition is a path of row windows.
pub fn banded_lp(rng: &mut impl Rng, d: usize, bandwidth: usize) -> BandedLp {
    assert!(d >= 1);
    let n = d + bandwidth;

    let mut triplets = Vec::new();
    for i in 0..d {
        for j in i..=(i + bandwidth) {
            let v = if j == i {
                1.5 + rng.gen_range(0.0..1.0)
            } else {
                let mag = rng.gen_range(0.2..1.0);
                if rng.gen_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            };
            triplets.push((i, j, v));
        }
    }
    let a = build_csc(d, n, &triplets, None).expect("banded matrix is well formed");

    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut feasible = Vec::with_capacity(n);
    for _ in 0..n {
        let lo = -rng.gen_range(0.5..1.5);
        let hi = rng.gen_range(0.5..1.5);
        let frac = rng.gen_range(0.3..0.7);
        lower.push(lo);
        upper.push(hi);
        feasible.push(lo + frac * (hi - lo));
    }
    let b = a.matvec(&feasible);
    let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

    // Rows i and j share a variable exactly when |i - j| <= bandwidth, so
    // sliding windows of that length over the rows form a path
    // decomposition of the dual graph.
    let td = if d <= bandwidth + 1 {
        TreeDecomposition::single_bag(d)
    } else {
        let nbags = d - bandwidth;
        let bags: Vec<Vec<usize>> = (0..nbags).map(|t| (t..=t + bandwidth).collect()).collect();
        let edges: Vec<(usize, usize)> = (1..nbags).map(|t| (t - 1, t)).collect();
        TreeDecomposition::new(bags, edges, d)
    };

    BandedLp { a, b, c, lower, upper, td, feasible }
}

/// Exact optimum of `min c⊤x` over `Ax = b`, `lower ≤ x ≤ u` by
/// enumerating basic points: every subset of `n − d` variables pinned to a
/// bound, the rest solved from the square system. The region is compact, so
/// the optimum is attained at such a point. Only practical for tiny `n`.
pub fn vertex_optimum(
    a: &SparseMatrix,
    b: &[f64],
    c: &[f64],
    lower: &[f64],
    upper: &[f64],
) -> Option<f64> {
    let d = a.nrows();
    let n = a.ncols();
    assert!(n <= 16, "vertex enumeration is exponential in n");
    let dense = a.to_dense();
    let nfix = n - d;
    let mut best: Option<f64> = None;

    // Iterate over variable subsets of size `nfix` via bitmasks, and over
    // the 2^nfix choices of which bound each pinned variable takes.
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != nfix {
            continue;
        }
        let fixed: Vec<usize> = (0..n).filter(|&j| mask & (1 << j) != 0).collect();
        let free: Vec<usize> = (0..n).filter(|&j| mask & (1 << j) == 0).collect();
        for choice in 0u32..(1u32 << nfix) {
            let mut x = vec![0.0; n];
            for (k, &j) in fixed.iter().enumerate() {
                x[j] = if choice & (1 << k) != 0 { upper[j] } else { lower[j] };
            }
            // Solve the d×d system on the free columns.
            let mut m: Vec<Vec<f64>> = (0..d).map(|i| {
                let mut row: Vec<f64> = free.iter().map(|&j| dense[i][j]).collect();
                let shift: f64 = fixed.iter().map(|&j| dense[i][j] * x[j]).sum();
                row.push(b[i] - shift);
                row
            }).collect();
            if let Some(sol) = gaussian_solve(&mut m, d) {
                let mut ok = true;
                for (k, &j) in free.iter().enumerate() {
                    x[j] = sol[k];
                    if x[j] < lower[j] - 1e-9 || x[j] > upper[j] + 1e-9 {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    let val: f64 = c.iter().zip(&x).map(|(&ci, &xi)| ci * xi).sum();
                    best = Some(best.map_or(val, |bst: f64| bst.min(val)));
                }
            }
        }
    }
    best
}

/// Solves the square system held in `m` (rows of length `d + 1`, last entry
/// the right-hand side) by partial-pivot elimination; `None` when singular.
fn gaussian_solve(m: &mut [Vec<f64>], d: usize) -> Option<Vec<f64>> {
    for col in 0..d {
        let pivot = (col..d).max_by(|&i, &j| {
            m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap()
        })?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for row in col + 1..d {
            let f = m[row][col] / m[col][col];
            if f != 0.0 {
                for k in col..=d {
                    let upd = m[col][k] * f;
                    m[row][k] -= upd;
                }
            }
        }
    }
    let mut x = vec![0.0; d];
    for col in (0..d).rev() {
        let mut acc = m[col][d];
        for k in col + 1..d {
            acc -= m[col][k] * x[k];
        }
        x[col] = acc / m[col][col];
    }
    Some(x)
}
