//! Incremental sketches of triangular-solve images.

use crate::{axpy, SamplingTree, SketchError, SketchMatrix, TreeKind};
use sparse_cholesky::{CholeskyFactor, SparseVec};
use sparse_core::SparseMatrix;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// Which factor columns an incremental catch-up may consult.
enum Restriction<'a> {
    /// The node's boundary set; exact whenever the interior columns are
    /// unchanged since the node's stamp, which the update discipline
    /// guarantees.
    Boundary,
    /// An explicit column list covering everything that changed in the
    /// replayed window; exact unconditionally.
    Columns(&'a [usize]),
}

/// Maintains, at every inner node `v` of a height-capped sampling tree, the
/// sketch `Φ_{χ(v)} H^{-1/2} Aᵀ L⁻ᵀ h` for one or more right-hand vectors
/// `h` ("slots") against an evolving Cholesky factor `L` and diagonal `H`.
///
/// Stored per inner node: the column-sparse product `Z_v`, equal to
/// `Φ_{χ(v)} H^{-1/2} Aᵀ L⁻ᵀ` at that node's private factor stamp, and per
/// slot the masked image `Z_v (I - I_{Λ(v)}) h`, where `Λ(v)` is the node's
/// boundary vertex set. Two facts make sparse repairs sufficient:
///
/// * A factor change at column `c` invalidates interior columns only for
///   the nodes on one root path (those having `c` interior), which the
///   update replays eagerly; every other node can defer, because a later
///   catch-up restricted to its boundary columns is exact.
/// * The masked slot image never involves boundary columns, so the lazy
///   boundary-restricted catch-up performed at query time cannot change
///   it — queries repair `Z_v`, add the boundary contribution, and return.
///
/// Nodes below the inner layer store nothing: their label columns all lie
/// on one root path of the elimination tree, so queries there evaluate
/// directly from a path-restricted backward solve.
///
/// The caller owns the factor and mutates it elsewhere; after any factor
/// or diagonal change, [`BalancedSketch::apply_update`] must run before
/// the next query, else results on nodes whose interior sets meet the
/// changed columns are unspecified.
pub struct BalancedSketch {
    tree: Arc<SamplingTree>,
    phi: SketchMatrix,
    a: SparseMatrix,
    /// `H^{-1/2}` per coordinate, tracking the caller's diagonal.
    inv_sqrt_h: Vec<f64>,
    r: usize,
    /// Per inner node: vertex column → length-`r` column of `Z_v`.
    z: Vec<BTreeMap<usize, Vec<f64>>>,
    /// Factor version each node's `Z_v` refers to.
    stamp: Vec<u64>,
    /// Maintained right-hand vectors, indexed `[slot][vertex]`.
    slots: Vec<Vec<f64>>,
    /// Masked images `Z_v (I - I_{Λ(v)}) h`, indexed `[slot][node]`.
    y_masked: Vec<Vec<Vec<f64>>>,
}

impl BalancedSketch {
    /// Builds the sketch against the factor's current state with `nslots`
    /// right-hand vectors, all starting at zero.
    ///
    /// Requires the height-capped tree variant, width-one column blocks,
    /// and a positive diagonal `hess` (per-coordinate scalars of `H`).
    pub fn new(
        tree: Arc<SamplingTree>,
        a: &SparseMatrix,
        phi: &SketchMatrix,
        hess: &[f64],
        factor: &CholeskyFactor,
        nslots: usize,
    ) -> Result<BalancedSketch, SketchError> {
        if tree.kind() != TreeKind::Balanced {
            return Err(SketchError::Dimension {
                reason: "incremental sketch requires the height-capped tree",
            });
        }
        if a.nblocks() != a.ncols() {
            return Err(SketchError::Dimension {
                reason: "column blocks must have width one",
            });
        }
        if a.ncols() != tree.nvars() || a.nrows() != tree.nverts() {
            return Err(SketchError::Dimension {
                reason: "matrix shape differs from the tree's",
            });
        }
        if factor.dim() != a.nrows() {
            return Err(SketchError::Dimension {
                reason: "factor dimension differs from the row count",
            });
        }
        if phi.ncols() < a.ncols() {
            return Err(SketchError::Dimension {
                reason: "projection has fewer columns than coordinates",
            });
        }
        if hess.len() != a.ncols() || hess.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(SketchError::Dimension {
                reason: "diagonal must hold one positive scalar per coordinate",
            });
        }

        let r = phi.nrows();
        let d = a.nrows();
        let ninner = tree.inner_count();
        let inv_sqrt_h: Vec<f64> = hess.iter().map(|&x| 1.0 / x.sqrt()).collect();
        let mut z: Vec<BTreeMap<usize, Vec<f64>>> = vec![BTreeMap::new(); ninner];

        // One sparse forward solve per coordinate, accumulated along the
        // inner root path of its leaf.
        for j in 0..a.ncols() {
            let col: SparseVec = (
                a.col_rows(j).to_vec(),
                a.col_values(j).iter().map(|&v| v * inv_sqrt_h[j]).collect(),
            );
            let (rows, vals) = factor.solve_lower(&col);
            for v in tree.path_to_root(tree.bleaf(tree.low_of(j))) {
                for (&u, &wu) in rows.iter().zip(&vals) {
                    if wu != 0.0 {
                        let zc = z[v].entry(u).or_insert_with(|| vec![0.0; r]);
                        phi.add_scaled(zc, j, wu);
                    }
                }
            }
        }

        Ok(BalancedSketch {
            tree,
            phi: phi.clone(),
            a: a.clone(),
            inv_sqrt_h,
            r,
            stamp: vec![factor.version(); ninner],
            z,
            slots: vec![vec![0.0; d]; nslots],
            y_masked: vec![vec![vec![0.0; r]; ninner]; nslots],
        })
    }

    /// Number of maintained right-hand vectors.
    pub fn nslots(&self) -> usize {
        self.slots.len()
    }

    /// Projection dimension `r`.
    pub fn sketch_dim(&self) -> usize {
        self.r
    }

    /// The underlying sampling tree.
    pub fn tree(&self) -> &SamplingTree {
        &self.tree
    }

    /// One maintained right-hand vector.
    pub fn slot(&self, slot: usize) -> &[f64] {
        &self.slots[slot]
    }

    /// Factor version node `v`'s stored product refers to.
    pub fn stamp(&self, v: usize) -> u64 {
        self.stamp[v]
    }

    /// The masked slot image stored at inner node `v`; diagnostic use.
    pub fn masked_image(&self, slot: usize, v: usize) -> &[f64] {
        &self.y_masked[slot][v]
    }

    /// The tracked `H^{-1/2}` diagonal.
    pub fn inv_sqrt_diag(&self) -> &[f64] {
        &self.inv_sqrt_h
    }

    /// Writes one coordinate of a right-hand vector, repairing the masked
    /// images of exactly the nodes that hold vertex `u` interior — one
    /// root path of the inner layer. Returns the repaired nodes.
    pub fn set_slot(&mut self, slot: usize, u: usize, value: f64) -> Vec<usize> {
        let delta = value - self.slots[slot][u];
        if delta == 0.0 {
            return Vec::new();
        }
        self.slots[slot][u] = value;
        let path = self.tree.path_to_root(self.tree.club(u));
        for &v in &path {
            // Interior columns of stored products are current by the
            // update discipline, and a structurally absent column is zero.
            if let Some(zc) = self.z[v].get(&u) {
                axpy(&mut self.y_masked[slot][v], delta, zc);
            }
        }
        path
    }

    /// Overwrites a whole right-hand vector coordinate by coordinate.
    pub fn set_slot_dense(&mut self, slot: usize, h: &[f64]) {
        assert_eq!(h.len(), self.slots[slot].len());
        for (u, &value) in h.iter().enumerate() {
            self.set_slot(slot, u, value);
        }
    }

    /// Absorbs one batch of factor and diagonal changes.
    ///
    /// `changed_blocks` lists the width-one column blocks whose diagonal
    /// scalar may have moved (`new_hess` holds the full current diagonal),
    /// `version_before` is the factor version the batch started from, and
    /// `changed_cols` the factor columns whose values changed since then.
    /// Returns the inner nodes whose stored state was touched.
    ///
    /// The eager work is confined to root paths: one per changed factor
    /// column (the nodes holding it interior) and one per changed block
    /// (the inner path of its leaf). Everything else defers to query-time
    /// catch-up.
    pub fn apply_update(
        &mut self,
        factor: &CholeskyFactor,
        changed_blocks: &[usize],
        new_hess: &[f64],
        version_before: u64,
        changed_cols: &[usize],
    ) -> Result<Vec<usize>, SketchError> {
        if new_hess.len() != self.a.ncols() {
            return Err(SketchError::Dimension {
                reason: "diagonal length differs from the coordinate count",
            });
        }
        let now = factor.version();
        let mut touched = BTreeSet::new();

        // Replay eagerly at every node whose interior set meets a changed
        // column: first up to the batch start under the boundary
        // restriction (their interiors were clean there), then across the
        // batch itself from the explicit column list.
        let mut eager = BTreeSet::new();
        for &c in changed_cols {
            for v in self.tree.path_to_root(self.tree.club(c)) {
                eager.insert(v);
            }
        }
        for &v in &eager {
            let mut moved = self.advance(factor, v, version_before, Restriction::Boundary)?;
            moved |= self.advance(factor, v, now, Restriction::Columns(changed_cols))?;
            if moved {
                touched.insert(v);
            }
        }

        // Fold the diagonal changes in: each coordinate's contribution to
        // every stored product on its inner path is one rank-one patch,
        // evaluated against that node's own stamp so the stored invariant
        // is preserved without advancing it.
        for &block in changed_blocks {
            for j in self.a.block_cols(block) {
                let new_inv = 1.0 / new_hess[j].sqrt();
                if !new_inv.is_finite() {
                    return Err(SketchError::Dimension {
                        reason: "diagonal scalar must stay positive",
                    });
                }
                let delta = new_inv - self.inv_sqrt_h[j];
                if delta == 0.0 {
                    continue;
                }
                self.inv_sqrt_h[j] = new_inv;
                let col: SparseVec =
                    (self.a.col_rows(j).to_vec(), self.a.col_values(j).to_vec());
                let mut solves: BTreeMap<u64, SparseVec> = BTreeMap::new();
                for v in self.tree.path_to_root(self.tree.bleaf(self.tree.low_of(j))) {
                    let (rows, vals) = match solves.get(&self.stamp[v]) {
                        Some(w) => w.clone(),
                        None => {
                            let w = factor.solve_lower_at(&col, self.stamp[v])?;
                            solves.insert(self.stamp[v], w.clone());
                            w
                        }
                    };
                    let lambda = self.tree.lambda(v);
                    for (&u, &wu) in rows.iter().zip(&vals) {
                        if wu == 0.0 {
                            continue;
                        }
                        let zc = self.z[v].entry(u).or_insert_with(|| vec![0.0; self.r]);
                        self.phi.add_scaled(zc, j, delta * wu);
                        if lambda.binary_search(&u).is_err() {
                            for slot in 0..self.slots.len() {
                                let hc = self.slots[slot][u];
                                if hc != 0.0 {
                                    self.phi.add_scaled(
                                        &mut self.y_masked[slot][v],
                                        j,
                                        delta * wu * hc,
                                    );
                                }
                            }
                        }
                    }
                    touched.insert(v);
                }
            }
        }

        Ok(touched.into_iter().collect())
    }

    /// The sketch `Φ_{χ(v)} H^{-1/2} Aᵀ L⁻ᵀ h` of slot `slot` at node `v`,
    /// against the factor's current state.
    ///
    /// Inner nodes are lazily caught up first (a boundary-restricted
    /// replay), so the call may mutate stored state; nodes below the inner
    /// layer are evaluated directly on their anchor's root path.
    pub fn query(
        &mut self,
        factor: &CholeskyFactor,
        slot: usize,
        v: usize,
    ) -> Result<Vec<f64>, SketchError> {
        if self.tree.is_inner(v) {
            self.advance(factor, v, factor.version(), Restriction::Boundary)?;
            let mut out = self.y_masked[slot][v].clone();
            for &c in self.tree.lambda(v) {
                if let Some(zc) = self.z[v].get(&c) {
                    axpy(&mut out, self.slots[slot][c], zc);
                }
            }
            Ok(out)
        } else {
            let anchor = self.tree.anchor(v).expect("non-inner nodes carry an anchor");
            let path = elim_tree::path_to_root(self.tree.elim(), anchor);
            let w = factor.solve_upper_restricted(&self.slots[slot], &path)?;
            let mut pos = BTreeMap::new();
            for (k, &u) in path.iter().enumerate() {
                pos.insert(u, k);
            }
            let mut out = vec![0.0; self.r];
            for &j in self.tree.label(v) {
                let dot: f64 = self
                    .a
                    .col_rows(j)
                    .iter()
                    .zip(self.a.col_values(j))
                    .map(|(&u, &aj)| aj * w[pos[&u]])
                    .sum();
                self.phi.add_scaled(&mut out, j, dot * self.inv_sqrt_h[j]);
            }
            Ok(out)
        }
    }

    /// Replays factor history at node `v` up to `target`, touching only the
    /// columns the restriction allows. Returns whether anything moved.
    fn advance(
        &mut self,
        factor: &CholeskyFactor,
        v: usize,
        target: u64,
        restriction: Restriction<'_>,
    ) -> Result<bool, SketchError> {
        let from = self.stamp[v];
        if from >= target {
            return Ok(false);
        }

        // Gather the changed columns in the window, with their old stored
        // product columns snapshotted: the correction is a sum of outer
        // products of *old* columns, so in-place application must not see
        // its own writes.
        let mut patches: Vec<(Vec<f64>, SparseVec)> = Vec::new();
        let candidates: &[usize] = match restriction {
            Restriction::Boundary => self.tree.lambda(v),
            Restriction::Columns(cols) => cols,
        };
        for &c in candidates {
            let zc = match self.z[v].get(&c) {
                Some(zc) => zc,
                None => continue, // structurally zero column
            };
            let old = factor.historical_column(c, from)?;
            let new = factor.historical_column(c, target)?;
            if old == new {
                continue;
            }
            let rows = factor.column_rows(c);
            let (didx, dval): (Vec<usize>, Vec<f64>) = rows
                .iter()
                .zip(old.iter().zip(new))
                .filter(|(_, (o, n))| o != n)
                .map(|(&u, (o, n))| (u, n - o))
                .unzip();
            let w = factor.solve_lower_at(&(didx, dval), target)?;
            patches.push((zc.clone(), w));
        }
        if patches.is_empty() {
            self.stamp[v] = target;
            return Ok(false);
        }

        let lambda = self.tree.lambda(v);
        for (zc_old, (rows, vals)) in &patches {
            for (&u, &wu) in rows.iter().zip(vals) {
                if wu == 0.0 {
                    continue;
                }
                // Masked images only involve non-boundary columns.
                if lambda.binary_search(&u).is_err() {
                    for slot in 0..self.slots.len() {
                        let hc = self.slots[slot][u];
                        if hc != 0.0 {
                            axpy(&mut self.y_masked[slot][v], -wu * hc, zc_old);
                        }
                    }
                }
                let zu = self.z[v].entry(u).or_insert_with(|| vec![0.0; self.r]);
                axpy(zu, -wu, zc_old);
            }
        }
        self.stamp[v] = target;
        Ok(true)
    }

    /// Recomputes every stored quantity from scratch at each node's own
    /// stamp and compares; test-scale diagnostic.
    pub fn verify_invariants(&self, factor: &CholeskyFactor) -> Result<(), String> {
        for v in 0..self.tree.inner_count() {
            let mut want: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
            for &j in self.tree.label(v) {
                let col: SparseVec = (
                    self.a.col_rows(j).to_vec(),
                    self.a
                        .col_values(j)
                        .iter()
                        .map(|&x| x * self.inv_sqrt_h[j])
                        .collect(),
                );
                let (rows, vals) = factor
                    .solve_lower_at(&col, self.stamp[v])
                    .map_err(|e| format!("historical solve at node {v}: {e}"))?;
                for (&u, &wu) in rows.iter().zip(&vals) {
                    let zc = want.entry(u).or_insert_with(|| vec![0.0; self.r]);
                    self.phi.add_scaled(zc, j, wu);
                }
            }
            let keys: BTreeSet<usize> = want.keys().chain(self.z[v].keys()).copied().collect();
            let zero = vec![0.0; self.r];
            let mut scale = 1.0f64;
            for zc in want.values() {
                for &x in zc {
                    scale = scale.max(x.abs());
                }
            }
            for &u in &keys {
                let a = want.get(&u).unwrap_or(&zero);
                let b = self.z[v].get(&u).unwrap_or(&zero);
                for (x, y) in a.iter().zip(b) {
                    if (x - y).abs() > 1e-9 * scale {
                        return Err(format!(
                            "stored product at node {v}, column {u}: {y} vs {x}"
                        ));
                    }
                }
            }
            // Interior columns must be unchanged since the node's stamp.
            for &c in self.tree.lambda_bar(v) {
                let then = factor
                    .historical_column(c, self.stamp[v])
                    .map_err(|e| format!("history at node {v}: {e}"))?;
                let nowv = factor
                    .historical_column(c, factor.version())
                    .map_err(|e| format!("history at node {v}: {e}"))?;
                if then != nowv {
                    return Err(format!(
                        "interior column {c} of node {v} changed behind its stamp"
                    ));
                }
            }
            // Masked images against the verified products.
            let lambda = self.tree.lambda(v);
            for slot in 0..self.slots.len() {
                let mut y = vec![0.0; self.r];
                for (&u, zc) in &want {
                    if lambda.binary_search(&u).is_err() {
                        axpy(&mut y, self.slots[slot][u], zc);
                    }
                }
                for (x, g) in y.iter().zip(&self.y_masked[slot][v]) {
                    if (x - g).abs() > 1e-9 * scale.max(1.0) {
                        return Err(format!("masked image at node {v}, slot {slot}"));
                    }
                }
            }
        }
        Ok(())
    }
}
