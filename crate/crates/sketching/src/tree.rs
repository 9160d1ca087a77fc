//! Sampling-tree construction over an elimination tree.

use crate::SketchError;
use elim_tree::{lambda_sets, BalancedBinaryTree, EliminationTree};
use sparse_core::SparseMatrix;

/// Which construction produced a [`SamplingTree`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeKind {
    /// The elimination tree itself is the spine; column leaves hang in
    /// balanced binaries under the deepest vertex of their pattern. Height
    /// grows with the elimination tree's height.
    Simple,
    /// A complete binary tree over the heavy-light vertex order replaces
    /// the spine, capping the height at `O(log)` regardless of how deep the
    /// elimination tree is.
    Balanced,
}

/// Per-node boundary tables that only the balanced construction carries.
#[derive(Debug, Clone)]
struct BalancedTables {
    /// Heavy-light order: `sigma[p]` is the vertex at position `p`.
    sigma: Vec<usize>,
    /// Per inner node: sorted boundary vertex set Λ(v) — vertices on the
    /// node's root-path union that are shared with paths from outside its
    /// position run.
    lambda: Vec<Vec<usize>>,
    /// Per inner node: sorted interior vertex set Λ̄(v) — run members whose
    /// whole subtree stays inside the run.
    lambda_bar: Vec<Vec<usize>>,
    /// Per vertex: the deepest inner node having it interior.
    club: Vec<usize>,
    /// Per vertex: the inner leaf at its heavy-light position.
    bleaf: Vec<usize>,
}

/// A rooted tree whose nodes are labelled with coordinate subsets of `[n]`:
/// the root owns every coordinate, children partition their parent's set,
/// and each coordinate sits alone at one leaf.
///
/// Node ids `0..inner_count()` form the *inner* layer (elimination-tree
/// vertices for [`TreeKind::Simple`], complete-binary-tree nodes over the
/// heavy-light order for [`TreeKind::Balanced`]); the per-coordinate leaf
/// binaries occupy the remaining ids. Below the inner layer, every column
/// pattern in a node's label lies on the root path of one *anchor* vertex,
/// which is what makes direct per-node evaluation cheap there.
///
/// An inner leaf whose vertex is the deepest pattern vertex of no column
/// ends up childless with an empty label; such placeholder nodes carry no
/// data and are exempt from the one-coordinate leaf rule.
#[derive(Debug, Clone)]
pub struct SamplingTree {
    kind: TreeKind,
    elim: EliminationTree,
    nvars: usize,
    parent: Vec<usize>, // usize::MAX at the root
    children: Vec<Vec<usize>>,
    depth: Vec<usize>, // root has depth 1
    root: usize,
    /// Coordinate carried by a leaf node, `usize::MAX` elsewhere.
    coord: Vec<usize>,
    /// Leaf node of each coordinate.
    leaf_for: Vec<usize>,
    /// Sorted label set χ(v) per node.
    label: Vec<Vec<usize>>,
    /// Deepest pattern vertex of each column's block.
    low_of: Vec<usize>,
    /// Anchor vertex for nodes below the inner layer, `usize::MAX` within.
    anchor: Vec<usize>,
    ninner: usize,
    height: usize,
    tables: Option<BalancedTables>,
}

/// Growing node arrays shared by both constructions.
struct Builder {
    parent: Vec<usize>,
    children: Vec<Vec<usize>>,
    coord: Vec<usize>,
    anchor: Vec<usize>,
}

impl Builder {
    fn with_inner(n_inner: usize) -> Self {
        Builder {
            parent: vec![usize::MAX; n_inner],
            children: vec![Vec::new(); n_inner],
            coord: vec![usize::MAX; n_inner],
            anchor: vec![usize::MAX; n_inner],
        }
    }

    fn push(&mut self, parent: usize, anchor: usize) -> usize {
        let id = self.parent.len();
        self.parent.push(parent);
        self.children.push(Vec::new());
        self.coord.push(usize::MAX);
        self.anchor.push(anchor);
        if parent != usize::MAX {
            self.children[parent].push(id);
        }
        id
    }

    /// Attaches a balanced binary over the sorted coordinate list `coords`
    /// under `host`, the left split being the largest power of two below
    /// the length.
    fn attach_binary(&mut self, coords: &[usize], host: usize, anchor: usize) {
        if coords.is_empty() {
            return;
        }
        if coords.len() == 1 {
            let id = self.push(host, anchor);
            self.coord[id] = coords[0];
            return;
        }
        let id = self.push(host, anchor);
        let left = 1usize << (usize::BITS - 1 - (coords.len() - 1).leading_zeros());
        let (a, b) = coords.split_at(left);
        self.attach_binary(a, id, anchor);
        self.attach_binary(b, id, anchor);
    }
}

impl SamplingTree {
    /// Builds the spine-based tree: the elimination tree's vertices keep
    /// their parent links (node id = vertex id), and each vertex hosts a
    /// leaf binary over the columns whose pattern bottoms out at it.
    pub fn simple(elim: &EliminationTree, a: &SparseMatrix) -> Result<SamplingTree, SketchError> {
        let d = elim.nvertices();
        let low_of = column_lows(elim, a)?;
        let mut b = Builder::with_inner(d);
        for v in 0..d {
            if let Some(p) = elim.parent(v) {
                b.parent[v] = p;
                b.children[p].push(v);
            }
        }
        for host in 0..d {
            let mine: Vec<usize> = (0..a.ncols()).filter(|&j| low_of[j] == host).collect();
            b.attach_binary(&mine, host, host);
        }
        Self::finish(TreeKind::Simple, elim.clone(), a.ncols(), low_of, b, d, None)
    }

    /// Builds the height-capped tree: a complete binary over the heavy-light
    /// vertex order forms the inner layer, and each inner leaf hosts the
    /// columns whose pattern bottoms out at its vertex.
    pub fn balanced(elim: &EliminationTree, a: &SparseMatrix) -> Result<SamplingTree, SketchError> {
        let d = elim.nvertices();
        let low_of = column_lows(elim, a)?;
        let bt = BalancedBinaryTree::over_positions(d);
        let ls = lambda_sets(&bt, elim);
        let sigma = elim_tree::heavy_light_order(elim).to_vec();

        let ninner = bt.nnodes();
        let mut b = Builder::with_inner(ninner);
        for v in 0..ninner {
            if let Some(p) = bt.parent(v) {
                b.parent[v] = p;
            }
            if let Some((l, r)) = bt.children(v) {
                b.children[v] = vec![l, r];
            }
        }
        let mut bleaf = vec![usize::MAX; d];
        for p in 0..d {
            bleaf[sigma[p]] = bt.leaf_of_position(p);
        }
        for p in 0..d {
            let vert = sigma[p];
            let host = bleaf[vert];
            let mine: Vec<usize> = (0..a.ncols()).filter(|&j| low_of[j] == vert).collect();
            b.attach_binary(&mine, host, vert);
        }
        let tables = BalancedTables {
            sigma,
            lambda: ls.lambda,
            lambda_bar: ls.lambda_bar,
            club: ls.club,
            bleaf,
        };
        Self::finish(
            TreeKind::Balanced,
            elim.clone(),
            a.ncols(),
            low_of,
            b,
            ninner,
            Some(tables),
        )
    }

    fn finish(
        kind: TreeKind,
        elim: EliminationTree,
        nvars: usize,
        low_of: Vec<usize>,
        b: Builder,
        ninner: usize,
        tables: Option<BalancedTables>,
    ) -> Result<SamplingTree, SketchError> {
        let nn = b.parent.len();
        let root = (0..nn)
            .find(|&v| b.parent[v] == usize::MAX)
            .expect("a rooted tree has a root");

        // Depths by traversal from the root (ids are not topological: spine
        // parents have larger ids than their children, binary parents
        // smaller ones).
        let mut depth = vec![0usize; nn];
        let mut order = Vec::with_capacity(nn);
        depth[root] = 1;
        order.push(root);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &c in &b.children[v] {
                depth[c] = depth[v] + 1;
                order.push(c);
            }
        }
        if order.len() != nn {
            return Err(SketchError::Dimension {
                reason: "sampling tree nodes are not connected",
            });
        }
        let height = depth.iter().copied().max().unwrap_or(1);

        // Labels bottom-up: deepest nodes first.
        let mut label: Vec<Vec<usize>> = vec![Vec::new(); nn];
        let mut leaf_for = vec![usize::MAX; nvars];
        for &v in order.iter().rev() {
            if b.coord[v] != usize::MAX {
                label[v] = vec![b.coord[v]];
                leaf_for[b.coord[v]] = v;
            } else {
                let mut merged: Vec<usize> = b.children[v]
                    .iter()
                    .flat_map(|&c| label[c].iter().copied())
                    .collect();
                merged.sort_unstable();
                label[v] = merged;
            }
        }
        if leaf_for.iter().any(|&v| v == usize::MAX) {
            return Err(SketchError::Dimension {
                reason: "some coordinate has no leaf",
            });
        }

        Ok(SamplingTree {
            kind,
            elim,
            nvars,
            parent: b.parent,
            children: b.children,
            depth,
            root,
            coord: b.coord,
            leaf_for,
            label,
            low_of,
            anchor: b.anchor,
            ninner,
            height,
            tables,
        })
    }

    /// Which construction built this tree.
    pub fn kind(&self) -> TreeKind {
        self.kind
    }

    /// The elimination tree the construction was based on.
    pub fn elim(&self) -> &EliminationTree {
        &self.elim
    }

    /// Total node count.
    pub fn nnodes(&self) -> usize {
        self.parent.len()
    }

    /// Number of coordinates `n`.
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Number of elimination-tree vertices `d`.
    pub fn nverts(&self) -> usize {
        self.elim.nvertices()
    }

    /// Root node id.
    pub fn root(&self) -> usize {
        self.root
    }

    /// Parent of `v`, or `None` at the root.
    pub fn parent(&self, v: usize) -> Option<usize> {
        (self.parent[v] != usize::MAX).then(|| self.parent[v])
    }

    /// Children of `v`.
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Depth of `v`; the root has depth 1.
    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    /// Nodes on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        self.height
    }

    /// The coordinate carried by leaf `v`, if any.
    pub fn coordinate(&self, v: usize) -> Option<usize> {
        (self.coord[v] != usize::MAX).then(|| self.coord[v])
    }

    /// The leaf node carrying coordinate `i`.
    pub fn leaf_for(&self, i: usize) -> usize {
        self.leaf_for[i]
    }

    /// Sorted label set χ(v).
    pub fn label(&self, v: usize) -> &[usize] {
        &self.label[v]
    }

    /// Deepest pattern vertex of column `j`'s block.
    pub fn low_of(&self, j: usize) -> usize {
        self.low_of[j]
    }

    /// Whether `v` belongs to the inner layer.
    pub fn is_inner(&self, v: usize) -> bool {
        v < self.ninner
    }

    /// Number of inner nodes; they occupy ids `0..inner_count()`.
    pub fn inner_count(&self) -> usize {
        self.ninner
    }

    /// For a node below the inner layer: the vertex whose root path carries
    /// every column pattern in the node's label.
    pub fn anchor(&self, v: usize) -> Option<usize> {
        (self.anchor[v] != usize::MAX).then(|| self.anchor[v])
    }

    /// Path from `v` to the root, inclusive.
    pub fn path_to_root(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path
    }

    fn tables(&self) -> &BalancedTables {
        self.tables
            .as_ref()
            .expect("boundary tables exist only on the balanced construction")
    }

    /// Heavy-light order (balanced trees only).
    pub fn sigma(&self) -> &[usize] {
        &self.tables().sigma
    }

    /// Sorted boundary vertex set Λ(v) of inner node `v` (balanced only).
    pub fn lambda(&self, v: usize) -> &[usize] {
        &self.tables().lambda[v]
    }

    /// Sorted interior vertex set Λ̄(v) of inner node `v` (balanced only).
    pub fn lambda_bar(&self, v: usize) -> &[usize] {
        &self.tables().lambda_bar[v]
    }

    /// The deepest inner node having vertex `u` interior (balanced only).
    pub fn club(&self, u: usize) -> usize {
        self.tables().club[u]
    }

    /// The inner leaf at vertex `u`'s heavy-light position (balanced only).
    pub fn bleaf(&self, u: usize) -> usize {
        self.tables().bleaf[u]
    }

    /// Checks the labelling axioms: the root owns `[n]`, children partition
    /// their parent, and childless nodes carry exactly one coordinate
    /// (placeholder inner leaves with empty labels excepted).
    pub fn verify_axioms(&self) -> Result<(), String> {
        let root_label = self.label(self.root);
        if root_label.len() != self.nvars || root_label.iter().enumerate().any(|(k, &c)| k != c) {
            return Err("root label is not the full coordinate set".into());
        }
        for v in 0..self.nnodes() {
            if self.children[v].is_empty() {
                match self.coordinate(v) {
                    Some(c) => {
                        if self.label[v] != [c] {
                            return Err(format!("leaf {v} label disagrees with its coordinate"));
                        }
                    }
                    None => {
                        if !(self.is_inner(v) && self.label[v].is_empty()) {
                            return Err(format!("childless node {v} is not a valid placeholder"));
                        }
                    }
                }
            } else {
                let mut merged: Vec<usize> = self.children[v]
                    .iter()
                    .flat_map(|&c| self.label[c].iter().copied())
                    .collect();
                merged.sort_unstable();
                if merged.windows(2).any(|w| w[0] == w[1]) {
                    return Err(format!("children of {v} overlap"));
                }
                if merged != self.label[v] {
                    return Err(format!("children of {v} do not cover its label"));
                }
            }
        }
        Ok(())
    }
}

/// Deepest pattern vertex per column, via each column's block pattern.
fn column_lows(elim: &EliminationTree, a: &SparseMatrix) -> Result<Vec<usize>, SketchError> {
    if a.nrows() != elim.nvertices() {
        return Err(SketchError::Dimension {
            reason: "tree size differs from row count",
        });
    }
    let mut lows = Vec::with_capacity(a.ncols());
    for j in 0..a.ncols() {
        let pat = a.block_pattern(a.block_of_col(j));
        let low = elim_tree::low(elim, pat).map_err(|_| SketchError::Dimension {
            reason: "column pattern is empty or not on one root path",
        })?;
        lows.push(low);
    }
    Ok(lows)
}
