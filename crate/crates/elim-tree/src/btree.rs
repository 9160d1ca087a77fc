use crate::tree::EliminationTree;

/// A complete, left-filled binary tree whose leaves are the heavy-light
/// positions `0..d` of an elimination tree, in order.
///
/// Every node covers one contiguous position run `lo..=hi`. Internal nodes
/// split their run so the left child is a perfect subtree on the largest
/// power of two below the run length, which yields the standard left-filled
/// complete shape. Node 0 is the root.
#[derive(Debug, Clone)]
pub struct BalancedBinaryTree {
    /// (lo, hi) position run per node.
    runs: Vec<(usize, usize)>,
    parent: Vec<usize>, // usize::MAX at the root
    /// (left, right) child ids, usize::MAX for leaves.
    children: Vec<(usize, usize)>,
    /// Leaf node id of each position.
    leaf_of_pos: Vec<usize>,
}

impl BalancedBinaryTree {
    /// Builds the tree over `d >= 1` leaf positions.
    pub fn over_positions(d: usize) -> Self {
        assert!(d >= 1, "balanced tree needs at least one leaf");
        let mut tree = BalancedBinaryTree {
            runs: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
            leaf_of_pos: vec![usize::MAX; d],
        };
        tree.build(0, d - 1, usize::MAX);
        tree
    }

    fn build(&mut self, lo: usize, hi: usize, parent: usize) -> usize {
        let id = self.runs.len();
        self.runs.push((lo, hi));
        self.parent.push(parent);
        self.children.push((usize::MAX, usize::MAX));
        if lo == hi {
            self.leaf_of_pos[lo] = id;
            return id;
        }
        let len = hi - lo + 1;
        // Largest power of two strictly below len: left child is perfect.
        let left_len = 1usize << (usize::BITS - 1 - (len - 1).leading_zeros());
        let left = self.build(lo, lo + left_len - 1, id);
        let right = self.build(lo + left_len, hi, id);
        self.children[id] = (left, right);
        id
    }

    /// Number of nodes.
    pub fn nnodes(&self) -> usize {
        self.runs.len()
    }

    /// Root node id (always 0).
    pub fn root(&self) -> usize {
        0
    }

    /// The inclusive position run of node `v`.
    pub fn run(&self, v: usize) -> (usize, usize) {
        self.runs[v]
    }

    /// Parent of node `v`, or `None` at the root.
    pub fn parent(&self, v: usize) -> Option<usize> {
        (self.parent[v] != usize::MAX).then(|| self.parent[v])
    }

    /// Children of internal node `v`, or `None` for a leaf.
    pub fn children(&self, v: usize) -> Option<(usize, usize)> {
        (self.children[v].0 != usize::MAX).then(|| self.children[v])
    }

    /// Whether node `v` is a leaf.
    pub fn is_leaf(&self, v: usize) -> bool {
        self.children[v].0 == usize::MAX
    }

    /// Leaf node covering position `p`.
    pub fn leaf_of_position(&self, p: usize) -> usize {
        self.leaf_of_pos[p]
    }

    /// Number of leaves.
    pub fn nleaves(&self) -> usize {
        self.leaf_of_pos.len()
    }

    /// Height: nodes on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        let mut h = 1;
        for p in 0..self.leaf_of_pos.len() {
            let mut v = self.leaf_of_pos[p];
            let mut len = 1;
            while let Some(u) = self.parent(v) {
                v = u;
                len += 1;
            }
            h = h.max(len);
        }
        h
    }

    /// Path from node `v` to the root, inclusive.
    pub fn path_to_root(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path
    }
}

/// The per-node boundary sets of a balanced tree over an elimination tree's
/// heavy-light order.
///
/// For a node `v` covering run `R`, consider the union of root paths of the
/// vertices at positions in `R`. `lambda(v)` is the part of that union
/// shared with root paths from outside `R`; it always lies on the root paths
/// of the two boundary vertices and has size at most twice the elimination
/// tree's height. `lambda_bar(v)` is the rest: the vertices whose whole
/// subtree run sits inside `R`. `club(u)` is the deepest balanced-tree node
/// whose run contains the subtree run of `u`; the nodes with that property
/// form a root path in the balanced tree.
#[derive(Debug, Clone)]
pub struct LambdaSets {
    /// Per balanced-tree node: sorted boundary vertex set Λ(v).
    pub lambda: Vec<Vec<usize>>,
    /// Per balanced-tree node: sorted interior vertex set Λ̄(v).
    pub lambda_bar: Vec<Vec<usize>>,
    /// Per elimination-tree vertex: balanced-tree node Λ♣(u).
    pub club: Vec<usize>,
}

/// Computes [`LambdaSets`] for `btree` built over the heavy-light order of
/// `tree`.
pub fn lambda_sets(btree: &BalancedBinaryTree, tree: &EliminationTree) -> LambdaSets {
    let d = tree.nvertices();
    assert_eq!(btree.nleaves(), d, "balanced tree must cover every position");
    let sigma = crate::tree::heavy_light_order(tree);

    let inside = |u: usize, lo: usize, hi: usize| -> bool {
        let (tin, tout) = tree.subtree_run(u);
        lo <= tin && tout <= hi
    };

    let mut lambda = Vec::with_capacity(btree.nnodes());
    let mut lambda_bar = Vec::with_capacity(btree.nnodes());
    for v in 0..btree.nnodes() {
        let (lo, hi) = btree.run(v);
        // Λ(v): vertices on the boundary root paths whose subtree run
        // escapes the node's run.
        let mut lam: Vec<usize> = crate::tree::path_to_root(tree, sigma[lo])
            .into_iter()
            .chain(crate::tree::path_to_root(tree, sigma[hi]))
            .filter(|&u| !inside(u, lo, hi))
            .collect();
        lam.sort_unstable();
        lam.dedup();
        // Λ̄(v): run members whose subtree run stays inside.
        let bar: Vec<usize> = (lo..=hi)
            .map(|p| sigma[p])
            .filter(|&u| inside(u, lo, hi))
            .collect();
        let mut bar = bar;
        bar.sort_unstable();
        lambda.push(lam);
        lambda_bar.push(bar);
    }

    // Λ♣(u): descend from the root while a child's run still contains the
    // subtree run of u.
    let mut club = vec![usize::MAX; d];
    for u in 0..d {
        let (tin, tout) = tree.subtree_run(u);
        let mut v = btree.root();
        loop {
            match btree.children(v) {
                Some((l, r)) => {
                    let (llo, lhi) = btree.run(l);
                    let (rlo, rhi) = btree.run(r);
                    if llo <= tin && tout <= lhi {
                        v = l;
                    } else if rlo <= tin && tout <= rhi {
                        v = r;
                    } else {
                        break;
                    }
                }
                None => break,
            }
        }
        club[u] = v;
    }

    LambdaSets {
        lambda,
        lambda_bar,
        club,
    }
}
