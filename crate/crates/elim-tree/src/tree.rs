use crate::td::{restrict_td, separator_unchecked, validate_td, TdError, TreeDecomposition};
use sparse_core::Graph;
use std::fmt;

/// Errors from elimination-tree construction and queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeError {
    /// A vertex index is out of range.
    VertexOutOfRange { vertex: usize, nvertices: usize },
    /// A pattern query was given an empty set.
    EmptyPattern,
    /// A pattern does not lie on a single leaf-to-root path.
    NotOnOnePath { u: usize, v: usize },
    /// The parent/order arrays passed to the constructor are inconsistent.
    MalformedTree { reason: &'static str },
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::VertexOutOfRange { vertex, nvertices } => {
                write!(f, "vertex {vertex} out of range for {nvertices} vertices")
            }
            TreeError::EmptyPattern => write!(f, "empty pattern"),
            TreeError::NotOnOnePath { u, v } => {
                write!(f, "vertices {u} and {v} are not on one root path")
            }
            TreeError::MalformedTree { reason } => write!(f, "malformed tree: {reason}"),
        }
    }
}

impl std::error::Error for TreeError {}

/// A rooted elimination tree over `d` vertices together with its elimination
/// order and the traversal structures used by the factorization and
/// sampling layers.
///
/// Invariants established at construction:
/// - every non-root vertex's parent is eliminated later
///   (`position(parent(v)) > position(v)`), so the root is the last vertex
///   of the order;
/// - `depth(root) = 1`, and `height()` is the maximum depth (a single vertex
///   has height 1);
/// - the heavy-light order `sigma` visits each subtree as one contiguous run
///   (postorder), with every vertex's heaviest child placed immediately
///   before it, so any root path splits into logarithmically many runs.
#[derive(Debug, Clone)]
pub struct EliminationTree {
    parent: Vec<usize>, // usize::MAX at the root
    root: usize,
    /// position[v] = index of v in the elimination order (0-based).
    position: Vec<usize>,
    /// order[k] = vertex eliminated k-th.
    order: Vec<usize>,
    depth: Vec<usize>,
    height: usize,
    children: Vec<Vec<usize>>,
    /// sigma[k] = vertex at heavy-light position k (a postorder).
    sigma: Vec<usize>,
    sigma_pos: Vec<usize>,
    /// First heavy-light position of each vertex's subtree; the last is the
    /// vertex's own position, so the subtree occupies `tin[v]..=sigma_pos[v]`.
    tin: Vec<usize>,
    subtree_size: Vec<usize>,
}

impl EliminationTree {
    /// Builds a tree from a parent array (`usize::MAX` marks the root) and an
    /// elimination order listing every vertex once.
    pub fn from_parent_and_order(
        parent: Vec<usize>,
        order: Vec<usize>,
    ) -> Result<Self, TreeError> {
        let d = parent.len();
        if order.len() != d {
            return Err(TreeError::MalformedTree {
                reason: "order length differs from parent length",
            });
        }
        let mut position = vec![usize::MAX; d];
        for (k, &v) in order.iter().enumerate() {
            if v >= d {
                return Err(TreeError::VertexOutOfRange {
                    vertex: v,
                    nvertices: d,
                });
            }
            if position[v] != usize::MAX {
                return Err(TreeError::MalformedTree {
                    reason: "order repeats a vertex",
                });
            }
            position[v] = k;
        }
        let mut root = usize::MAX;
        for v in 0..d {
            if parent[v] == usize::MAX {
                if root != usize::MAX {
                    return Err(TreeError::MalformedTree {
                        reason: "multiple roots",
                    });
                }
                root = v;
            } else {
                if parent[v] >= d {
                    return Err(TreeError::VertexOutOfRange {
                        vertex: parent[v],
                        nvertices: d,
                    });
                }
                if position[parent[v]] <= position[v] {
                    return Err(TreeError::MalformedTree {
                        reason: "parent eliminated before child",
                    });
                }
            }
        }
        if d > 0 && root == usize::MAX {
            return Err(TreeError::MalformedTree { reason: "no root" });
        }

        let mut children = vec![Vec::new(); d];
        for v in 0..d {
            if parent[v] != usize::MAX {
                children[parent[v]].push(v);
            }
        }
        for list in &mut children {
            list.sort_unstable();
        }

        // Depth (root = 1): parents come later in the order, so a reverse
        // sweep sees each parent before its children.
        let mut depth = vec![0usize; d];
        for &v in order.iter().rev() {
            depth[v] = if parent[v] == usize::MAX {
                1
            } else {
                depth[parent[v]] + 1
            };
        }
        let height = depth.iter().copied().max().unwrap_or(0);

        let mut subtree_size = vec![1usize; d];
        for &v in order.iter() {
            if parent[v] != usize::MAX {
                subtree_size[parent[v]] += subtree_size[v];
            }
        }

        // Heavy-light postorder: visit children light-first (heaviest last,
        // ties to the smaller id), then the vertex itself. Each subtree is a
        // contiguous run ending at its root, and heavy chains are consecutive.
        let mut sigma = Vec::with_capacity(d);
        if d > 0 {
            let mut stack: Vec<(usize, bool)> = vec![(root, false)];
            while let Some((v, expanded)) = stack.pop() {
                if expanded {
                    sigma.push(v);
                    continue;
                }
                stack.push((v, true));
                let mut kids: Vec<usize> = children[v].clone();
                kids.sort_by_key(|&c| (subtree_size[c], std::cmp::Reverse(c)));
                // Push ascending so the heaviest is expanded last (popped
                // last), landing directly before v in the postorder.
                for &c in kids.iter().rev() {
                    stack.push((c, false));
                }
            }
        }
        let mut sigma_pos = vec![0usize; d];
        for (k, &v) in sigma.iter().enumerate() {
            sigma_pos[v] = k;
        }
        let mut tin = vec![0usize; d];
        for v in 0..d {
            tin[v] = sigma_pos[v] + 1 - subtree_size[v];
        }

        Ok(EliminationTree {
            parent,
            root,
            position,
            order,
            depth,
            height,
            children,
            sigma,
            sigma_pos,
            tin,
            subtree_size,
        })
    }

    /// Number of vertices.
    pub fn nvertices(&self) -> usize {
        self.parent.len()
    }

    /// Parent of `v`, or `None` at the root.
    pub fn parent(&self, v: usize) -> Option<usize> {
        (self.parent[v] != usize::MAX).then(|| self.parent[v])
    }

    /// The root (last vertex of the elimination order).
    pub fn root(&self) -> usize {
        self.root
    }

    /// 0-based position of `v` in the elimination order.
    pub fn position(&self, v: usize) -> usize {
        self.position[v]
    }

    /// The elimination order; `order()[k]` is eliminated k-th.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Depth of `v`; the root has depth 1.
    pub fn depth(&self, v: usize) -> usize {
        self.depth[v]
    }

    /// Height: maximum depth over all vertices (1 for a single vertex).
    pub fn height(&self) -> usize {
        self.height
    }

    /// Children of `v`, sorted by vertex id.
    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Number of vertices in the subtree rooted at `v` (including `v`).
    pub fn subtree_size(&self, v: usize) -> usize {
        self.subtree_size[v]
    }

    /// Heavy-light position of `v` in `sigma`.
    pub fn sigma_position(&self, v: usize) -> usize {
        self.sigma_pos[v]
    }

    /// Inclusive heavy-light position range occupied by the subtree of `v`;
    /// the run ends at `v` itself.
    pub fn subtree_run(&self, v: usize) -> (usize, usize) {
        (self.tin[v], self.sigma_pos[v])
    }

    /// The same tree with every vertex renamed to its elimination position,
    /// so `parent(v) > v` everywhere and the order is the identity.
    pub fn relabeled_by_position(&self) -> EliminationTree {
        let d = self.nvertices();
        let mut parent = vec![usize::MAX; d];
        for v in 0..d {
            if self.parent[v] != usize::MAX {
                parent[self.position[v]] = self.position[self.parent[v]];
            }
        }
        EliminationTree::from_parent_and_order(parent, (0..d).collect())
            .expect("relabeling preserves validity")
    }
}

/// Path from `v` to the root, inclusive on both ends.
pub fn path_to_root(tree: &EliminationTree, v: usize) -> Vec<usize> {
    let mut path = vec![v];
    let mut cur = v;
    while let Some(p) = tree.parent(cur) {
        path.push(p);
        cur = p;
    }
    path
}

/// Whether `u` lies on the path from `v` to the root (true when `u == v`).
pub fn is_ancestor(tree: &EliminationTree, u: usize, v: usize) -> bool {
    let (lo, hi) = tree.subtree_run(u);
    let p = tree.sigma_position(v);
    lo <= p && p <= hi
}

/// The deepest vertex of `pattern`, which must lie on a single root path.
pub fn low(tree: &EliminationTree, pattern: &[usize]) -> Result<usize, TreeError> {
    let d = tree.nvertices();
    if pattern.is_empty() {
        return Err(TreeError::EmptyPattern);
    }
    let mut deepest = pattern[0];
    for &v in pattern {
        if v >= d {
            return Err(TreeError::VertexOutOfRange {
                vertex: v,
                nvertices: d,
            });
        }
        if tree.depth(v) > tree.depth(deepest) {
            deepest = v;
        }
    }
    for &v in pattern {
        if !is_ancestor(tree, v, deepest) {
            return Err(TreeError::NotOnOnePath { u: v, v: deepest });
        }
    }
    Ok(deepest)
}

/// The heavy-light ordering of the tree: `sigma[k]` is the vertex at
/// position `k`. Every subtree is one contiguous run, and the path between
/// any two vertices decomposes into at most `2⌈log₂ d⌉ + 2` runs.
pub fn heavy_light_order(tree: &EliminationTree) -> &[usize] {
    &tree.sigma
}

/// Builds an elimination order and tree for `G` from a valid tree
/// decomposition by recursive balanced separators.
///
/// Base cases of at most `f_tau` vertices become ascending paths. Otherwise
/// the separator's components are packed into two sides, each side is
/// ordered recursively, and the separator vertices form an ascending path on
/// top: the smallest separator vertex is the parent of both side roots, and
/// the largest is the returned root. Disconnected graphs are handled one
/// component at a time (ordered by smallest vertex), chaining each
/// component's root to the next component's root.
pub fn make_elim_order_and_tree(
    g: &Graph,
    td: &TreeDecomposition,
    f_tau: usize,
) -> Result<EliminationTree, TreeError> {
    if let Err(e) = validate_td(g, td) {
        return Err(TreeError::MalformedTree {
            reason: match e {
                TdError::VertexCountMismatch { .. } => "decomposition vertex count mismatch",
                _ => "invalid tree decomposition",
            },
        });
    }
    let d = g.nvertices();
    let mut order: Vec<usize> = Vec::with_capacity(d);
    let mut parent: Vec<usize> = vec![usize::MAX; d];

    let components = g.connected_components();
    let mut prev_root: Option<usize> = None;
    for comp in components {
        let sub_g = g.induced_subgraph(&comp);
        let sub_td = restrict_td(td, &comp, d);
        let (local_order, local_parent, local_root) = order_recursive(&sub_g, &sub_td, f_tau);
        for &lv in &local_order {
            order.push(comp[lv]);
        }
        for (lv, &lp) in local_parent.iter().enumerate() {
            if lp != usize::MAX {
                parent[comp[lv]] = comp[lp];
            }
        }
        let root = comp[local_root];
        if let Some(prev) = prev_root {
            parent[prev] = root;
        }
        prev_root = Some(root);
    }
    EliminationTree::from_parent_and_order(parent, order)
}

/// Recursive core in local labels; returns (order, parent array with
/// `usize::MAX` at the root, root). The graph may be disconnected (a side can
/// hold several separator components); only `nvertices > 0` is required.
fn order_recursive(
    g: &Graph,
    td: &TreeDecomposition,
    f_tau: usize,
) -> (Vec<usize>, Vec<usize>, usize) {
    let k = g.nvertices();
    debug_assert!(k > 0);
    if k <= f_tau {
        return ascending_path(k);
    }
    let (separator, parts) = separator_unchecked(g, td);
    if parts.is_empty() {
        // Everything landed in the separator bag; order it as a path.
        return ascending_path(k);
    }

    // Pack components onto two sides, largest first onto the lighter side;
    // with every component at most half the graph this keeps both sides at
    // most two thirds.
    let mut by_size: Vec<usize> = (0..parts.len()).collect();
    by_size.sort_by_key(|&i| (std::cmp::Reverse(parts[i].vertices.len()), parts[i].vertices[0]));
    let mut sides: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut loads = [0usize; 2];
    for &i in &by_size {
        let lighter = if loads[0] <= loads[1] { 0 } else { 1 };
        sides[lighter].push(i);
        loads[lighter] += parts[i].vertices.len();
    }

    let mut order = Vec::with_capacity(k);
    let mut parent = vec![usize::MAX; k];
    let mut side_roots = Vec::new();
    for side in &sides {
        if side.is_empty() {
            continue;
        }
        // Union of the side's components, ascending in this level's labels.
        let mut vertices: Vec<usize> = side
            .iter()
            .flat_map(|&i| parts[i].vertices.iter().copied())
            .collect();
        vertices.sort_unstable();
        let side_g = g.induced_subgraph(&vertices);
        let side_td = linked_side_td(&parts, side, &vertices, k);
        let (sub_order, sub_parent, sub_root) = order_recursive(&side_g, &side_td, f_tau);
        for &lv in &sub_order {
            order.push(vertices[lv]);
        }
        for (lv, &lp) in sub_parent.iter().enumerate() {
            if lp != usize::MAX {
                parent[vertices[lv]] = vertices[lp];
            }
        }
        side_roots.push(vertices[sub_root]);
    }

    // Separator vertices ascend as a path above both side roots.
    debug_assert!(!separator.is_empty());
    for &r in &side_roots {
        parent[r] = separator[0];
    }
    for w in separator.windows(2) {
        parent[w[0]] = w[1];
    }
    order.extend_from_slice(&separator);
    (order, parent, *separator.last().unwrap())
}

fn ascending_path(k: usize) -> (Vec<usize>, Vec<usize>, usize) {
    let order: Vec<usize> = (0..k).collect();
    let mut parent = vec![usize::MAX; k];
    for v in 0..k - 1 {
        parent[v] = v + 1;
    }
    (order, parent, k - 1)
}

/// Builds one decomposition for a side by relabelling the chosen parts into
/// side-local labels and linking their bag trees with edges between first
/// bags. Linking disjoint decompositions preserves all three axioms.
fn linked_side_td(
    parts: &[crate::td::SeparatorPart],
    side: &[usize],
    side_vertices: &[usize],
    level_nvertices: usize,
) -> TreeDecomposition {
    let mut to_side = vec![usize::MAX; level_nvertices];
    for (i, &v) in side_vertices.iter().enumerate() {
        to_side[v] = i;
    }
    let mut bags: Vec<Vec<usize>> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut first_bag_of_part: Vec<usize> = Vec::new();
    for &i in side {
        let part = &parts[i];
        let offset = bags.len();
        first_bag_of_part.push(offset);
        for b in 0..part.td.nbags() {
            bags.push(
                part.td
                    .bag(b)
                    .iter()
                    .map(|&lv| to_side[part.vertices[lv]])
                    .collect(),
            );
        }
        for &(a, b) in part.td.edges() {
            edges.push((offset + a, offset + b));
        }
    }
    for w in first_bag_of_part.windows(2) {
        edges.push((w[0], w[1]));
    }
    TreeDecomposition::new(bags, edges, side_vertices.len())
}
