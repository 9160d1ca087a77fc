/// Simple undirected graph on vertices `0..n` with sorted adjacency lists.
///
/// The graph is immutable after construction; self-loops are rejected and
/// parallel edges collapse. Neighbor queries are slices, membership tests are
/// binary searches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize) -> Self {
        Graph {
            adj: vec![Vec::new(); n],
        }
    }

    /// Builds a graph from an edge list. Out-of-range endpoints and
    /// self-loops panic; duplicate edges collapse.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            assert!(u < n && v < n, "edge ({u}, {v}) out of range for {n} vertices");
            assert_ne!(u, v, "self-loop at vertex {u}");
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        Graph { adj }
    }

    /// Builds a graph from prepared adjacency lists. Each list must already be
    /// sorted, deduplicated, self-loop free, and symmetric; debug builds check
    /// symmetry.
    pub(crate) fn from_adjacency(adj: Vec<Vec<usize>>) -> Self {
        #[cfg(debug_assertions)]
        for (u, list) in adj.iter().enumerate() {
            for &v in list {
                debug_assert!(v != u, "self-loop at vertex {u}");
                debug_assert!(
                    adj[v].binary_search(&u).is_ok(),
                    "asymmetric edge ({u}, {v})"
                );
            }
        }
        Graph { adj }
    }

    /// Number of vertices.
    pub fn nvertices(&self) -> usize {
        self.adj.len()
    }

    /// Number of edges.
    pub fn nedges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Whether `{u, v}` is an edge.
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` pairs with `u < v`, lexicographically sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.nedges());
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Connected components, each a sorted vertex list, ordered by their
    /// smallest vertex.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.nvertices();
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        let mut stack = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = Vec::new();
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in self.neighbors(v) {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components
    }

    /// Subgraph induced by `vertices` (which need not be sorted). Returns the
    /// subgraph, whose vertex `i` corresponds to `vertices[i]`.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Graph {
        let mut position = vec![usize::MAX; self.nvertices()];
        for (i, &v) in vertices.iter().enumerate() {
            position[v] = i;
        }
        let mut adj = vec![Vec::new(); vertices.len()];
        for (i, &v) in vertices.iter().enumerate() {
            for &w in self.neighbors(v) {
                if position[w] != usize::MAX {
                    adj[i].push(position[w]);
                }
            }
            adj[i].sort_unstable();
        }
        Graph { adj }
    }
}
