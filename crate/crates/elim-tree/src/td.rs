use sparse_core::Graph;
use std::fmt;

/// Errors from tree-decomposition validation, parsing, and separator
/// extraction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TdError {
    /// The vertex counts of the graph and the decomposition disagree.
    VertexCountMismatch { graph: usize, td: usize },
    /// A bag mentions a vertex outside `0..nvertices`.
    BagVertexOutOfRange { bag: usize, vertex: usize },
    /// The bag adjacency is not a tree (disconnected or cyclic).
    NotATree,
    /// A vertex appears in no bag.
    VertexUncovered { vertex: usize },
    /// A graph edge is contained in no bag.
    EdgeUncovered { u: usize, v: usize },
    /// The bags containing a vertex do not form a connected subtree.
    OccurrencesDisconnected { vertex: usize },
    /// Some bag exceeds the declared width.
    WidthExceeded {
        bag: usize,
        size: usize,
        declared: usize,
    },
    /// Malformed `.td` input.
    Parse { line: usize, message: String },
}

impl fmt::Display for TdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TdError::VertexCountMismatch { graph, td } => {
                write!(f, "graph has {graph} vertices but decomposition declares {td}")
            }
            TdError::BagVertexOutOfRange { bag, vertex } => {
                write!(f, "bag {bag} contains out-of-range vertex {vertex}")
            }
            TdError::NotATree => write!(f, "bag adjacency is not a tree"),
            TdError::VertexUncovered { vertex } => {
                write!(f, "vertex {vertex} appears in no bag")
            }
            TdError::EdgeUncovered { u, v } => {
                write!(f, "edge ({u}, {v}) is contained in no bag")
            }
            TdError::OccurrencesDisconnected { vertex } => {
                write!(f, "bags containing vertex {vertex} are not connected")
            }
            TdError::WidthExceeded {
                bag,
                size,
                declared,
            } => {
                write!(
                    f,
                    "bag {bag} has {size} vertices, exceeding declared width {declared}"
                )
            }
            TdError::Parse { line, message } => write!(f, "line {line}: {message}"),
        }
    }
}

impl std::error::Error for TdError {}

/// A tree decomposition: a tree of vertex bags covering a graph.
///
/// Bags are sorted vertex lists; `edges` connect bag indices and must form a
/// tree. The `declared_width` is the bound the decomposition claims (bag size
/// minus one); [`validate_td`] checks it together with the three
/// decomposition axioms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    nvertices: usize,
    declared_width: usize,
}

impl TreeDecomposition {
    /// Builds a decomposition from raw parts; bags are sorted and
    /// deduplicated, and the declared width is taken from the largest bag.
    pub fn new(mut bags: Vec<Vec<usize>>, edges: Vec<(usize, usize)>, nvertices: usize) -> Self {
        for bag in &mut bags {
            bag.sort_unstable();
            bag.dedup();
        }
        let declared_width = bags.iter().map(Vec::len).max().unwrap_or(0).saturating_sub(1);
        TreeDecomposition {
            bags,
            edges,
            nvertices,
            declared_width,
        }
    }

    /// The trivial decomposition: one bag holding every vertex.
    pub fn single_bag(nvertices: usize) -> Self {
        TreeDecomposition::new(vec![(0..nvertices).collect()], Vec::new(), nvertices)
    }

    /// Number of bags.
    pub fn nbags(&self) -> usize {
        self.bags.len()
    }

    /// Sorted vertex list of bag `i`.
    pub fn bag(&self, i: usize) -> &[usize] {
        &self.bags[i]
    }

    /// Bag-tree edges.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of graph vertices the decomposition covers.
    pub fn nvertices(&self) -> usize {
        self.nvertices
    }

    /// Width declared at construction (from a file header or the largest
    /// bag).
    pub fn declared_width(&self) -> usize {
        self.declared_width
    }

    /// Actual width: largest bag size minus one (zero when empty).
    pub fn width(&self) -> usize {
        self.bags
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// Bag adjacency lists.
    pub fn bag_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.bags.len()];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Parses the PACE-2017 `.td` format: a header
    /// `s td <#bags> <width+1> <#vertices>`, bag lines `b <id> <v...>`, and
    /// bag-tree edge lines `<id1> <id2>`, all 1-indexed. Lines starting with
    /// `c` are comments.
    pub fn parse_pace(text: &str) -> Result<Self, TdError> {
        let mut header: Option<(usize, usize, usize)> = None;
        let mut bags: Vec<Vec<usize>> = Vec::new();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut seen_bag: Vec<bool> = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            let parse_err = |message: &str| TdError::Parse {
                line: line_no,
                message: message.to_string(),
            };
            let mut tokens = line.split_whitespace();
            let first = tokens.next().unwrap();
            if first == "s" {
                if header.is_some() {
                    return Err(parse_err("duplicate header"));
                }
                if tokens.next() != Some("td") {
                    return Err(parse_err("expected `s td ...` header"));
                }
                let nums: Vec<usize> = tokens
                    .map(|t| t.parse().map_err(|_| parse_err("bad number in header")))
                    .collect::<Result<_, _>>()?;
                if nums.len() != 3 {
                    return Err(parse_err("header needs `<#bags> <width+1> <#vertices>`"));
                }
                header = Some((nums[0], nums[1], nums[2]));
                bags = vec![Vec::new(); nums[0]];
                seen_bag = vec![false; nums[0]];
            } else if first == "b" {
                let (nbags, _, nverts) = header.ok_or_else(|| parse_err("bag before header"))?;
                let id: usize = tokens
                    .next()
                    .ok_or_else(|| parse_err("bag line missing id"))?
                    .parse()
                    .map_err(|_| parse_err("bad bag id"))?;
                if id == 0 || id > nbags {
                    return Err(parse_err("bag id out of range"));
                }
                if seen_bag[id - 1] {
                    return Err(parse_err("duplicate bag id"));
                }
                seen_bag[id - 1] = true;
                for t in tokens {
                    let v: usize = t.parse().map_err(|_| parse_err("bad vertex id"))?;
                    if v == 0 || v > nverts {
                        return Err(parse_err("vertex id out of range"));
                    }
                    bags[id - 1].push(v - 1);
                }
            } else {
                let (nbags, _, _) = header.ok_or_else(|| parse_err("edge before header"))?;
                let a: usize = first.parse().map_err(|_| parse_err("bad edge endpoint"))?;
                let b: usize = tokens
                    .next()
                    .ok_or_else(|| parse_err("edge line missing endpoint"))?
                    .parse()
                    .map_err(|_| parse_err("bad edge endpoint"))?;
                if tokens.next().is_some() {
                    return Err(parse_err("trailing tokens on edge line"));
                }
                if a == 0 || a > nbags || b == 0 || b > nbags {
                    return Err(parse_err("edge endpoint out of range"));
                }
                edges.push((a - 1, b - 1));
            }
        }

        let (_, width_plus_one, nverts) = header.ok_or(TdError::Parse {
            line: 0,
            message: "missing `s td` header".to_string(),
        })?;
        let mut td = TreeDecomposition::new(bags, edges, nverts);
        td.declared_width = width_plus_one.saturating_sub(1);
        Ok(td)
    }
}

/// Checks the three decomposition axioms of `td` against `g`, plus basic
/// structural sanity (bag tree shape, vertex ranges, declared width).
pub fn validate_td(g: &Graph, td: &TreeDecomposition) -> Result<(), TdError> {
    if g.nvertices() != td.nvertices {
        return Err(TdError::VertexCountMismatch {
            graph: g.nvertices(),
            td: td.nvertices,
        });
    }
    for (i, bag) in td.bags.iter().enumerate() {
        if bag.len() > td.declared_width + 1 {
            return Err(TdError::WidthExceeded {
                bag: i,
                size: bag.len(),
                declared: td.declared_width,
            });
        }
        for &v in bag {
            if v >= td.nvertices {
                return Err(TdError::BagVertexOutOfRange { bag: i, vertex: v });
            }
        }
    }
    for &(a, b) in &td.edges {
        if a >= td.nbags() || b >= td.nbags() || a == b {
            return Err(TdError::NotATree);
        }
    }

    // Bag adjacency must be a tree: nbags - 1 edges, all bags reachable.
    let nbags = td.nbags();
    if nbags > 0 {
        if td.edges.len() != nbags - 1 {
            return Err(TdError::NotATree);
        }
        let adj = td.bag_adjacency();
        let mut seen = vec![false; nbags];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(t) = stack.pop() {
            for &u in &adj[t] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        if count != nbags {
            return Err(TdError::NotATree);
        }
    } else if td.nvertices > 0 {
        return Err(TdError::VertexUncovered { vertex: 0 });
    }

    // Axiom 1: every vertex covered.
    let mut covered = vec![false; td.nvertices];
    for bag in &td.bags {
        for &v in bag {
            covered[v] = true;
        }
    }
    if let Some(v) = covered.iter().position(|&c| !c) {
        return Err(TdError::VertexUncovered { vertex: v });
    }

    // Axiom 3: the bags containing each vertex form a connected subtree.
    let adj = td.bag_adjacency();
    let mut holds = vec![false; nbags];
    for v in 0..td.nvertices {
        let holders: Vec<usize> = (0..nbags)
            .filter(|&t| td.bags[t].binary_search(&v).is_ok())
            .collect();
        for &t in &holders {
            holds[t] = true;
        }
        let mut seen = 1usize;
        let mut visited = vec![holders[0]];
        holds[holders[0]] = false;
        while let Some(t) = visited.pop() {
            for &u in &adj[t] {
                if holds[u] {
                    holds[u] = false;
                    seen += 1;
                    visited.push(u);
                }
            }
        }
        if seen != holders.len() {
            for &t in &holders {
                holds[t] = false;
            }
            return Err(TdError::OccurrencesDisconnected { vertex: v });
        }
    }

    // Axiom 2: every graph edge inside some bag.
    for (u, v) in g.edges() {
        let ok = td
            .bags
            .iter()
            .any(|bag| bag.binary_search(&u).is_ok() && bag.binary_search(&v).is_ok());
        if !ok {
            return Err(TdError::EdgeUncovered { u, v });
        }
    }
    Ok(())
}

/// One side piece returned by [`balanced_separator_from_td`]: a connected
/// component of `G - S` with its induced subgraph and restricted
/// decomposition, both in local labels `0..vertices.len()`.
///
/// `vertices` maps local label `i` to the caller's vertex `vertices[i]` and
/// is sorted ascending.
#[derive(Debug, Clone)]
pub struct SeparatorPart {
    pub vertices: Vec<usize>,
    pub graph: Graph,
    pub td: TreeDecomposition,
}

/// Extracts a balanced separator from a valid decomposition: the bag at the
/// centroid of the vertex-weighted bag tree.
///
/// Returns the separator vertex set `S` (sorted) and one [`SeparatorPart`]
/// per connected component of `G - S`, ordered by smallest vertex. Every
/// component has at most `⌈2n/3⌉` vertices, and each part's decomposition
/// has width at most the input width.
pub fn balanced_separator_from_td(
    g: &Graph,
    td: &TreeDecomposition,
) -> Result<(Vec<usize>, Vec<SeparatorPart>), TdError> {
    validate_td(g, td)?;
    Ok(separator_unchecked(g, td))
}

/// Separator extraction without re-validating; used by the recursion in
/// `make_elim_order_and_tree`, whose intermediate decompositions are valid by
/// construction.
pub(crate) fn separator_unchecked(
    g: &Graph,
    td: &TreeDecomposition,
) -> (Vec<usize>, Vec<SeparatorPart>) {
    let n = g.nvertices();
    if n == 0 {
        return (Vec::new(), Vec::new());
    }
    // Drop empty bags so the chosen centroid bag is a nonempty separator;
    // this guarantees strict shrinkage in the recursion.
    let clean = simplify_bags(td);
    let nbags = clean.nbags();
    debug_assert!(nbags > 0);
    let adj = clean.bag_adjacency();

    // Root the bag tree at bag 0 and assign each vertex to its root-most
    // containing bag (unique because occurrences are connected).
    let mut bag_depth = vec![usize::MAX; nbags];
    let mut bag_parent = vec![usize::MAX; nbags];
    let mut bfs = std::collections::VecDeque::from([0usize]);
    bag_depth[0] = 0;
    let mut topo = Vec::with_capacity(nbags);
    while let Some(t) = bfs.pop_front() {
        topo.push(t);
        for &u in &adj[t] {
            if bag_depth[u] == usize::MAX {
                bag_depth[u] = bag_depth[t] + 1;
                bag_parent[u] = t;
                bfs.push_back(u);
            }
        }
    }
    let mut assigned_count = vec![0usize; nbags];
    let mut best_depth = vec![usize::MAX; n];
    for t in 0..nbags {
        for &v in clean.bag(t) {
            if bag_depth[t] < best_depth[v] {
                best_depth[v] = bag_depth[t];
            }
        }
    }
    for t in 0..nbags {
        for &v in clean.bag(t) {
            if bag_depth[t] == best_depth[v] {
                // Root-most holder; connectivity of occurrences makes it
                // unique at this depth.
                assigned_count[t] += 1;
                best_depth[v] = usize::MAX; // consume so duplicates don't double-count
            }
        }
    }
    let mut weight = assigned_count.clone();
    for &t in topo.iter().rev() {
        if bag_parent[t] != usize::MAX {
            weight[bag_parent[t]] += weight[t];
        }
    }
    debug_assert_eq!(weight[0], n);

    // Centroid descent: the deepest bag whose subtree holds more than half
    // the vertices. At most one child can exceed n/2, so the walk is unique.
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); nbags];
    for t in 0..nbags {
        if bag_parent[t] != usize::MAX {
            children[bag_parent[t]].push(t);
        }
    }
    let mut t = 0usize;
    loop {
        match children[t].iter().find(|&&c| 2 * weight[c] > n) {
            Some(&c) => t = c,
            None => break,
        }
    }
    let separator: Vec<usize> = clean.bag(t).to_vec();

    // Components of G - S, ordered by smallest vertex.
    let mut in_sep = vec![false; n];
    for &v in &separator {
        in_sep[v] = true;
    }
    let mut seen = in_sep.clone();
    let mut parts = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = Vec::new();
        seen[start] = true;
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            comp.push(v);
            for &w in g.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        comp.sort_unstable();
        let graph = g.induced_subgraph(&comp);
        let td_part = restrict_td(&clean, &comp, n);
        parts.push(SeparatorPart {
            vertices: comp,
            graph,
            td: td_part,
        });
    }
    (separator, parts)
}

/// Restricts `td` to the vertex subset `keep` (sorted, original labels),
/// relabelling bag contents to local indices and simplifying the result.
pub(crate) fn restrict_td(
    td: &TreeDecomposition,
    keep: &[usize],
    nvertices: usize,
) -> TreeDecomposition {
    let mut local = vec![usize::MAX; nvertices];
    for (i, &v) in keep.iter().enumerate() {
        local[v] = i;
    }
    let bags: Vec<Vec<usize>> = td
        .bags
        .iter()
        .map(|bag| {
            bag.iter()
                .filter_map(|&v| (local[v] != usize::MAX).then(|| local[v]))
                .collect()
        })
        .collect();
    let restricted = TreeDecomposition::new(bags, td.edges.clone(), keep.len());
    simplify_bags(&restricted)
}

/// Removes empty bags and bags subsumed by a neighbor, contracting tree
/// edges so the result stays a tree satisfying the same axioms.
fn simplify_bags(td: &TreeDecomposition) -> TreeDecomposition {
    let nbags = td.nbags();
    if nbags == 0 {
        return td.clone();
    }
    let mut bags = td.bags.clone();
    let mut adj: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); nbags];
    for &(a, b) in &td.edges {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut alive = vec![true; nbags];
    let mut alive_count = nbags;
    loop {
        let mut contracted = false;
        for i in 0..nbags {
            if !alive[i] || alive_count == 1 {
                continue;
            }
            // Contract bag i into a neighbor when it is empty or a subset of
            // that neighbor (the neighbor then covers everything i did).
            let target = adj[i]
                .iter()
                .copied()
                .find(|&j| bags[i].is_empty() || is_subset(&bags[i], &bags[j]));
            if let Some(j) = target {
                let neighbors: Vec<usize> = adj[i].iter().copied().collect();
                for k in neighbors {
                    adj[k].remove(&i);
                    if k != j {
                        adj[k].insert(j);
                        adj[j].insert(k);
                    }
                }
                adj[i].clear();
                alive[i] = false;
                alive_count -= 1;
                contracted = true;
            }
        }
        if !contracted {
            break;
        }
    }
    // A lone surviving empty bag only remains when there are no vertices.
    let mut new_id = vec![usize::MAX; nbags];
    let mut new_bags = Vec::with_capacity(alive_count);
    for i in 0..nbags {
        if alive[i] {
            new_id[i] = new_bags.len();
            new_bags.push(std::mem::take(&mut bags[i]));
        }
    }
    let mut new_edges = Vec::new();
    for i in 0..nbags {
        if alive[i] {
            for &j in &adj[i] {
                if i < j {
                    new_edges.push((new_id[i], new_id[j]));
                }
            }
        }
    }
    TreeDecomposition::new(new_bags, new_edges, td.nvertices)
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|v| b.binary_search(v).is_ok())
}
