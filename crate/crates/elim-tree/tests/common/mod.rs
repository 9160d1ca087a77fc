//! Shared test helpers: random graphs with exact decompositions, and the
//! brute-force fill oracle.

use elim_tree::TreeDecomposition;
use rand::prelude::*;
use sparse_core::Graph;

/// Builds a random connected partial k-tree together with an exact
/// decomposition of width ≤ `width`.
///
/// Construction: start from one bag on `width + 1` clique vertices, then
/// attach each further vertex to a random subset of an existing bag. The
/// graph keeps each attachment edge (for connectivity) plus a random subset
/// of the remaining bag-clique edges, so the decomposition is valid by
/// construction.
pub fn random_partial_ktree(
    rng: &mut impl Rng,
    nvertices: usize,
    width: usize,
) -> (Graph, TreeDecomposition) {
    let base = (width + 1).min(nvertices);
    let mut bags: Vec<Vec<usize>> = vec![(0..base).collect()];
    let mut td_edges: Vec<(usize, usize)> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for u in 0..base {
        for v in (u + 1)..base {
            edges.push((u, v));
        }
    }
    for v in base..nvertices {
        let host = rng.gen_range(0..bags.len());
        let mut pool = bags[host].clone();
        pool.shuffle(rng);
        let keep = rng.gen_range(1..=pool.len().min(width));
        let mut bag: Vec<usize> = pool[..keep].to_vec();
        // Guaranteed edge to the first chosen vertex keeps the graph
        // connected; the rest of the bag clique appears with probability 1/2.
        edges.push((bag[0], v));
        for &u in &bag[1..] {
            if rng.gen_bool(0.5) {
                edges.push((u, v));
            }
        }
        bag.push(v);
        td_edges.push((host, bags.len()));
        bags.push(bag);
    }
    let g = Graph::from_edges(nvertices, &edges);
    let td = TreeDecomposition::new(bags, td_edges, nvertices);
    (g, td)
}

/// Brute-force fill oracle: plays the elimination game on `g` under `order`
/// and returns the true elimination-tree parents (`usize::MAX` for roots).
///
/// Eliminating a vertex turns its not-yet-eliminated neighbors into a
/// clique; the parent is the earliest-eliminated of those neighbors.
pub fn elimination_game_parents(g: &Graph, order: &[usize]) -> Vec<usize> {
    let d = g.nvertices();
    let mut pos = vec![0usize; d];
    for (k, &v) in order.iter().enumerate() {
        pos[v] = k;
    }
    let mut adj: Vec<std::collections::BTreeSet<usize>> = (0..d)
        .map(|v| g.neighbors(v).iter().copied().collect())
        .collect();
    let mut parent = vec![usize::MAX; d];
    for &v in order {
        let later: Vec<usize> = adj[v].iter().copied().filter(|&w| pos[w] > pos[v]).collect();
        if let Some(&p) = later.iter().min_by_key(|&&w| pos[w]) {
            parent[v] = p;
        }
        for i in 0..later.len() {
            for j in (i + 1)..later.len() {
                adj[later[i]].insert(later[j]);
                adj[later[j]].insert(later[i]);
            }
        }
    }
    parent
}

/// Ceiling of log base 3/2, used by the height bound.
pub fn ceil_log_3_2(n: usize) -> usize {
    if n <= 1 {
        return 0;
    }
    ((n as f64).ln() / 1.5f64.ln()).ceil() as usize
}
