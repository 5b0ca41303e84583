//! Random graph generators for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::Graph;

/// `G(n, p)`: every pair independently with probability `p`.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = vec![];
    for i in 0..n {
        for j in 0..i {
            if rng.gen_bool(p) {
                edges.push((j, i));
            }
        }
    }
    Graph::plain(n, &edges).expect("simple graph")
}

/// Barabási-Albert preferential attachment: a clique on `m + 1` vertices,
/// then each new vertex links to `m` distinct earlier vertices chosen with
/// probability proportional to degree.
pub fn barabasi_albert<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Graph {
    let m = m.max(1);
    let core = (m + 1).min(n);
    let mut edges = vec![];
    let mut ends = vec![];
    for i in 0..core {
        for j in 0..i {
            edges.push((j, i));
            ends.extend([i, j]);
        }
    }
    for v in core..n {
        let mut targets: Vec<usize> = vec![];
        while targets.len() < m {
            let t = *ends.choose(rng).expect("core has edges");
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for t in targets {
            edges.push((t, v));
            ends.extend([t, v]);
        }
    }
    Graph::plain(n, &edges).expect("simple graph")
}

/// Adds uniformly random vertex and edge attributes.
pub fn with_random_attrs<R: Rng + ?Sized>(g: &Graph, vertex_alphabet: u32, edge_alphabet: u32, rng: &mut R) -> Graph {
    let va = (vertex_alphabet > 0).then(|| (0..g.n()).map(|_| rng.gen_range(0..vertex_alphabet)).collect());
    let ea = (edge_alphabet > 0).then(|| (0..g.num_edges()).map(|_| rng.gen_range(0..edge_alphabet)).collect());
    g.with_attrs(va, ea).expect("attribute lengths match")
}

/// Adds each possible self-loop with probability `p`.
pub fn with_random_self_loops<R: Rng + ?Sized>(g: &Graph, p: f64, rng: &mut R) -> Graph {
    let mut edges = g.edges().to_vec();
    edges.extend((0..g.n()).filter(|_| rng.gen_bool(p)).map(|i| (i, i)));
    Graph::try_new(g.n(), edges, g.vertex_attrs().map(<[u32]>::to_vec), None, true).expect("valid graph")
}
