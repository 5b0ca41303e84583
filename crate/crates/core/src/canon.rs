//! Canonical orderings and automorphism groups.
//!
//! Graphs are canonized by individualization-refinement: colour refinement
//! seeded by vertex attributes and self-loops, then a depth-first search over
//! individualizations of the first smallest non-singleton cell. The least
//! leaf graph is the canonical representative; leaves that coincide give
//! automorphisms, which prune the search by orbits.

use num_bigint::BigUint;

use crate::graph::Graph;
use crate::perm::{PermGroup, Permutation, StabilizerChain};
use crate::{Error, Result};

/// Result of canonizing an object `f`.
#[derive(Debug)]
pub struct Canonized<T> {
    /// `f̄ = canon_perm · f`.
    pub canon: T,
    pub canon_perm: Permutation,
    /// Generators of `Aut(f̄)`.
    pub aut_generators: PermGroup,
    /// Stabilizer chain of `Aut(f̄)`.
    pub aut: StabilizerChain,
}

impl<T> Canonized<T> {
    pub fn aut_order(&self) -> BigUint {
        self.aut.order()
    }

    pub fn log2_aut(&self) -> f64 {
        self.aut.log2_order()
    }
}

fn conjugate_all(pi: &Permutation, auts: &[Permutation]) -> Vec<Permutation> {
    let pi_inv = pi.inverse();
    auts.iter().map(|a| &(pi * a) * &pi_inv).collect()
}

fn finish<T>(canon: T, canon_perm: Permutation, auts_of_input: &[Permutation]) -> Canonized<T> {
    let gens = conjugate_all(&canon_perm, auts_of_input);
    let group = PermGroup::new(canon_perm.len(), gens).expect("degrees agree");
    let aut = group.stabilizer_chain();
    Canonized { canon, canon_perm, aut_generators: group, aut }
}

/// Sorts vertices by `key` and colours each by the start of its run.
fn colors_from_keys<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut colors = vec![0; keys.len()];
    for (pos, &v) in order.iter().enumerate() {
        colors[v] = if pos > 0 && keys[order[pos - 1]] == keys[v] { colors[order[pos - 1]] } else { pos };
    }
    colors
}

fn num_cells(colors: &[usize]) -> usize {
    let mut seen = vec![false; colors.len()];
    colors.iter().filter(|&&c| !std::mem::replace(&mut seen[c], true)).count()
}

struct Refiner {
    /// Neighbours without self-loops, with the connecting edge attribute.
    adj: Vec<Vec<(usize, u32)>>,
}

impl Refiner {
    fn new(g: &Graph) -> Self {
        let adj = g
            .adjacency()
            .into_iter()
            .enumerate()
            .map(|(v, nbrs)| nbrs.into_iter().filter(|&(u, _)| u != v).collect())
            .collect();
        Self { adj }
    }

    fn initial(g: &Graph) -> Vec<usize> {
        let mut loops = vec![None; g.n()];
        for (k, &(i, j)) in g.edges().iter().enumerate() {
            if i == j {
                loops[i] = Some(g.edge_attrs().map_or(0, |a| a[k]));
            }
        }
        let keys: Vec<_> = (0..g.n()).map(|v| (g.vertex_attrs().map_or(0, |a| a[v]), loops[v])).collect();
        colors_from_keys(&keys)
    }

    /// Refines to the coarsest equitable partition finer than `colors`.
    fn refine(&self, colors: &mut Vec<usize>) {
        let mut cells = num_cells(colors);
        loop {
            if cells == colors.len() {
                return;
            }
            let keys: Vec<(usize, Vec<(usize, u32)>)> = (0..colors.len())
                .map(|v| {
                    let mut sig: Vec<_> = self.adj[v].iter().map(|&(u, a)| (colors[u], a)).collect();
                    sig.sort_unstable();
                    (colors[v], sig)
                })
                .collect();
            *colors = colors_from_keys(&keys);
            let refined = num_cells(colors);
            if refined == cells {
                return;
            }
            cells = refined;
        }
    }
}

/// Members of the first smallest non-singleton cell, ascending.
fn target_cell(colors: &[usize]) -> Option<Vec<usize>> {
    let n = colors.len();
    let mut size = vec![0usize; n];
    for &c in colors {
        size[c] += 1;
    }
    let c = (0..n).filter(|&c| size[c] > 1).min_by_key(|&c| (size[c], c))?;
    Some((0..n).filter(|&v| colors[v] == c).collect())
}

fn individualize(colors: &mut [usize], v: usize) {
    let c = colors[v];
    for (u, x) in colors.iter_mut().enumerate() {
        if *x == c && u != v {
            *x = c + 1;
        }
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

struct Leaf {
    path: Vec<usize>,
    perm: Permutation,
    graph: Graph,
}

struct Search<'a> {
    g: &'a Graph,
    refiner: Refiner,
    first: Option<Leaf>,
    best: Option<Leaf>,
    auts: Vec<Permutation>,
}

impl Search<'_> {
    fn pruned(&self, w: usize, explored: &[usize], path: &[usize]) -> bool {
        let mut parent: Vec<usize> = (0..self.g.n()).collect();
        for a in self.auts.iter().filter(|a| path.iter().all(|&v| a.apply(v) == v)) {
            for (i, &j) in a.images().iter().enumerate() {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        let rw = find(&mut parent, w);
        explored.iter().any(|&x| find(&mut parent, x) == rw)
    }

    /// Returns the depth to jump back to, if any.
    fn dfs(&mut self, colors: Vec<usize>, path: &mut Vec<usize>) -> Option<usize> {
        let Some(cell) = target_cell(&colors) else {
            return self.leaf(&colors, path);
        };
        let depth = path.len();
        let mut explored = vec![];
        for w in cell {
            if !explored.is_empty() && self.pruned(w, &explored, path) {
                continue;
            }
            explored.push(w);
            let mut child = colors.clone();
            individualize(&mut child, w);
            self.refiner.refine(&mut child);
            path.push(w);
            let jump = self.dfs(child, path);
            path.pop();
            if let Some(t) = jump {
                if t < depth {
                    return Some(t);
                }
            }
        }
        None
    }

    fn leaf(&mut self, colors: &[usize], path: &[usize]) -> Option<usize> {
        let perm = Permutation::from_images_unchecked(colors.to_vec());
        let graph = self.g.apply_perm(&perm).expect("degree matches");
        let Some(first) = &self.first else {
            let leaf = Leaf { path: path.to_vec(), perm, graph };
            self.best = Some(Leaf { path: leaf.path.clone(), perm: leaf.perm.clone(), graph: leaf.graph.clone() });
            self.first = Some(leaf);
            return None;
        };
        if graph == first.graph {
            let gamma = perm.inverse_then(&first.perm);
            let common = path.iter().zip(&first.path).take_while(|(a, b)| a == b).count();
            self.auts.push(gamma);
            return Some(common);
        }
        let best = self.best.as_ref().expect("set with first");
        match graph.cmp(&best.graph) {
            std::cmp::Ordering::Less => self.best = Some(Leaf { path: path.to_vec(), perm, graph }),
            std::cmp::Ordering::Equal => {
                let gamma = perm.inverse_then(&best.perm);
                self.auts.push(gamma);
            }
            std::cmp::Ordering::Greater => {}
        }
        None
    }
}

/// Canonical ordering and automorphism group of a graph.
pub fn canonize(g: &Graph) -> Canonized<Graph> {
    let refiner = Refiner::new(g);
    let mut colors = Refiner::initial(g);
    refiner.refine(&mut colors);
    let mut search = Search { g, refiner, first: None, best: None, auts: vec![] };
    search.dfs(colors, &mut vec![]);
    let best = search.best.expect("search reaches a leaf");
    finish(best.graph, best.perm, &search.auts)
}

/// Visits every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&Permutation)) {
    let mut a: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    f(&Permutation::from_images_unchecked(a.clone()));
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(&Permutation::from_images_unchecked(a.clone()));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Exhaustive canonization over all of `S_n`, for `n <= 9`.
pub fn canonize_bruteforce(g: &Graph) -> Result<Canonized<Graph>> {
    if g.n() > 9 {
        return Err(Error::TooLarge(format!("brute-force canonization needs n <= 9, got {}", g.n())));
    }
    let mut best: Option<(Graph, Permutation)> = None;
    let mut auts = vec![];
    let mut chain = StabilizerChain::trivial(g.n());
    for_each_permutation(g.n(), |s| {
        let h = g.apply_perm(s).expect("degree matches");
        if &h == g && !chain.contains(s) {
            auts.push(s.clone());
            chain = PermGroup::new(g.n(), auts.clone()).expect("degrees agree").stabilizer_chain();
        }
        if best.as_ref().is_none_or(|(b, _)| h < *b) {
            best = Some((h, s.clone()));
        }
    });
    let (canon, perm) = best.expect("S_n is nonempty");
    Ok(finish(canon, perm, &auts))
}

/// A graph whose edge attributes have been turned into vertices.
#[derive(Clone, Debug)]
pub struct EdgeEmbedding {
    /// Original vertices are `0..n`; the vertex for edge `k` is `n + k`.
    pub graph: Graph,
    pub n: usize,
}

/// Replaces every edge `{i, j}` by a vertex adjacent to `i` and `j` that
/// carries the edge attribute. Original vertex colours stay below
/// `max vertex attribute + 1`; edge colours are shifted above it.
pub fn embed_edge_colors(g: &Graph) -> EdgeEmbedding {
    let n = g.n();
    let offset = g.vertex_attrs().and_then(|a| a.iter().max().copied()).map_or(1, |m| m + 1);
    let mut attrs: Vec<u32> = g.vertex_attrs().map_or_else(|| vec![0; n], |a| a.to_vec());
    let mut edges = Vec::with_capacity(2 * g.num_edges());
    for (k, &(i, j)) in g.edges().iter().enumerate() {
        let e = n + k;
        attrs.push(offset + g.edge_attrs().map_or(0, |a| a[k]));
        edges.push((i, e));
        if i != j {
            edges.push((j, e));
        }
    }
    let graph = Graph::try_new(n + g.num_edges(), edges, Some(attrs), None, false).expect("embedding is a simple graph");
    EdgeEmbedding { graph, n }
}

/// Canonizes through [`embed_edge_colors`], restricting the result to the
/// original vertices.
pub fn canonize_via_embedding(g: &Graph) -> Canonized<Graph> {
    let emb = embed_edge_colors(g);
    let c = canonize(&emb.graph);
    let n = emb.n;
    // Original vertices carry the smallest colours, so they occupy 0..n.
    let restrict = |p: &Permutation| Permutation::from_images_unchecked(p.images()[..n].to_vec());
    let perm = restrict(&c.canon_perm);
    let canon = g.apply_perm(&perm).expect("degree matches");
    let gens: Vec<_> = c.aut_generators.generators().iter().map(restrict).filter(|a| !a.is_identity()).collect();
    let group = PermGroup::new(n, gens).expect("degrees agree");
    let aut = group.stabilizer_chain();
    Canonized { canon, canon_perm: perm, aut_generators: group, aut }
}

/// Canonizes a sequence by stable sorting. `s · x` places `x[i]` at `s(i)`.
pub fn canonize_sequence<T: Ord + Clone>(x: &[T]) -> Canonized<Vec<T>> {
    let n = x.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].cmp(&x[b]));
    let mut images = vec![0; n];
    for (k, &i) in order.iter().enumerate() {
        images[i] = k;
    }
    let sorted: Vec<T> = order.iter().map(|&i| x[i].clone()).collect();
    let mut blocks = vec![];
    let mut start = 0;
    for k in 1..=n {
        if k == n || sorted[k] != sorted[start] {
            if k - start > 1 {
                blocks.push((start..k).collect());
            }
            start = k;
        }
    }
    let aut = StabilizerChain::symmetric_on_blocks(n, &blocks).expect("runs are disjoint");
    let aut_generators = aut.group();
    Canonized { canon: sorted, canon_perm: Permutation::from_images_unchecked(images), aut_generators, aut }
}

pub fn canonize_string(x: &str) -> Canonized<Vec<char>> {
    canonize_sequence(&x.chars().collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn order(c: &Canonized<Graph>) -> u64 {
        c.aut_order().try_into().unwrap()
    }

    fn check_sound(g: &Graph, c: &Canonized<Graph>) {
        assert_eq!(g.apply_perm(&c.canon_perm).unwrap(), c.canon);
        for a in c.aut_generators.generators() {
            assert_eq!(c.canon.apply_perm(a).unwrap(), c.canon);
        }
    }

    fn cycle(n: usize) -> Graph {
        Graph::plain(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn worked_graph_has_two_automorphisms() {
        let g = Graph::plain(4, &[(0, 1), (0, 2), (1, 2), (2, 3)]).unwrap();
        let c = canonize(&g);
        check_sound(&g, &c);
        assert_eq!(order(&c), 2);
    }

    #[test]
    fn triangle_and_hexagon() {
        let k3 = cycle(3);
        let c = canonize(&k3);
        assert_eq!(order(&c), 6);
        for_each_permutation(3, |s| assert_eq!(canonize(&k3.apply_perm(s).unwrap()).canon, c.canon));

        let c6 = cycle(6);
        let c = canonize(&c6);
        check_sound(&c6, &c);
        assert_eq!(order(&c), 12);
        assert_eq!(order(&canonize_bruteforce(&c6).unwrap()), 12);
        for_each_permutation(6, |s| assert_eq!(canonize(&c6.apply_perm(s).unwrap()).canon, c.canon));
    }

    #[test]
    fn bruteforce_examples() {
        assert_eq!(order(&canonize_bruteforce(&Graph::empty(3)).unwrap()), 6);
        let g = Graph::plain(3, &[(0, 1)]).unwrap();
        let mut images = std::collections::HashSet::new();
        for_each_permutation(3, |s| {
            images.insert(g.apply_perm(s).unwrap());
        });
        assert_eq!(images.len(), 3);
        assert!(canonize_bruteforce(&Graph::empty(10)).is_err());
    }

    #[test]
    fn heaps_algorithm_visits_all() {
        let mut seen = std::collections::HashSet::new();
        for_each_permutation(5, |s| {
            seen.insert(s.clone());
        });
        assert_eq!(seen.len(), 120);
        let mut count = 0;
        for_each_permutation(0, |_| count += 1);
        assert_eq!(count, 1);
    }

    #[test]
    fn edge_colour_embedding() {
        let path = Graph::plain(3, &[(0, 1), (1, 2)]).unwrap();
        let same = path.with_attrs(None, Some(vec![4, 4])).unwrap();
        assert_eq!(order(&canonize_via_embedding(&same)), order(&canonize(&path)));
        let distinct = path.with_attrs(None, Some(vec![0, 1])).unwrap();
        assert_eq!(order(&canonize_via_embedding(&distinct)), 1);
        assert_eq!(order(&canonize(&distinct)), 1);
        let tri = cycle(3).with_attrs(None, Some(vec![0, 1, 1])).unwrap();
        let c = canonize_via_embedding(&tri);
        check_sound(&tri, &c);
        assert_eq!(order(&c), 2);
        assert_eq!(order(&canonize_bruteforce(&tri).unwrap()), 2);
        assert_eq!(embed_edge_colors(&tri).graph.n(), 6);
    }

    #[test]
    fn strings() {
        let c = canonize_string("eaTm");
        assert_eq!(c.canon.iter().collect::<String>(), "Taem");
        assert_eq!(order_of(&c), 1);
        let c = canonize_string("aab");
        assert_eq!(c.canon.iter().collect::<String>(), "aab");
        assert_eq!(order_of(&c), 2);
        let c = canonize_string("");
        assert!(c.canon.is_empty());
        assert_eq!(order_of(&c), 1);
        let c = canonize_string("banana");
        assert_eq!(order_of(&c), 12);
        let x: Vec<char> = "banana".chars().collect();
        let mut moved = vec![' '; 6];
        for (i, &ch) in x.iter().enumerate() {
            moved[c.canon_perm.apply(i)] = ch;
        }
        assert_eq!(moved, c.canon);
    }

    fn order_of<T>(c: &Canonized<T>) -> u64 {
        c.aut_order().try_into().unwrap()
    }

    #[test]
    fn self_loops_are_colours() {
        let g = Graph::try_new(3, vec![(0, 1), (1, 2), (0, 0)], None, None, true).unwrap();
        let c = canonize(&g);
        check_sound(&g, &c);
        assert_eq!(order(&c), 1);
        let h = Graph::try_new(3, vec![(0, 1), (1, 2), (0, 0), (2, 2)], None, None, true).unwrap();
        assert_eq!(order(&canonize(&h)), 2);
    }

    #[test]
    fn large_symmetric_graphs() {
        let empty = Graph::empty(40);
        let c = canonize(&empty);
        let expected: BigUint = (1..=40u32).map(BigUint::from).product();
        assert_eq!(c.aut_order(), expected);

        let star = Graph::plain(30, &(1..30).map(|i| (0, i)).collect::<Vec<_>>()).unwrap();
        let expected: BigUint = (1..=29u32).map(BigUint::from).product();
        assert_eq!(canonize(&star).aut_order(), expected);

        let c20 = cycle(20);
        assert_eq!(order(&canonize(&c20)), 40);
    }

    fn random_graph(rng: &mut StdRng, n: usize, p: f64, attrs: bool) -> Graph {
        let loops = attrs && rng.gen_bool(0.3);
        let mut edges = vec![];
        for i in 0..n {
            for j in i..n {
                if (i != j || loops) && rng.gen_bool(p) {
                    edges.push((i, j));
                }
            }
        }
        let va = attrs.then(|| (0..n).map(|_| rng.gen_range(0..2)).collect());
        let ea = attrs.then(|| (0..edges.len()).map(|_| rng.gen_range(0..2)).collect());
        Graph::try_new(n, edges, va, ea, loops).unwrap()
    }

    #[test]
    fn agrees_with_bruteforce_on_all_five_vertex_graphs() {
        let pairs: Vec<(usize, usize)> = (0..5).flat_map(|i| (i + 1..5).map(move |j| (i, j))).collect();
        for mask in 0u32..1 << pairs.len() {
            let edges: Vec<_> = pairs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &e)| e).collect();
            let g = Graph::plain(5, &edges).unwrap();
            let fast = canonize(&g);
            let slow = canonize_bruteforce(&g).unwrap();
            check_sound(&g, &fast);
            assert_eq!(fast.aut_order(), slow.aut_order(), "{edges:?}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn invariance(seed in any::<u64>(), n in 0usize..40, p in 0.0f64..1.0, attrs in any::<bool>()) {
            let mut rng = StdRng::seed_from_u64(seed);
            let g = random_graph(&mut rng, n, p, attrs);
            let s = Permutation::random(n, &mut rng);
            let c = canonize(&g);
            check_sound(&g, &c);
            let d = canonize(&g.apply_perm(&s).unwrap());
            prop_assert_eq!(&d.canon, &c.canon);
            prop_assert_eq!(d.aut_order(), c.aut_order());
        }

        #[test]
        fn aut_order_matches_oracle(seed in any::<u64>(), n in 0usize..7, p in 0.0f64..1.0, attrs in any::<bool>()) {
            let mut rng = StdRng::seed_from_u64(seed);
            let g = random_graph(&mut rng, n, p, attrs);
            let fast = canonize(&g);
            let slow = canonize_bruteforce(&g).unwrap();
            prop_assert_eq!(fast.aut_order(), slow.aut_order());
            prop_assert_eq!(canonize_via_embedding(&g).aut_order(), slow.aut_order());
        }
    }
}
