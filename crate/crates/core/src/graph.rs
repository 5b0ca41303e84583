//! Undirected graphs with optional vertex and edge attributes.

use std::collections::HashSet;

use crate::perm::Permutation;
use crate::{Error, Result};

/// An undirected graph on vertices `0..n`.
///
/// Edges are stored normalized (`i <= j`) and sorted; `edge_attrs`, when
/// present, is aligned with `edges`. A self-loop `{i, i}` is only allowed
/// when `self_loops` is set. The derived ordering is the fixed total order
/// used to pick canonical representatives.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    vertex_attrs: Option<Vec<u32>>,
    edge_attrs: Option<Vec<u32>>,
    self_loops: bool,
}

impl Graph {
    pub fn try_new(
        n: usize,
        edges: Vec<(usize, usize)>,
        vertex_attrs: Option<Vec<u32>>,
        edge_attrs: Option<Vec<u32>>,
        self_loops: bool,
    ) -> Result<Self> {
        if let Some(va) = &vertex_attrs {
            if va.len() != n {
                return Err(Error::Graph(format!("{} vertex attributes for {n} vertices", va.len())));
            }
        }
        if let Some(ea) = &edge_attrs {
            if ea.len() != edges.len() {
                return Err(Error::Graph(format!("{} edge attributes for {} edges", ea.len(), edges.len())));
            }
        }
        let mut keyed: Vec<((usize, usize), u32)> = edges
            .into_iter()
            .enumerate()
            .map(|(k, (i, j))| ((i.min(j), i.max(j)), edge_attrs.as_ref().map_or(0, |a| a[k])))
            .collect();
        for &((i, j), _) in &keyed {
            if j >= n {
                return Err(Error::Graph(format!("edge ({i}, {j}) out of range for {n} vertices")));
            }
            if i == j && !self_loops {
                return Err(Error::Graph(format!("self-loop at {i} but self-loops are disabled")));
            }
        }
        keyed.sort_unstable();
        if let Some(w) = keyed.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Graph(format!("duplicate edge {:?}", w[0].0)));
        }
        let has_edge_attrs = edge_attrs.is_some();
        let (edges, attrs): (Vec<_>, Vec<_>) = keyed.into_iter().unzip();
        Ok(Self { n, edges, vertex_attrs, edge_attrs: has_edge_attrs.then_some(attrs), self_loops })
    }

    /// Unattributed simple graph.
    pub fn plain(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::try_new(n, edges.to_vec(), None, None, false)
    }

    pub fn empty(n: usize) -> Self {
        Self { n, edges: vec![], vertex_attrs: None, edge_attrs: None, self_loops: false }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn vertex_attrs(&self) -> Option<&[u32]> {
        self.vertex_attrs.as_deref()
    }

    pub fn edge_attrs(&self) -> Option<&[u32]> {
        self.edge_attrs.as_deref()
    }

    pub fn self_loops(&self) -> bool {
        self.self_loops
    }

    pub fn num_self_loops(&self) -> usize {
        self.edges.iter().filter(|(i, j)| i == j).count()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.binary_search(&(i.min(j), i.max(j))).is_ok()
    }

    /// Index of `{i, j}` in [`Self::edges`].
    pub fn edge_index(&self, i: usize, j: usize) -> Option<usize> {
        self.edges.binary_search(&(i.min(j), i.max(j))).ok()
    }

    /// Neighbor lists with the attribute of the connecting edge (0 without
    /// edge attributes). A self-loop appears once in its vertex's list.
    pub fn adjacency(&self) -> Vec<Vec<(usize, u32)>> {
        let mut adj = vec![vec![]; self.n];
        for (k, &(i, j)) in self.edges.iter().enumerate() {
            let a = self.edge_attrs.as_ref().map_or(0, |x| x[k]);
            adj[i].push((j, a));
            if i != j {
                adj[j].push((i, a));
            }
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            if i != j {
                deg[j] += 1;
            }
        }
        deg
    }

    /// Copy with attributes and the self-loop flag replaced.
    pub fn with_attrs(&self, vertex_attrs: Option<Vec<u32>>, edge_attrs: Option<Vec<u32>>) -> Result<Self> {
        Self::try_new(self.n, self.edges.clone(), vertex_attrs, edge_attrs, self.self_loops)
    }

    pub fn with_self_loops(mut self, allowed: bool) -> Result<Self> {
        if !allowed && self.num_self_loops() > 0 {
            return Err(Error::Graph("graph has self-loops".into()));
        }
        self.self_loops = allowed;
        Ok(self)
    }

    /// Relabels vertex `i` as `s(i)`.
    pub fn apply_perm(&self, s: &Permutation) -> Result<Self> {
        if s.len() != self.n {
            return Err(Error::DegreeMismatch { expected: self.n, actual: s.len() });
        }
        let mut keyed: Vec<((usize, usize), u32)> = self
            .edges
            .iter()
            .enumerate()
            .map(|(k, &(i, j))| {
                let (a, b) = (s.apply(i), s.apply(j));
                ((a.min(b), a.max(b)), self.edge_attrs.as_ref().map_or(0, |x| x[k]))
            })
            .collect();
        keyed.sort_unstable();
        let (edges, attrs): (Vec<_>, Vec<_>) = keyed.into_iter().unzip();
        let vertex_attrs = self.vertex_attrs.as_ref().map(|va| {
            let mut out = vec![0; self.n];
            for (i, &a) in va.iter().enumerate() {
                out[s.apply(i)] = a;
            }
            out
        });
        Ok(Self {
            n: self.n,
            edges,
            vertex_attrs,
            edge_attrs: self.edge_attrs.is_some().then_some(attrs),
            self_loops: self.self_loops,
        })
    }

    /// Set of edges, for tests and quick comparisons.
    pub fn edge_set(&self) -> HashSet<(usize, usize)> {
        self.edges.iter().copied().collect()
    }
}
