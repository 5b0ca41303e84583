//! Ordered models: i.i.d. strings, Erdős-Rényi graphs and the Pólya urn
//! edge model, with optional i.i.d. vertex and edge attributes.

use std::collections::HashSet;

use crate::ans::{quantize, Bernoulli, Categorical, Message, Uniform, DEFAULT_PRECISION};
use crate::codec::{Codec, Iid};
use crate::graph::Graph;
use crate::shuffle::ShuffleCodec;
use crate::{Error, Result};

/// Precision of the fixed-point Erdős-Rényi edge probability.
pub const ER_PRECISION: u32 = 20;

/// Edge probability `edges / pairs` on a `2^20` grid, kept away from 0 and 1.
pub fn er_edge_bernoulli(edges: u64, pairs: u64) -> Result<Bernoulli> {
    Bernoulli::from_counts(edges, pairs.saturating_sub(edges), ER_PRECISION)
}

/// Fixed-length strings with i.i.d. characters.
#[derive(Clone, Debug)]
pub struct StringCodec {
    alphabet: Vec<char>,
    inner: Iid<Categorical>,
}

impl StringCodec {
    /// `alphabet` is sorted internally; `masses` follow its given order and
    /// must sum to a power of two.
    pub fn new(alphabet: &[char], masses: &[u64], len: usize) -> Result<Self> {
        if alphabet.len() != masses.len() {
            return Err(Error::Parameter("alphabet and masses differ in length".into()));
        }
        let mut pairs: Vec<(char, u64)> = alphabet.iter().copied().zip(masses.iter().copied()).collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Parameter("repeated character in alphabet".into()));
        }
        let (alphabet, masses): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        Ok(Self { alphabet, inner: Iid::new(Categorical::new(&masses)?, len) })
    }

    fn index(&self, c: char) -> Result<usize> {
        self.alphabet
            .binary_search(&c)
            .map_err(|_| Error::Parameter(format!("character {c:?} not in alphabet")))
    }
}

impl Codec for StringCodec {
    type Symbol = Vec<char>;

    fn encode(&self, m: &mut Message, x: &Vec<char>) -> Result<()> {
        let ids = x.iter().map(|&c| self.index(c)).collect::<Result<Vec<_>>>()?;
        self.inner.encode(m, &ids)
    }

    fn decode(&self, m: &mut Message) -> Result<Vec<char>> {
        Ok(self.inner.decode(m)?.into_iter().map(|i| self.alphabet[i]).collect())
    }

    fn bits(&self, x: &Vec<char>) -> Option<f64> {
        let ids = x.iter().map(|&c| self.index(c).ok()).collect::<Option<Vec<_>>>()?;
        self.inner.bits(&ids)
    }
}

/// Codec for one attribute value.
#[derive(Clone, Debug)]
pub enum AttrCodec {
    Categorical(Categorical),
    /// Uniform over `0..k`, used by the uniform-attribute ablation.
    Uniform(Uniform),
}

impl AttrCodec {
    pub fn alphabet_size(&self) -> usize {
        match self {
            AttrCodec::Categorical(c) => c.len(),
            AttrCodec::Uniform(u) => u.size() as usize,
        }
    }
}

impl Codec for AttrCodec {
    type Symbol = u32;

    fn encode(&self, m: &mut Message, x: &u32) -> Result<()> {
        match self {
            AttrCodec::Categorical(c) => c.encode(m, &(*x as usize)),
            AttrCodec::Uniform(u) => u.encode(m, &(*x as usize)),
        }
    }

    fn decode(&self, m: &mut Message) -> Result<u32> {
        let x = match self {
            AttrCodec::Categorical(c) => c.decode(m)?,
            AttrCodec::Uniform(u) => u.decode(m)?,
        };
        Ok(x as u32)
    }

    fn bits(&self, x: &u32) -> Option<f64> {
        match self {
            AttrCodec::Categorical(c) => c.bits(&(*x as usize)),
            AttrCodec::Uniform(u) => u.bits(&(*x as usize)),
        }
    }
}

/// Urn state while coding a Pólya urn edge sequence.
#[derive(Clone, Debug)]
struct Urn {
    masses: Vec<u64>,
    neighbors: Vec<HashSet<usize>>,
    self_loops: bool,
    redraws: bool,
}

impl Urn {
    fn empty(n: usize, self_loops: bool, redraws: bool) -> Self {
        Self { masses: vec![1; n], neighbors: vec![HashSet::new(); n], self_loops, redraws }
    }

    fn insert(&mut self, (i, j): (usize, usize)) {
        self.neighbors[i].insert(j);
        self.neighbors[j].insert(i);
        self.masses[i] += 1;
        if i != j {
            self.masses[j] += 1;
        }
    }

    fn remove(&mut self, (i, j): (usize, usize)) {
        self.neighbors[i].remove(&j);
        self.neighbors[j].remove(&i);
        self.masses[i] -= 1;
        if i != j {
            self.masses[j] -= 1;
        }
    }

    fn first(&self) -> Result<Categorical> {
        Categorical::new(&quantize(&self.masses, DEFAULT_PRECISION)?)
    }

    /// Second endpoint given the first, excluding the first vertex unless
    /// self-loops are allowed and its neighbours unless redraws are.
    fn second(&self, first: usize) -> Result<Categorical> {
        let mut w = self.masses.clone();
        if !self.self_loops {
            w[first] = 0;
        }
        if !self.redraws {
            for &u in &self.neighbors[first] {
                w[u] = 0;
            }
        }
        Categorical::new(&quantize(&w, DEFAULT_PRECISION)?)
    }
}

/// One edge as an ordered endpoint pair drawn from the urn.
struct UrnEdge<'a> {
    urn: &'a Urn,
}

impl Codec for UrnEdge<'_> {
    type Symbol = Vec<usize>;

    fn encode(&self, m: &mut Message, x: &Vec<usize>) -> Result<()> {
        let [a, b] = x[..] else {
            return Err(Error::Parameter(format!("expected two endpoints, got {x:?}")));
        };
        self.urn.second(a)?.encode(m, &b)?;
        self.urn.first()?.encode(m, &a)
    }

    fn decode(&self, m: &mut Message) -> Result<Vec<usize>> {
        let a = self.urn.first()?.decode(m)?;
        let b = self.urn.second(a)?.decode(m)?;
        Ok(vec![a, b])
    }
}

/// Pólya urn model over edge sequences. Each edge is shuffle coded as an
/// unordered pair.
#[derive(Clone, Debug)]
pub struct PolyaUrnEdges {
    pub n: usize,
    pub num_edges: usize,
    pub self_loops: bool,
    pub redraws: bool,
}

impl Codec for PolyaUrnEdges {
    type Symbol = Vec<(usize, usize)>;

    fn encode(&self, m: &mut Message, x: &Vec<(usize, usize)>) -> Result<()> {
        if x.len() != self.num_edges {
            return Err(Error::Parameter(format!("expected {} edges, got {}", self.num_edges, x.len())));
        }
        let mut urn = Urn::empty(self.n, self.self_loops, self.redraws);
        for &(i, j) in x {
            if i >= self.n || j >= self.n || (i == j && !self.self_loops) {
                return Err(Error::Graph(format!("edge ({i}, {j}) not allowed by the urn")));
            }
            urn.insert((i, j));
        }
        for &(i, j) in x.iter().rev() {
            urn.remove((i, j));
            ShuffleCodec::new(UrnEdge { urn: &urn }).encode(m, &vec![i, j])?;
        }
        Ok(())
    }

    fn decode(&self, m: &mut Message) -> Result<Vec<(usize, usize)>> {
        let mut urn = Urn::empty(self.n, self.self_loops, self.redraws);
        let mut edges = Vec::with_capacity(self.num_edges);
        for _ in 0..self.num_edges {
            let pair = ShuffleCodec::new(UrnEdge { urn: &urn }).decode(m)?;
            let e = (pair[0], pair[1]);
            urn.insert(e);
            edges.push(e);
        }
        Ok(edges)
    }
}

/// Edge structure of a graph model.
#[derive(Clone, Debug)]
pub enum Structure {
    ErdosRenyi(Bernoulli),
    /// The edge set, coded by shuffle coding the urn's edge sequence.
    PolyaUrn(ShuffleCodec<PolyaUrnEdges>),
}

/// Ordered graph model on a fixed vertex count: edge structure, then
/// i.i.d. vertex attributes, then i.i.d. edge attributes in edge order.
#[derive(Clone, Debug)]
pub struct GraphCodec {
    pub n: usize,
    pub self_loops: bool,
    pub structure: Structure,
    pub vertex_attrs: Option<AttrCodec>,
    pub edge_attrs: Option<AttrCodec>,
}

impl GraphCodec {
    /// Every vertex pair independently present; with `self_loops`, each
    /// loop too, with the same probability.
    pub fn erdos_renyi(n: usize, edge: Bernoulli, self_loops: bool) -> Self {
        Self { n, self_loops, structure: Structure::ErdosRenyi(edge), vertex_attrs: None, edge_attrs: None }
    }

    pub fn polya_urn(n: usize, num_edges: usize, self_loops: bool, redraws: bool) -> Self {
        let edges = PolyaUrnEdges { n, num_edges, self_loops, redraws };
        Self {
            n,
            self_loops,
            structure: Structure::PolyaUrn(ShuffleCodec::new(edges)),
            vertex_attrs: None,
            edge_attrs: None,
        }
    }

    pub fn with_vertex_attrs(mut self, codec: AttrCodec) -> Self {
        self.vertex_attrs = Some(codec);
        self
    }

    pub fn with_edge_attrs(mut self, codec: AttrCodec) -> Self {
        self.edge_attrs = Some(codec);
        self
    }

    fn check(&self, g: &Graph) -> Result<()> {
        if g.n() != self.n {
            return Err(Error::DegreeMismatch { expected: self.n, actual: g.n() });
        }
        if g.self_loops() != self.self_loops {
            return Err(Error::Graph(format!("self-loop flag {} does not match model", g.self_loops())));
        }
        if g.vertex_attrs().is_some() != self.vertex_attrs.is_some() {
            return Err(Error::Graph("vertex attributes do not match model".into()));
        }
        if g.edge_attrs().is_some() != self.edge_attrs.is_some() {
            return Err(Error::Graph("edge attributes do not match model".into()));
        }
        Ok(())
    }

    fn pairs(&self) -> impl DoubleEndedIterator<Item = (usize, usize)> + '_ {
        let loops = self.self_loops;
        (0..self.n).flat_map(move |i| (0..i + usize::from(loops)).map(move |j| (j, i)))
    }
}

impl Codec for GraphCodec {
    type Symbol = Graph;

    fn encode(&self, m: &mut Message, g: &Graph) -> Result<()> {
        self.check(g)?;
        if let (Some(c), Some(attrs)) = (&self.edge_attrs, g.edge_attrs()) {
            for a in attrs.iter().rev() {
                c.encode(m, a)?;
            }
        }
        if let (Some(c), Some(attrs)) = (&self.vertex_attrs, g.vertex_attrs()) {
            for a in attrs.iter().rev() {
                c.encode(m, a)?;
            }
        }
        match &self.structure {
            Structure::ErdosRenyi(edge) => {
                let edges: HashSet<(usize, usize)> = g.edges().iter().copied().collect();
                for e in self.pairs().rev() {
                    edge.encode(m, &edges.contains(&e))?;
                }
            }
            Structure::PolyaUrn(codec) => codec.encode(m, &g.edges().to_vec())?,
        }
        Ok(())
    }

    fn decode(&self, m: &mut Message) -> Result<Graph> {
        let edges = match &self.structure {
            Structure::ErdosRenyi(edge) => {
                let mut edges = vec![];
                for e in self.pairs() {
                    if edge.decode(m)? {
                        edges.push(e);
                    }
                }
                edges
            }
            Structure::PolyaUrn(codec) => codec.decode(m)?,
        };
        let vertex_attrs = match &self.vertex_attrs {
            Some(c) => Some((0..self.n).map(|_| c.decode(m)).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        let edge_attrs = match &self.edge_attrs {
            Some(c) => Some((0..edges.len()).map(|_| c.decode(m)).collect::<Result<Vec<_>>>()?),
            None => None,
        };
        // Edges come out sorted by (larger, smaller) endpoint; attributes
        // follow the sorted order of the constructed graph.
        let g = Graph::try_new(self.n, edges, vertex_attrs, None, self.self_loops)?;
        match edge_attrs {
            Some(ea) => g.with_attrs(g.vertex_attrs().map(<[u32]>::to_vec), Some(ea)),
            None => Ok(g),
        }
    }

    fn bits(&self, g: &Graph) -> Option<f64> {
        self.check(g).ok()?;
        let Structure::ErdosRenyi(edge) = &self.structure else {
            return None;
        };
        let k = g.num_edges() as f64;
        let pairs = self.pairs().count() as f64;
        let mut bits = k * edge.bits(&true)? + (pairs - k) * edge.bits(&false)?;
        if let (Some(c), Some(attrs)) = (&self.vertex_attrs, g.vertex_attrs()) {
            bits += attrs.iter().map(|a| c.bits(a)).sum::<Option<f64>>()?;
        }
        if let (Some(c), Some(attrs)) = (&self.edge_attrs, g.edge_attrs()) {
            bits += attrs.iter().map(|a| c.bits(a)).sum::<Option<f64>>()?;
        }
        Some(bits)
    }
}
