//! Dataset-level parameters, coded at the front of a compressed corpus.
//!
//! Lists of naturals use a length header, a bit-width header and a
//! log-uniform code per element: the bit length `k` of the element uniformly
//! over `0..=B`, then its `k - 1` bits below the leading one uniformly.

use crate::ans::{quantize, Categorical, Message, Uniform};
use crate::codec::Codec;
use crate::graph::Graph;
use crate::models::{er_edge_bernoulli, AttrCodec, GraphCodec};
use crate::perm::Permutation;
use crate::perm_codecs::UniformS;
use crate::{Error, Result};

pub const LIST_LENGTH_BITS: u32 = 46;
/// Bit widths `0..=32` are representable.
pub const MAX_ELEMENT_BITS: u32 = 32;
/// Precision of attribute tables built from counts.
pub const ATTR_PRECISION: u32 = 20;

fn bit_length(x: u64) -> u32 {
    64 - x.leading_zeros()
}

/// Codec for lists of naturals below `2^32`.
#[derive(Clone, Copy, Debug, Default)]
pub struct NaturalList;

impl NaturalList {
    fn length_codec() -> Uniform {
        Uniform::new(1 << LIST_LENGTH_BITS).expect("valid size")
    }

    fn width_codec() -> Uniform {
        Uniform::new(MAX_ELEMENT_BITS as u64 + 1).expect("valid size")
    }
}

impl Codec for NaturalList {
    type Symbol = Vec<u64>;

    fn encode(&self, m: &mut Message, xs: &Vec<u64>) -> Result<()> {
        if xs.len() as u64 >= 1 << LIST_LENGTH_BITS {
            return Err(Error::TooLarge(format!("list of {} naturals", xs.len())));
        }
        if let Some(&max) = xs.iter().max() {
            let width = bit_length(max);
            if width > MAX_ELEMENT_BITS {
                return Err(Error::TooLarge(format!("natural {max} needs more than {MAX_ELEMENT_BITS} bits")));
            }
            let lengths = Uniform::new(width as u64 + 1)?;
            for &x in xs.iter().rev() {
                let k = bit_length(x);
                if k >= 2 {
                    Uniform::new(1 << (k - 1))?.encode_value(m, x - (1 << (k - 1)))?;
                }
                lengths.encode_value(m, k as u64)?;
            }
            Self::width_codec().encode_value(m, width as u64)?;
        }
        Self::length_codec().encode_value(m, xs.len() as u64)
    }

    fn decode(&self, m: &mut Message) -> Result<Vec<u64>> {
        let len = Self::length_codec().decode_value(m)? as usize;
        if len == 0 {
            return Ok(vec![]);
        }
        let width = Self::width_codec().decode_value(m)?;
        let lengths = Uniform::new(width + 1)?;
        let mut xs = Vec::with_capacity(len.min(1 << 20));
        for _ in 0..len {
            let k = lengths.decode_value(m)? as u32;
            let x = match k {
                0 => 0,
                1 => 1,
                _ => (1 << (k - 1)) + Uniform::new(1 << (k - 1))?.decode_value(m)?,
            };
            xs.push(x);
        }
        Ok(xs)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Er,
    Pu,
}

/// How attributes are modelled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrsMode {
    /// Categorical tables fitted to the corpus.
    Auto,
    /// Attributes are dropped.
    None,
    /// Uniform over the alphabet.
    Uniform,
}

/// Per-attribute model parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AttrModel {
    Counts(Vec<u64>),
    Uniform(u64),
}

impl AttrModel {
    fn fit(values: impl Iterator<Item = u32>, mode: AttrsMode) -> Self {
        let mut counts: Vec<u64> = vec![];
        for v in values {
            let v = v as usize;
            if v >= counts.len() {
                counts.resize(v + 1, 0);
            }
            counts[v] += 1;
        }
        match mode {
            AttrsMode::Uniform => AttrModel::Uniform(counts.len().max(1) as u64),
            _ => AttrModel::Counts(counts),
        }
    }

    pub fn codec(&self) -> Result<AttrCodec> {
        Ok(match self {
            AttrModel::Counts(counts) if counts.iter().any(|&c| c > 0) => {
                AttrCodec::Categorical(Categorical::new(&quantize(counts, ATTR_PRECISION)?)?)
            }
            AttrModel::Counts(_) => AttrCodec::Uniform(Uniform::new(1)?),
            AttrModel::Uniform(k) => AttrCodec::Uniform(Uniform::new(*k)?),
        })
    }
}

/// Everything the decoder needs before the first graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetParams {
    pub model: ModelKind,
    pub attrs: AttrsMode,
    pub redraws: bool,
    pub self_loops: bool,
    /// Vertex counts in coding order (non-increasing).
    pub vertex_counts: Vec<usize>,
    pub vertex_attrs: Option<AttrModel>,
    pub edge_attrs: Option<AttrModel>,
    /// Total edges and non-edges, for the Erdős-Rényi model.
    pub er_counts: Option<(u64, u64)>,
    /// Edges per graph in coding order, for the Pólya urn model.
    pub pu_edge_counts: Option<Vec<usize>>,
    /// `order(k)` is the original position of the `k`-th coded graph.
    pub order: Option<Permutation>,
}

fn pairs(n: usize, self_loops: bool) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2 + if self_loops { n } else { 0 }
}

/// `(runs, diffs)` of the sorted counts: run lengths of equal values, and
/// the distinct values as differences from their predecessor, starting at 0.
pub fn run_length(counts: &[usize]) -> (Vec<u64>, Vec<u64>) {
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let (mut runs, mut diffs) = (vec![], vec![]);
    let mut prev = 0;
    for (i, &c) in sorted.iter().enumerate() {
        if i > 0 && c == sorted[i - 1] {
            *runs.last_mut().expect("run started") += 1;
        } else {
            runs.push(1);
            diffs.push((c - prev) as u64);
            prev = c;
        }
    }
    (runs, diffs)
}

/// Inverse of [`run_length`], ascending.
pub fn expand_runs(runs: &[u64], diffs: &[u64]) -> Result<Vec<usize>> {
    if runs.len() != diffs.len() || runs.contains(&0) {
        return Err(Error::Format("inconsistent vertex count runs".into()));
    }
    let mut out = vec![];
    let mut value = 0u64;
    for (&r, &d) in runs.iter().zip(diffs) {
        value += d;
        out.extend(std::iter::repeat_n(value as usize, r as usize));
    }
    Ok(out)
}

fn flag() -> Uniform {
    Uniform::new(2).expect("valid size")
}

impl DatasetParams {
    /// Fits parameters to graphs given in coding order.
    pub fn fit(graphs: &[Graph], model: ModelKind, attrs: AttrsMode, redraws: bool, order: Option<Permutation>) -> Self {
        let self_loops = graphs.iter().any(Graph::self_loops);
        let vertex_counts: Vec<usize> = graphs.iter().map(Graph::n).collect();
        let use_attrs = attrs != AttrsMode::None;
        let vertex_attrs = (use_attrs && graphs.iter().any(|g| g.vertex_attrs().is_some()))
            .then(|| AttrModel::fit(graphs.iter().flat_map(|g| g.vertex_attrs().map_or_else(|| vec![0; g.n()], <[u32]>::to_vec)), attrs));
        let edge_attrs = (use_attrs && graphs.iter().any(|g| g.edge_attrs().is_some()))
            .then(|| AttrModel::fit(graphs.iter().flat_map(|g| g.edge_attrs().map_or_else(|| vec![0; g.num_edges()], <[u32]>::to_vec)), attrs));
        let edges: u64 = graphs.iter().map(|g| g.num_edges() as u64).sum();
        let all: u64 = graphs.iter().map(|g| pairs(g.n(), self_loops)).sum();
        let (er_counts, pu_edge_counts) = match model {
            ModelKind::Er => (Some((edges, all - edges)), None),
            ModelKind::Pu => (None, Some(graphs.iter().map(Graph::num_edges).collect())),
        };
        Self { model, attrs, redraws, self_loops, vertex_counts, vertex_attrs, edge_attrs, er_counts, pu_edge_counts, order }
    }

    /// Brings `g` into the form the model codes: attributes dropped when
    /// unmodelled, self-loop flag aligned with the dataset.
    pub fn conform(&self, g: &Graph) -> Result<Graph> {
        let va = self.vertex_attrs.as_ref().map(|_| g.vertex_attrs().map_or_else(|| vec![0; g.n()], <[u32]>::to_vec));
        let ea = self.edge_attrs.as_ref().map(|_| g.edge_attrs().map_or_else(|| vec![0; g.num_edges()], <[u32]>::to_vec));
        g.with_attrs(va, ea)?.with_self_loops(self.self_loops)
    }

    /// Ordered model for the `k`-th coded graph.
    pub fn graph_codec(&self, k: usize) -> Result<GraphCodec> {
        let n = *self.vertex_counts.get(k).ok_or_else(|| Error::Parameter(format!("no graph {k}")))?;
        let mut codec = match self.model {
            ModelKind::Er => {
                let (e, ne) = self.er_counts.ok_or_else(|| Error::Parameter("missing edge counts".into()))?;
                GraphCodec::erdos_renyi(n, er_edge_bernoulli(e, e + ne)?, self.self_loops)
            }
            ModelKind::Pu => {
                let m = self.pu_edge_counts.as_ref().and_then(|c| c.get(k)).ok_or_else(|| Error::Parameter("missing edge counts".into()))?;
                GraphCodec::polya_urn(n, *m, self.self_loops, self.redraws)
            }
        };
        if let Some(a) = &self.vertex_attrs {
            codec = codec.with_vertex_attrs(a.codec()?);
        }
        if let Some(a) = &self.edge_attrs {
            codec = codec.with_edge_attrs(a.codec()?);
        }
        Ok(codec)
    }

    /// Checks that `graphs` (in coding order) match these parameters.
    pub fn validate(&self, graphs: &[Graph]) -> Result<()> {
        let fitted = Self::fit(graphs, self.model, self.attrs, self.redraws, self.order.clone());
        let same_attrs = |a: &Option<AttrModel>, b: &Option<AttrModel>| match (a, b) {
            (Some(AttrModel::Counts(x)), Some(AttrModel::Counts(y))) => x == y,
            (Some(AttrModel::Uniform(x)), Some(AttrModel::Uniform(y))) => x >= y,
            (None, None) => true,
            _ => false,
        };
        if fitted.vertex_counts != self.vertex_counts
            || fitted.self_loops && !self.self_loops
            || fitted.er_counts != self.er_counts
            || fitted.pu_edge_counts != self.pu_edge_counts
            || !same_attrs(&self.vertex_attrs, &fitted.vertex_attrs)
            || !same_attrs(&self.edge_attrs, &fitted.edge_attrs)
        {
            return Err(Error::Parameter("parameters do not match the corpus".into()));
        }
        if self.vertex_counts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Parameter("graphs must be in non-increasing size order".into()));
        }
        Ok(())
    }

    fn encode_attr(m: &mut Message, a: &Option<AttrModel>) -> Result<()> {
        match a {
            Some(AttrModel::Counts(c)) => NaturalList.encode(m, &c.clone()),
            Some(AttrModel::Uniform(k)) => NaturalList.encode(m, &vec![*k]),
            None => Ok(()),
        }
    }

    fn decode_attr(m: &mut Message, present: bool, mode: AttrsMode) -> Result<Option<AttrModel>> {
        if !present {
            return Ok(None);
        }
        let list = NaturalList.decode(m)?;
        Ok(Some(match mode {
            AttrsMode::Uniform => match list[..] {
                [k] if k > 0 => AttrModel::Uniform(k),
                _ => return Err(Error::Format("bad uniform alphabet size".into())),
            },
            _ => AttrModel::Counts(list),
        }))
    }
}

/// Codec for [`DatasetParams`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ParamsCodec;

impl Codec for ParamsCodec {
    type Symbol = DatasetParams;

    fn encode(&self, m: &mut Message, p: &DatasetParams) -> Result<()> {
        let list = NaturalList;
        if let Some(order) = &p.order {
            if order.len() != p.vertex_counts.len() {
                return Err(Error::Parameter("order does not cover the corpus".into()));
            }
            UniformS::new(order.len()).encode(m, order)?;
        }
        if let Some(counts) = &p.pu_edge_counts {
            if counts.len() != p.vertex_counts.len() {
                return Err(Error::Parameter("one edge count per graph required".into()));
            }
            for (&e, &n) in counts.iter().zip(&p.vertex_counts).rev() {
                Uniform::new(pairs(n, p.self_loops) + 1)?.encode_value(m, e as u64)?;
            }
        }
        if let Some((e, ne)) = p.er_counts {
            list.encode(m, &vec![e, ne])?;
        }
        DatasetParams::encode_attr(m, &p.edge_attrs)?;
        DatasetParams::encode_attr(m, &p.vertex_attrs)?;
        let (runs, diffs) = run_length(&p.vertex_counts);
        list.encode(m, &diffs)?;
        list.encode(m, &runs)?;
        let attrs = match p.attrs {
            AttrsMode::Auto => 0,
            AttrsMode::None => 1,
            AttrsMode::Uniform => 2,
        };
        for bit in [p.order.is_some(), p.edge_attrs.is_some(), p.vertex_attrs.is_some(), p.self_loops, p.redraws] {
            flag().encode_value(m, bit as u64)?;
        }
        Uniform::new(3)?.encode_value(m, attrs)?;
        flag().encode_value(m, (p.model == ModelKind::Pu) as u64)
    }

    fn decode(&self, m: &mut Message) -> Result<DatasetParams> {
        let list = NaturalList;
        let model = if flag().decode_value(m)? == 1 { ModelKind::Pu } else { ModelKind::Er };
        let attrs = [AttrsMode::Auto, AttrsMode::None, AttrsMode::Uniform][Uniform::new(3)?.decode_value(m)? as usize];
        let redraws = flag().decode_value(m)? == 1;
        let self_loops = flag().decode_value(m)? == 1;
        let has_vertex_attrs = flag().decode_value(m)? == 1;
        let has_edge_attrs = flag().decode_value(m)? == 1;
        let has_order = flag().decode_value(m)? == 1;
        let runs = list.decode(m)?;
        let diffs = list.decode(m)?;
        let mut vertex_counts = expand_runs(&runs, &diffs)?;
        vertex_counts.reverse();
        let vertex_attrs = DatasetParams::decode_attr(m, has_vertex_attrs, attrs)?;
        let edge_attrs = DatasetParams::decode_attr(m, has_edge_attrs, attrs)?;
        let er_counts = match model {
            ModelKind::Er => match list.decode(m)?[..] {
                [e, ne] => Some((e, ne)),
                _ => return Err(Error::Format("bad edge count pair".into())),
            },
            ModelKind::Pu => None,
        };
        let pu_edge_counts = match model {
            ModelKind::Pu => Some(
                vertex_counts
                    .iter()
                    .map(|&n| Ok(Uniform::new(pairs(n, self_loops) + 1)?.decode_value(m)? as usize))
                    .collect::<Result<Vec<_>>>()?,
            ),
            ModelKind::Er => None,
        };
        let order = if has_order { Some(UniformS::new(vertex_counts.len()).decode(m)?) } else { None };
        Ok(DatasetParams { model, attrs, redraws, self_loops, vertex_counts, vertex_attrs, edge_attrs, er_counts, pu_edge_counts, order })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn roundtrip_list(xs: Vec<u64>) -> f64 {
        let mut m = Message::random(1, 8);
        let before = m.length_bits();
        NaturalList.encode(&mut m, &xs).unwrap();
        let used = m.length_bits() - before;
        assert_eq!(NaturalList.decode(&mut m).unwrap(), xs);
        assert_eq!(m, Message::random(1, 8));
        used
    }

    #[test]
    fn natural_list_examples() {
        let empty = roundtrip_list(vec![]);
        assert!((empty - 46.0).abs() < 1e-3, "{empty}");
        let zeros = roundtrip_list(vec![0, 0, 0]);
        assert!((zeros - (46.0 + 33f64.log2())).abs() < 0.1, "{zeros}");
        let used = roundtrip_list(vec![5, 5, 7]);
        assert!((used - (46.0 + 6.0 + 3.0 * (2.0 + 2.0))).abs() <= 2.0, "{used}");
        roundtrip_list(vec![u32::MAX as u64, 0, 1, 2, 3]);
        assert!(NaturalList.encode(&mut Message::new(), &vec![1 << 32]).is_err());
    }

    #[test]
    fn vertex_count_runs() {
        assert_eq!(run_length(&[5, 5, 5]), (vec![3], vec![5]));
        assert_eq!(run_length(&[7, 5, 5]), (vec![2, 1], vec![5, 2]));
        assert_eq!(run_length(&[]), (vec![], vec![]));
        assert_eq!(expand_runs(&[2, 1], &[5, 2]).unwrap(), vec![5, 5, 7]);
        assert!(expand_runs(&[0], &[1]).is_err());
    }

    fn single_edge_corpus() -> Vec<Graph> {
        vec![Graph::plain(3, &[(0, 1)]).unwrap(); 10]
    }

    #[test]
    fn er_counts_for_single_edges() {
        let p = DatasetParams::fit(&single_edge_corpus(), ModelKind::Er, AttrsMode::Auto, false, None);
        assert_eq!(p.er_counts, Some((10, 20)));
        assert_eq!(p.vertex_attrs, None);
        p.validate(&single_edge_corpus()).unwrap();
        assert!(p.validate(&single_edge_corpus()[..9]).is_err());
    }

    fn params_roundtrip(p: &DatasetParams) {
        let mut m = Message::random(2, 8);
        ParamsCodec.encode(&mut m, p).unwrap();
        assert_eq!(&ParamsCodec.decode(&mut m).unwrap(), p);
        assert_eq!(m, Message::random(2, 8));
    }

    #[test]
    fn params_roundtrip_all_modes() {
        let graphs = vec![
            Graph::try_new(4, vec![(0, 1), (2, 3), (1, 1)], Some(vec![0, 2, 2, 1]), Some(vec![1, 0, 1]), true).unwrap(),
            Graph::try_new(2, vec![(0, 1)], Some(vec![0, 0]), Some(vec![3]), true).unwrap(),
        ];
        for model in [ModelKind::Er, ModelKind::Pu] {
            for attrs in [AttrsMode::Auto, AttrsMode::None, AttrsMode::Uniform] {
                for order in [None, Some(Permutation::transposition(2, 0, 1))] {
                    let p = DatasetParams::fit(&graphs, model, attrs, model == ModelKind::Pu, order);
                    params_roundtrip(&p);
                    for (k, g) in graphs.iter().enumerate() {
                        let g = p.conform(g).unwrap();
                        let codec = p.graph_codec(k).unwrap();
                        let mut m = Message::random(3, 64);
                        codec.encode(&mut m, &g).unwrap();
                        assert_eq!(codec.decode(&mut m).unwrap(), g);
                    }
                }
            }
        }
        let p = DatasetParams::fit(&graphs, ModelKind::Er, AttrsMode::Uniform, false, None);
        assert_eq!(p.vertex_attrs, Some(AttrModel::Uniform(3)));
        assert_eq!(p.edge_attrs, Some(AttrModel::Uniform(4)));
    }

    proptest! {
        #[test]
        fn natural_lists(xs in proptest::collection::vec(0u64..1 << 32, 0..50)) {
            roundtrip_list(xs);
        }

        #[test]
        fn runs_invert(counts in proptest::collection::vec(0usize..100, 0..40)) {
            let (runs, diffs) = run_length(&counts);
            let mut sorted = counts.clone();
            sorted.sort_unstable();
            prop_assert_eq!(expand_runs(&runs, &diffs).unwrap(), sorted);
        }
    }
}
