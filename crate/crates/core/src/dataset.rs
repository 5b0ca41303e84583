//! TU dataset ingestion and whole-corpus compression.
//!
//! A TU dataset directory `DS/` holds `DS_A.txt` (one `i, j` line per
//! directed edge, 1-based global vertex ids), `DS_graph_indicator.txt` (the
//! 1-based graph id of every vertex) and optionally `DS_node_labels.txt` and
//! `DS_edge_labels.txt`, aligned with the vertex and edge lines respectively.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;

use crate::codec::Codec;
use crate::container;
use crate::models::GraphCodec;
use crate::params::{AttrsMode, DatasetParams, ModelKind, ParamsCodec};
use crate::perm::Permutation;
use crate::shuffle::{log2_big, log2_factorial, CanonStats, ShuffleCodec};
use crate::{Error, Graph, Message, Result};

/// A named list of graphs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Corpus {
    pub name: String,
    pub graphs: Vec<Graph>,
}

impl Corpus {
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>) -> Self {
        Self { name: name.into(), graphs }
    }

    pub fn has_vertex_attrs(&self) -> bool {
        self.graphs.iter().any(|g| g.vertex_attrs().is_some())
    }

    pub fn has_edge_attrs(&self) -> bool {
        self.graphs.iter().any(|g| g.edge_attrs().is_some())
    }

    pub fn num_vertices(&self) -> usize {
        self.graphs.iter().map(Graph::n).sum()
    }

    pub fn num_edges(&self) -> usize {
        self.graphs.iter().map(Graph::num_edges).sum()
    }
}

fn dataset_err(msg: impl Into<String>) -> Error {
    Error::Dataset(msg.into())
}

fn read_lines(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).map_err(|e| dataset_err(format!("{}: {e}", path.display())))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

fn parse_int<T: std::str::FromStr>(s: &str, path: &Path, line: usize) -> Result<T> {
    s.trim().parse().map_err(|_| dataset_err(format!("{}:{}: cannot parse {s:?}", path.display(), line + 1)))
}

/// Maps raw labels to dense ids `0..k` in sorted order of the distinct values.
fn densify(raw: &[i64]) -> Vec<u32> {
    let ids: BTreeMap<i64, u32> = {
        let mut distinct: Vec<i64> = raw.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        distinct.into_iter().enumerate().map(|(k, v)| (v, k as u32)).collect()
    };
    raw.iter().map(|v| ids[v]).collect()
}

fn find_prefix(dir: &Path) -> Result<String> {
    let entries = fs::read_dir(dir).map_err(|e| dataset_err(format!("{}: {e}", dir.display())))?;
    let mut found: Vec<String> = entries
        .filter_map(|e| e.ok()?.file_name().into_string().ok())
        .filter_map(|f| f.strip_suffix("_A.txt").map(String::from))
        .collect();
    found.sort();
    match found.len() {
        0 => Err(dataset_err(format!("no *_A.txt file in {}", dir.display()))),
        1 => Ok(found.pop().expect("one entry")),
        _ => Err(dataset_err(format!("several datasets in {}: {}", dir.display(), found.join(", ")))),
    }
}

/// Reads a TU dataset directory.
///
/// Edges listed in both directions are merged. If any graph has a self-loop,
/// every graph in the corpus is marked as allowing them.
pub fn load_tu_dataset(dir: &Path) -> Result<Corpus> {
    let name = find_prefix(dir)?;
    let file = |suffix: &str| -> PathBuf { dir.join(format!("{name}_{suffix}.txt")) };

    let ind_path = file("graph_indicator");
    let indicator: Vec<usize> = read_lines(&ind_path)?
        .iter()
        .enumerate()
        .map(|(k, l)| parse_int(l, &ind_path, k))
        .collect::<Result<_>>()?;
    if indicator.is_empty() {
        return Err(dataset_err("graph indicator is empty"));
    }
    if indicator.contains(&0) {
        return Err(dataset_err("graph ids are 1-based"));
    }
    let num_graphs = *indicator.iter().max().expect("nonempty");
    let mut sizes = vec![0usize; num_graphs];
    let mut local = Vec::with_capacity(indicator.len());
    for &gid in &indicator {
        local.push(sizes[gid - 1]);
        sizes[gid - 1] += 1;
    }
    if let Some(k) = sizes.iter().position(|&s| s == 0) {
        return Err(dataset_err(format!("graph {} has no vertices", k + 1)));
    }

    let a_path = file("A");
    let mut arcs = vec![];
    for (k, line) in read_lines(&a_path)?.iter().enumerate() {
        let (i, j) = line
            .split_once(',')
            .ok_or_else(|| dataset_err(format!("{}:{}: expected \"i, j\"", a_path.display(), k + 1)))?;
        let (i, j): (usize, usize) = (parse_int(i, &a_path, k)?, parse_int(j, &a_path, k)?);
        if i == 0 || j == 0 || i > indicator.len() || j > indicator.len() {
            return Err(dataset_err(format!("{}:{}: vertex id out of range", a_path.display(), k + 1)));
        }
        if indicator[i - 1] != indicator[j - 1] {
            return Err(dataset_err(format!("{}:{}: edge joins two graphs", a_path.display(), k + 1)));
        }
        arcs.push((i - 1, j - 1));
    }

    let labels = |suffix: &str, expected: usize| -> Result<Option<Vec<u32>>> {
        let path = file(suffix);
        if !path.exists() {
            return Ok(None);
        }
        let raw: Vec<i64> = read_lines(&path)?
            .iter()
            .enumerate()
            .map(|(k, l)| parse_int(l.split(',').next().unwrap_or(""), &path, k))
            .collect::<Result<_>>()?;
        if raw.len() != expected {
            return Err(dataset_err(format!("{}: {} labels for {expected} entries", path.display(), raw.len())));
        }
        Ok(Some(densify(&raw)))
    };
    let node_labels = labels("node_labels", indicator.len())?;
    let edge_labels = labels("edge_labels", arcs.len())?;
    let self_loops = arcs.iter().any(|&(i, j)| i == j);

    let mut edges: Vec<BTreeMap<(usize, usize), u32>> = vec![BTreeMap::new(); num_graphs];
    for (k, &(i, j)) in arcs.iter().enumerate() {
        let g = indicator[i] - 1;
        let (a, b) = (local[i].min(local[j]), local[i].max(local[j]));
        let label = edge_labels.as_ref().map_or(0, |l| l[k]);
        if let Some(&prev) = edges[g].get(&(a, b)) {
            if prev != label {
                return Err(dataset_err(format!("edge ({}, {}) listed with different labels", i + 1, j + 1)));
            }
        }
        edges[g].insert((a, b), label);
    }
    let mut vertex_attrs: Vec<Vec<u32>> = vec![vec![]; num_graphs];
    if let Some(l) = &node_labels {
        for (v, &gid) in indicator.iter().enumerate() {
            vertex_attrs[gid - 1].push(l[v]);
        }
    }

    let graphs = edges
        .into_iter()
        .zip(vertex_attrs)
        .zip(&sizes)
        .map(|((e, va), &n)| {
            let (list, ea): (Vec<_>, Vec<_>) = e.into_iter().unzip();
            Graph::try_new(n, list, node_labels.is_some().then_some(va), edge_labels.is_some().then_some(ea), self_loops)
        })
        .collect::<Result<_>>()?;
    Ok(Corpus { name, graphs })
}

/// Writes `corpus` as a TU dataset named after it, each edge in both directions.
pub fn write_tu_dataset(corpus: &Corpus, dir: &Path) -> Result<()> {
    use std::fmt::Write;
    fs::create_dir_all(dir)?;
    let (mut a, mut ind, mut nl, mut el) = (String::new(), String::new(), String::new(), String::new());
    let mut offset = 0;
    for (gid, g) in corpus.graphs.iter().enumerate() {
        for v in 0..g.n() {
            writeln!(ind, "{}", gid + 1).expect("string write");
            writeln!(nl, "{}", g.vertex_attrs().map_or(0, |va| va[v])).expect("string write");
        }
        for (k, &(i, j)) in g.edges().iter().enumerate() {
            let label = g.edge_attrs().map_or(0, |ea| ea[k]);
            let arcs: &[(usize, usize)] = if i == j { &[(i, j)] } else { &[(i, j), (j, i)] };
            for &(x, y) in arcs {
                writeln!(a, "{}, {}", x + offset + 1, y + offset + 1).expect("string write");
                writeln!(el, "{label}").expect("string write");
            }
        }
        offset += g.n();
    }
    let name = &corpus.name;
    fs::write(dir.join(format!("{name}_A.txt")), a)?;
    fs::write(dir.join(format!("{name}_graph_indicator.txt")), ind)?;
    if corpus.has_vertex_attrs() {
        fs::write(dir.join(format!("{name}_node_labels.txt")), nl)?;
    }
    if corpus.has_edge_attrs() {
        fs::write(dir.join(format!("{name}_edge_labels.txt")), el)?;
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CompressOptions {
    pub model: ModelKind,
    pub attrs: AttrsMode,
    pub redraws: bool,
    /// Store the permutation that restores the input order.
    pub keep_order: bool,
    /// Seed of the padding stream that supplies the initial bits.
    pub seed: u64,
}

impl Default for CompressOptions {
    fn default() -> Self {
        Self { model: ModelKind::Er, attrs: AttrsMode::Auto, redraws: false, keep_order: true, seed: 0 }
    }
}

/// Rates and timings of one corpus compression. Rates are in bits per edge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub dataset: String,
    pub model: ModelKind,
    pub attrs: AttrsMode,
    pub redraws: bool,
    pub keep_order: bool,
    pub num_graphs: usize,
    pub num_vertices: usize,
    pub num_edges: usize,
    pub compressed_bytes: usize,
    /// Ordered model on the same graphs plus parameters.
    pub ordered_bits_per_edge: f64,
    /// Everything written, including parameters and initial bits.
    pub shuffle_bits_per_edge: f64,
    /// Shuffle rate without the initial-bits overhead.
    pub net_bits_per_edge: f64,
    pub initial_bits_per_edge: f64,
    pub discount_bits_per_edge: f64,
    pub discount_percent: f64,
    pub param_bits: f64,
    pub encode_seconds: f64,
    pub decode_seconds: Option<f64>,
    pub canonize_seconds: f64,
    pub canonize_share: f64,
}

/// Coding order: largest graphs first, ties in input order.
fn coding_order(graphs: &[Graph]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..graphs.len()).collect();
    idx.sort_by_key(|&k| std::cmp::Reverse(graphs[k].n()));
    idx
}

/// Compresses a corpus into a container, returning the bytes and a report.
///
/// Graphs are pushed smallest first so that the decoder pops the largest
/// first; the parameters go on last. The padding that the first bits-back
/// decode draws is not stored.
pub fn compress_corpus(corpus: &Corpus, opts: &CompressOptions) -> Result<(Vec<u8>, BenchmarkReport)> {
    if corpus.graphs.is_empty() {
        return Err(dataset_err("corpus has no graphs"));
    }
    let started = Instant::now();
    let idx = coding_order(&corpus.graphs);
    let sorted: Vec<Graph> = idx.iter().map(|&k| corpus.graphs[k].clone()).collect();
    let order = opts.keep_order.then(|| Permutation::from_images(idx.clone())).transpose()?;
    let params = DatasetParams::fit(&sorted, opts.model, opts.attrs, opts.redraws, order);
    let graphs: Vec<Graph> = sorted.iter().map(|g| params.conform(g)).collect::<Result<_>>()?;

    let stats = Arc::new(CanonStats::default());
    let mut m = Message::with_pad(opts.seed);
    let mut ordered = Message::with_pad(opts.seed ^ 0x5eed);
    let start = m.length_bits();
    let ordered_start = ordered.length_bits();
    let mut discount = 0.0;
    for k in (0..graphs.len()).rev() {
        let codec = ShuffleCodec::with_stats(params.graph_codec(k)?, stats.clone());
        let c = codec.canonize(&graphs[k]);
        discount += log2_factorial(c.canon.n()) - log2_big(&c.aut_order());
        codec.encode_canonized(&mut m, &c)?;
        codec.ordered.encode(&mut ordered, &c.canon)?;
    }
    let before_params = m.length_bits();
    ParamsCodec.encode(&mut m, &params)?;
    let param_bits = m.length_bits() - before_params;
    let encode_seconds = started.elapsed().as_secs_f64();

    let shuffle_bits = m.length_bits() - start;
    let initial_bits = m.pad_bits();
    let ordered_bits = ordered.length_bits() - ordered_start - ordered.pad_bits() + param_bits;
    let bytes = container::serialize(&m);

    let num_edges = corpus.num_edges();
    let per_edge = |bits: f64| bits / num_edges as f64;
    let canonize_seconds = stats.seconds();
    let report = BenchmarkReport {
        dataset: corpus.name.clone(),
        model: opts.model,
        attrs: opts.attrs,
        redraws: opts.redraws,
        keep_order: opts.keep_order,
        num_graphs: corpus.graphs.len(),
        num_vertices: corpus.num_vertices(),
        num_edges,
        compressed_bytes: bytes.len(),
        ordered_bits_per_edge: per_edge(ordered_bits),
        shuffle_bits_per_edge: per_edge(shuffle_bits),
        net_bits_per_edge: per_edge(shuffle_bits - initial_bits),
        initial_bits_per_edge: per_edge(initial_bits),
        discount_bits_per_edge: per_edge(discount),
        discount_percent: 100.0 * (1.0 - shuffle_bits / ordered_bits),
        param_bits,
        encode_seconds,
        decode_seconds: None,
        canonize_seconds,
        canonize_share: canonize_seconds / encode_seconds,
    };
    Ok((bytes, report))
}

/// Inverse of [`compress_corpus`]. Each graph comes back as the canonical
/// member of its class, in the input order if it was stored.
pub fn decompress_corpus(bytes: &[u8], name: &str) -> Result<Corpus> {
    let mut m = container::deserialize(bytes)?;
    let params = ParamsCodec.decode(&mut m)?;
    let mut graphs = Vec::with_capacity(params.vertex_counts.len());
    for k in 0..params.vertex_counts.len() {
        graphs.push(ShuffleCodec::new(params.graph_codec(k)?).decode(&mut m)?);
    }
    if let Some(order) = &params.order {
        if order.len() != graphs.len() {
            return Err(Error::Format("order does not match the graph count".into()));
        }
        let mut restored = vec![Graph::empty(0); graphs.len()];
        for (k, g) in graphs.into_iter().enumerate() {
            restored[order.apply(k)] = g;
        }
        graphs = restored;
    }
    Ok(Corpus::new(name, graphs))
}

/// Compresses, decompresses and checks that every graph came back isomorphic.
pub fn bench(corpus: &Corpus, opts: &CompressOptions) -> Result<BenchmarkReport> {
    let (bytes, mut report) = compress_corpus(corpus, opts)?;
    let started = Instant::now();
    let decoded = decompress_corpus(&bytes, &corpus.name)?;
    report.decode_seconds = Some(started.elapsed().as_secs_f64());

    let expected = expected_canonical(corpus, opts)?;
    let mut got: Vec<Graph> = decoded.graphs;
    if !opts.keep_order {
        got.sort();
    }
    if got != expected {
        return Err(dataset_err("decoded corpus is not isomorphic to the input"));
    }
    Ok(report)
}

/// The canonical forms [`decompress_corpus`] should produce for `corpus`,
/// sorted when the order is not kept.
pub fn expected_canonical(corpus: &Corpus, opts: &CompressOptions) -> Result<Vec<Graph>> {
    let idx = coding_order(&corpus.graphs);
    let sorted: Vec<Graph> = idx.iter().map(|&k| corpus.graphs[k].clone()).collect();
    let params = DatasetParams::fit(&sorted, opts.model, opts.attrs, opts.redraws, None);
    let mut out: Vec<Graph> = corpus
        .graphs
        .iter()
        .map(|g| Ok(crate::canon::canonize(&params.conform(g)?).canon))
        .collect::<Result<_>>()?;
    if !opts.keep_order {
        out.sort();
    }
    Ok(out)
}

/// Net shuffle coding cost of one graph on a message already holding enough
/// random content to cover the bits-back decode.
pub fn net_rate_single(graph: &Graph, codec: &GraphCodec, seed: u64) -> Result<f64> {
    let shuffle = ShuffleCodec::new(codec.clone());
    let c = shuffle.canonize(graph);
    let discount = log2_factorial(graph.n()) - log2_big(&c.aut_order());
    let words = ((discount + 64.0) / 16.0).ceil() as usize + 1;
    let mut m = Message::random(seed, words);
    let start = m.length_bits();
    shuffle.encode_canonized(&mut m, &c)?;
    Ok(m.length_bits() - start)
}
