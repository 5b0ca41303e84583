//! Shuffle coding: lossless compression of unordered objects.
//!
//! An unordered object (an unlabeled graph, a multiset) is compressed by
//! canonizing it, *decoding* a uniformly chosen ordering from the message
//! (bits-back), and then encoding the resulting ordered object with an
//! ordinary model. The ordering information is thereby reclaimed, and the
//! net cost per object is `log 1/P(f) - log(n!/|Aut(f)|)` bits.
//!
//! Modules, from the bottom up:
//!
//! - [`ans`]: the stack-like rANS [`Message`] and the primitive codecs.
//! - [`perm`]: permutations, Schreier-Sims stabilizer chains, coset canonization.
//! - [`perm_codecs`]: uniform codecs for `S_n`, for a permutation group, and for
//!   left cosets of a permutation group.
//! - [`graph`] and [`canon`]: attributed graphs, canonical labeling, automorphisms.
//! - [`models`]: ordered models (i.i.d. strings, Erdős-Rényi, Pólya urn).
//! - [`shuffle`]: the shuffle codec itself.
//! - [`params`]: per-dataset parameter coding.
//! - [`dataset`]: TU dataset ingestion, corpus compression, reports.

pub mod ans;
pub mod canon;
pub mod codec;
pub mod container;
pub mod dataset;
mod error;
pub mod generate;
pub mod graph;
pub mod models;
pub mod params;
pub mod perm;
pub mod perm_codecs;
pub mod shuffle;

pub use ans::{Bernoulli, Categorical, Message, Uniform};
pub use codec::Codec;
pub use error::{Error, Result};
pub use graph::Graph;
pub use perm::{PermGroup, Permutation, StabilizerChain};
pub use shuffle::{Permutable, ShuffleCodec};
