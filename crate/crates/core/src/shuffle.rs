//! Shuffle coding: codecs for unordered objects built from codecs for
//! ordered ones.
//!
//! Encoding `f` canonizes it, decodes a left coset `s Aut(f̄)` from the
//! message, and encodes `s · f̄` with the ordered codec. Decoding reverses
//! the steps and returns `f̄`. The net cost is `log 1/P(f) - log(n!/|Aut(f)|)`
//! for exchangeable `P`.

use std::collections::BTreeSet;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::ans::Message;
use crate::canon::{canonize, canonize_sequence, for_each_permutation, Canonized};
use crate::codec::Codec;
use crate::graph::Graph;
use crate::perm::Permutation;
use crate::perm_codecs::UniformLCoset;
use crate::{Error, Result};

/// A class of ordered objects with an `S_n` action and a canonical ordering.
pub trait Permutable: Sized + Clone + Eq {
    /// `n`, the degree of the acting symmetric group.
    fn degree(&self) -> usize;

    fn permuted(&self, s: &Permutation) -> Result<Self>;

    fn canonized(&self) -> Canonized<Self>;
}

impl Permutable for Graph {
    fn degree(&self) -> usize {
        self.n()
    }

    fn permuted(&self, s: &Permutation) -> Result<Self> {
        self.apply_perm(s)
    }

    fn canonized(&self) -> Canonized<Self> {
        canonize(self)
    }
}

/// Sequences, acted on by moving the element at `i` to `s(i)`.
impl<T: Ord + Clone> Permutable for Vec<T> {
    fn degree(&self) -> usize {
        self.len()
    }

    fn permuted(&self, s: &Permutation) -> Result<Self> {
        if s.len() != self.len() {
            return Err(Error::DegreeMismatch { expected: self.len(), actual: s.len() });
        }
        let mut out = self.clone();
        for (i, x) in self.iter().enumerate() {
            out[s.apply(i)] = x.clone();
        }
        Ok(out)
    }

    fn canonized(&self) -> Canonized<Self> {
        canonize_sequence(self)
    }
}

/// `log2 x` for a big integer, accurate to double precision.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return (x.to_u64().expect("fits").max(1) as f64).log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("fits") as f64;
    top.log2() + shift as f64
}

pub fn log2_factorial(n: usize) -> f64 {
    (2..=n).map(|j| (j as f64).log2()).sum()
}

/// `log2 n! - log2 |Aut(f)|`: the bits saved by forgetting the order of `f`.
pub fn discount_bits<T: Permutable>(f: &T) -> f64 {
    let n = f.degree();
    let factorial: BigUint = (1..=n as u64).map(BigUint::from).product();
    let aut = f.canonized().aut_order();
    log2_big(&factorial) - log2_big(&aut)
}

/// Cumulative canonization cost of a [`ShuffleCodec`].
#[derive(Debug, Default)]
pub struct CanonStats {
    calls: AtomicU64,
    nanos: AtomicU64,
}

impl CanonStats {
    pub fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn seconds(&self) -> f64 {
        self.nanos.load(Ordering::Relaxed) as f64 * 1e-9
    }

    fn record(&self, start: Instant) {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.nanos.fetch_add(start.elapsed().as_nanos() as u64, Ordering::Relaxed);
    }
}

/// Codec for unordered objects: accepts any member of an isomorphism class
/// and decodes to its canonical member.
#[derive(Clone, Debug)]
pub struct ShuffleCodec<C> {
    pub ordered: C,
    stats: Arc<CanonStats>,
}

impl<C> ShuffleCodec<C>
where
    C: Codec,
    C::Symbol: Permutable,
{
    pub fn new(ordered: C) -> Self {
        Self { ordered, stats: Arc::default() }
    }

    pub fn with_stats(ordered: C, stats: Arc<CanonStats>) -> Self {
        Self { ordered, stats }
    }

    pub fn stats(&self) -> &Arc<CanonStats> {
        &self.stats
    }

    /// Canonizes `f`, recording the time spent.
    pub fn canonize(&self, f: &C::Symbol) -> Canonized<C::Symbol> {
        let start = Instant::now();
        let c = f.canonized();
        self.stats.record(start);
        c
    }

    /// [`Codec::encode`] for an object that has already been canonized.
    pub fn encode_canonized(&self, m: &mut Message, c: &Canonized<C::Symbol>) -> Result<()> {
        let coset = UniformLCoset::new(&c.aut)?;
        let s = coset.decode(m)?;
        let g = c.canon.permuted(&s)?;
        self.ordered.encode(m, &g)
    }

    /// Measures one encode of `f` onto a copy of `m`.
    pub fn rate_report(&self, m: &Message, f: &C::Symbol) -> Result<RateReport> {
        let c = self.canonize(f);
        let mut ordered = m.clone();
        self.ordered.encode(&mut ordered, &c.canon)?;
        let mut shuffled = m.clone();
        self.encode(&mut shuffled, f)?;
        let discount_bits = log2_factorial(f.degree()) - c.log2_aut();
        Ok(RateReport {
            ordered_bits: ordered.length_bits() - m.length_bits(),
            discount_bits,
            net_bits: shuffled.length_bits() - m.length_bits(),
            aut_order: c.aut_order(),
            initial_bits_overhead: shuffled.pad_bits() - m.pad_bits(),
        })
    }
}

impl<C> Codec for ShuffleCodec<C>
where
    C: Codec,
    C::Symbol: Permutable,
{
    type Symbol = C::Symbol;

    fn encode(&self, m: &mut Message, f: &C::Symbol) -> Result<()> {
        self.encode_canonized(m, &self.canonize(f))
    }

    fn decode(&self, m: &mut Message) -> Result<C::Symbol> {
        let g = self.ordered.decode(m)?;
        let c = self.canonize(&g);
        let coset = UniformLCoset::new(&c.aut)?;
        coset.encode(m, &c.canon_perm.inverse())?;
        Ok(c.canon)
    }

    fn bits(&self, f: &C::Symbol) -> Option<f64> {
        let ordered = self.ordered.bits(f)?;
        Some(ordered - discount_bits(f))
    }
}

/// Measured cost of shuffle coding one object.
#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    /// Cost of the canonical member under the ordered codec.
    pub ordered_bits: f64,
    /// `log2 n! - log2 |Aut(f)|`.
    pub discount_bits: f64,
    /// Measured growth of the message under shuffle coding.
    pub net_bits: f64,
    pub aut_order: BigUint,
    /// Padding consumed because the message was too short for the coset decode.
    pub initial_bits_overhead: f64,
}

/// Outcome of [`symmetrize_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetrizeReport {
    /// Number of distinct relabelings of the object.
    pub class_size: usize,
    /// Largest difference in code length between two members of the class.
    pub max_spread_bits: f64,
    /// `Σ_{g ≃ f} P(g)`.
    pub q_mass: f64,
    /// `(n! / |Aut(f)|) · P(f)`.
    pub expected_q_mass: f64,
}

impl SymmetrizeReport {
    pub fn exchangeable(&self, tol: f64) -> bool {
        self.max_spread_bits <= tol && (self.q_mass - self.expected_q_mass).abs() <= tol * self.expected_q_mass.max(1e-300)
    }
}

/// Code length of `x` measured on a message with prior content.
pub fn measured_bits<C: Codec>(codec: &C, x: &C::Symbol) -> Result<f64> {
    let mut m = Message::random(0x5eed, 64);
    let before = m.length_bits();
    codec.encode(&mut m, x)?;
    Ok(m.length_bits() - before)
}

/// Checks exchangeability of `codec` on the isomorphism class of `f` by
/// enumerating all relabelings. Intended for `n <= 6`.
pub fn symmetrize_check<C>(codec: &C, f: &C::Symbol) -> Result<SymmetrizeReport>
where
    C: Codec,
    C::Symbol: Permutable + Ord,
{
    let n = f.degree();
    if n > 6 {
        return Err(Error::TooLarge(format!("symmetrize_check enumerates n! relabelings; n = {n}")));
    }
    let mut class = BTreeSet::new();
    let mut err = None;
    for_each_permutation(n, |s| match f.permuted(s) {
        Ok(g) => {
            class.insert(g);
        }
        Err(e) => err = Some(e),
    });
    if let Some(e) = err {
        return Err(e);
    }
    let bits = |g: &C::Symbol| match codec.bits(g) {
        Some(b) => Ok(b),
        None => measured_bits(codec, g),
    };
    let own = bits(f)?;
    let mut lo = own;
    let mut hi = own;
    let mut q_mass = 0.0;
    for g in &class {
        let b = bits(g)?;
        lo = lo.min(b);
        hi = hi.max(b);
        q_mass += (-b).exp2();
    }
    Ok(SymmetrizeReport {
        class_size: class.len(),
        max_spread_bits: hi - lo,
        q_mass,
        expected_q_mass: class.len() as f64 * (-own).exp2(),
    })
}
