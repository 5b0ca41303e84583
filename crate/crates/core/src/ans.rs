//! Stack-like rANS coder and the primitive uniform, Bernoulli and categorical codecs.
//!
//! The state is a 64-bit head kept in `[2^48, 2^64)` and a stack of 16-bit
//! words. Probabilities are fixed-point masses with a power-of-two
//! denominator of at most `2^48`; the renormalization interval is a multiple
//! of every admissible denominator, which keeps encode and decode exact
//! inverses for all precisions up to 48 bits.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::codec::Codec;
use crate::{Error, Result};

/// Bits per tail word.
pub const WORD_BITS: u32 = 16;
/// Largest supported fixed-point precision (denominator `2^48`).
pub const MAX_PRECISION: u32 = 48;
/// Lower end of the head interval; also the head of the initial message.
pub const HEAD_MIN: u64 = 1 << 48;
/// Default precision for Bernoulli and quantized categorical models.
pub const DEFAULT_PRECISION: u32 = 32;

/// Deterministic pseudo-random words consumed when a decode runs past the
/// bottom of the stack.
#[derive(Clone, Debug)]
struct Pad {
    rng: ChaCha8Rng,
    words: u64,
}

/// The rANS message: a head register plus a stack of words.
#[derive(Clone, Debug)]
pub struct Message {
    head: u64,
    tail: Vec<u16>,
    pad: Option<Pad>,
}

impl PartialEq for Message {
    fn eq(&self, other: &Self) -> bool {
        self.head == other.head && self.tail == other.tail
    }
}

impl Eq for Message {}

impl Default for Message {
    fn default() -> Self {
        Self::new()
    }
}

impl Message {
    /// The fixed initial message `m0`: head at the bottom of the interval, empty tail.
    pub fn new() -> Self {
        Self { head: HEAD_MIN, tail: Vec::new(), pad: None }
    }

    /// `m0` backed by a seeded padding stream, so that bits-back decodes near
    /// the bottom of the stack draw fresh pseudo-random words instead of failing.
    pub fn with_pad(seed: u64) -> Self {
        Self {
            head: HEAD_MIN,
            tail: Vec::new(),
            pad: Some(Pad { rng: ChaCha8Rng::seed_from_u64(seed), words: 0 }),
        }
    }

    /// A message pre-filled with `words` pseudo-random tail words and a random head.
    pub fn random(seed: u64, words: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let head = HEAD_MIN | (rng.next_u64() & (u64::MAX >> 1)) | (1 << 63);
        let tail = (0..words).map(|_| rng.next_u32() as u16).collect();
        Self { head, tail, pad: None }
    }

    pub(crate) fn from_parts(head: u64, tail: Vec<u16>) -> Result<Self> {
        if head < HEAD_MIN {
            return Err(Error::Format(format!("head {head:#x} below the renormalization interval")));
        }
        Ok(Self { head, tail, pad: None })
    }

    pub fn head(&self) -> u64 {
        self.head
    }

    pub fn tail(&self) -> &[u16] {
        &self.tail
    }

    /// Real-valued message length `l(m)` in bits: `log2(head) + 16 * |tail|`.
    pub fn length_bits(&self) -> f64 {
        (self.head as f64).log2() + (WORD_BITS as usize * self.tail.len()) as f64
    }

    /// Whole-word size of the message in bits, as it would be stored.
    pub fn num_bits(&self) -> usize {
        64 + WORD_BITS as usize * self.tail.len()
    }

    /// Number of padding bits drawn so far (initial-bits overhead).
    pub fn pad_bits(&self) -> f64 {
        self.pad.as_ref().map_or(0.0, |p| (p.words * WORD_BITS as u64) as f64)
    }

    pub fn is_initial(&self) -> bool {
        self.head == HEAD_MIN && self.tail.is_empty()
    }

    /// Drops the padding source; later underflows become errors.
    pub fn without_pad(mut self) -> Self {
        self.pad = None;
        self
    }

    fn pull_word(&mut self) -> Result<u16> {
        if let Some(w) = self.tail.pop() {
            return Ok(w);
        }
        match &mut self.pad {
            Some(pad) => {
                pad.words += 1;
                Ok(pad.rng.next_u32() as u16)
            }
            None => Err(Error::Underflow),
        }
    }

    /// Pushes the symbol occupying `[start, start + freq)` out of `2^precision`.
    pub(crate) fn encode_slot(&mut self, start: u64, freq: u64, precision: u32) {
        debug_assert!(freq > 0 && precision <= MAX_PRECISION);
        debug_assert!(start + freq <= 1u64 << precision);
        let x_max = (freq as u128) << (64 - precision);
        let mut x = self.head;
        while (x as u128) >= x_max {
            self.tail.push(x as u16);
            x >>= WORD_BITS;
        }
        self.head = ((x / freq) << precision) + (x % freq) + start;
    }

    /// The slot value the next decode at `precision` will read.
    pub(crate) fn peek(&self, precision: u32) -> u64 {
        self.head & ((1u64 << precision) - 1)
    }

    /// Completes a decode of the symbol `[start, start + freq)` located by [`Self::peek`].
    pub(crate) fn decode_slot(&mut self, start: u64, freq: u64, precision: u32) -> Result<()> {
        let slot = self.peek(precision);
        debug_assert!(start <= slot && slot < start + freq);
        let mut x = freq * (self.head >> precision) + slot - start;
        while x < HEAD_MIN {
            x = (x << WORD_BITS) | self.pull_word()? as u64;
        }
        self.head = x;
        Ok(())
    }
}

fn check_precision(precision: u32) -> Result<()> {
    if precision > MAX_PRECISION {
        return Err(Error::Parameter(format!("precision {precision} exceeds {MAX_PRECISION}")));
    }
    Ok(())
}

/// Uniform distribution over `{0, .., n-1}`, `1 <= n <= 2^48`.
///
/// Powers of two are represented exactly. Other sizes are spread over
/// `2^32` (or `2^48` for `n > 2^24`) so that masses differ by at most one unit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Uniform {
    n: u64,
    precision: u32,
    q: u64,
    r: u64,
}

impl Uniform {
    pub fn new(n: u64) -> Result<Self> {
        if n == 0 || n > 1 << MAX_PRECISION {
            return Err(Error::Parameter(format!("uniform size {n} outside [1, 2^48]")));
        }
        let precision = if n.is_power_of_two() {
            n.trailing_zeros()
        } else if n <= 1 << 24 {
            DEFAULT_PRECISION
        } else {
            MAX_PRECISION
        };
        let total = 1u64 << precision;
        Ok(Self { n, precision, q: total / n, r: total % n })
    }

    pub fn size(&self) -> u64 {
        self.n
    }

    fn start(&self, x: u64) -> u64 {
        x * self.q + x.min(self.r)
    }

    fn freq(&self, x: u64) -> u64 {
        self.q + u64::from(x < self.r)
    }

    pub fn encode_value(&self, m: &mut Message, x: u64) -> Result<()> {
        if x >= self.n {
            return Err(Error::OutOfRange { symbol: x, size: self.n });
        }
        m.encode_slot(self.start(x), self.freq(x), self.precision);
        Ok(())
    }

    pub fn decode_value(&self, m: &mut Message) -> Result<u64> {
        let slot = m.peek(self.precision);
        let wide = self.r * (self.q + 1);
        let x = if slot < wide { slot / (self.q + 1) } else { self.r + (slot - wide) / self.q };
        m.decode_slot(self.start(x), self.freq(x), self.precision)?;
        Ok(x)
    }

    pub fn value_bits(&self, x: u64) -> f64 {
        self.precision as f64 - (self.freq(x) as f64).log2()
    }
}

impl Codec for Uniform {
    type Symbol = usize;

    fn encode(&self, m: &mut Message, x: &usize) -> Result<()> {
        self.encode_value(m, *x as u64)
    }

    fn decode(&self, m: &mut Message) -> Result<usize> {
        Ok(self.decode_value(m)? as usize)
    }

    fn bits(&self, x: &usize) -> Option<f64> {
        (*x < self.n as usize).then(|| self.value_bits(*x as u64))
    }
}

/// Categorical distribution given by fixed-point masses summing to `2^precision`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Categorical {
    precision: u32,
    /// `cumulative[i]` is the start of symbol `i`; the last entry is `2^precision`.
    cumulative: Vec<u64>,
}

impl Categorical {
    /// Masses must sum to a power of two no larger than `2^48`. Zero masses
    /// are allowed; such symbols can never be encoded or decoded.
    pub fn new(masses: &[u64]) -> Result<Self> {
        let total = masses
            .iter()
            .try_fold(0u64, |acc, &w| acc.checked_add(w))
            .ok_or_else(|| Error::Parameter("mass overflow".into()))?;
        if !total.is_power_of_two() || total > 1 << MAX_PRECISION {
            return Err(Error::Parameter(format!(
                "masses sum to {total}, expected a power of two <= 2^48"
            )));
        }
        let mut cumulative = Vec::with_capacity(masses.len() + 1);
        let mut acc = 0;
        cumulative.push(0);
        for &w in masses {
            acc += w;
            cumulative.push(acc);
        }
        Ok(Self { precision: total.trailing_zeros(), cumulative })
    }

    /// Quantizes arbitrary nonnegative weights to `2^precision`, keeping every
    /// nonzero weight at least one unit.
    pub fn from_weights(weights: &[u64], precision: u32) -> Result<Self> {
        Self::new(&quantize(weights, precision)?)
    }

    pub fn len(&self) -> usize {
        self.cumulative.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn mass(&self, x: usize) -> u64 {
        self.cumulative[x + 1] - self.cumulative[x]
    }

    pub fn masses(&self) -> Vec<u64> {
        (0..self.len()).map(|i| self.mass(i)).collect()
    }

    pub fn probability(&self, x: usize) -> f64 {
        self.mass(x) as f64 / (1u64 << self.precision) as f64
    }
}

impl Codec for Categorical {
    type Symbol = usize;

    fn encode(&self, m: &mut Message, x: &usize) -> Result<()> {
        let x = *x;
        if x >= self.len() {
            return Err(Error::OutOfRange { symbol: x as u64, size: self.len() as u64 });
        }
        let freq = self.mass(x);
        if freq == 0 {
            return Err(Error::ZeroMass { symbol: x });
        }
        m.encode_slot(self.cumulative[x], freq, self.precision);
        Ok(())
    }

    fn decode(&self, m: &mut Message) -> Result<usize> {
        let slot = m.peek(self.precision);
        let x = self.cumulative[1..].partition_point(|&c| c <= slot);
        m.decode_slot(self.cumulative[x], self.mass(x), self.precision)?;
        Ok(x)
    }

    fn bits(&self, x: &usize) -> Option<f64> {
        (*x < self.len() && self.mass(*x) > 0)
            .then(|| self.precision as f64 - (self.mass(*x) as f64).log2())
    }
}

/// Bernoulli distribution; `true` has mass `one` out of `2^precision`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bernoulli {
    inner: Categorical,
}

impl Bernoulli {
    pub fn new(one: u64, precision: u32) -> Result<Self> {
        check_precision(precision)?;
        let total = 1u64 << precision;
        if one == 0 || one >= total {
            return Err(Error::Parameter(format!("bernoulli mass {one} not in (0, 2^{precision})")));
        }
        Ok(Self { inner: Categorical::new(&[total - one, one])? })
    }

    /// Bernoulli fitted to counts, clamped away from 0 and 1 by one unit.
    pub fn from_counts(ones: u64, zeros: u64, precision: u32) -> Result<Self> {
        check_precision(precision)?;
        let total = 1u64 << precision;
        let one = if ones + zeros == 0 {
            total / 2
        } else {
            ((ones as u128 * total as u128 + (ones + zeros) as u128 / 2) / (ones + zeros) as u128) as u64
        };
        Self::new(one.clamp(1, total - 1), precision)
    }

    pub fn from_probability(p: f64, precision: u32) -> Result<Self> {
        check_precision(precision)?;
        let total = 1u64 << precision;
        Self::new((p * total as f64).round() as u64, precision)
    }

    pub fn probability(&self) -> f64 {
        self.inner.probability(1)
    }
}

impl Codec for Bernoulli {
    type Symbol = bool;

    fn encode(&self, m: &mut Message, x: &bool) -> Result<()> {
        self.inner.encode(m, &usize::from(*x))
    }

    fn decode(&self, m: &mut Message) -> Result<bool> {
        Ok(self.inner.decode(m)? == 1)
    }

    fn bits(&self, x: &bool) -> Option<f64> {
        self.inner.bits(&usize::from(*x))
    }
}

/// Largest-remainder apportionment of `weights` onto `2^precision` units.
/// Every nonzero weight receives at least one unit.
pub fn quantize(weights: &[u64], precision: u32) -> Result<Vec<u64>> {
    check_precision(precision)?;
    let target = 1u64 << precision;
    let total: u128 = weights.iter().map(|&w| w as u128).sum();
    let nonzero = weights.iter().filter(|&&w| w > 0).count() as u64;
    if total == 0 {
        return Err(Error::Parameter("all weights are zero".into()));
    }
    if nonzero > target {
        return Err(Error::Parameter(format!(
            "{nonzero} nonzero weights do not fit in 2^{precision} units"
        )));
    }
    let mut masses = Vec::with_capacity(weights.len());
    let mut remainders = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        let scaled = w as u128 * target as u128;
        masses.push((scaled / total) as u64);
        remainders.push((scaled % total, i));
    }
    let assigned: u64 = masses.iter().sum();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in remainders.iter().take((target - assigned) as usize) {
        masses[i] += 1;
    }
    for i in 0..weights.len() {
        if weights[i] > 0 && masses[i] == 0 {
            let donor = (0..masses.len())
                .max_by(|&a, &b| masses[a].cmp(&masses[b]).then(b.cmp(&a)))
                .expect("nonempty");
            masses[donor] -= 1;
            masses[i] = 1;
        }
    }
    Ok(masses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn rng(seed: u64) -> rand::rngs::StdRng {
        rand::rngs::StdRng::seed_from_u64(seed)
    }

    #[test]
    fn initial_message() {
        let m = Message::new();
        assert!(m.tail().is_empty());
        assert_eq!(m, Message::new());
        assert!(m.length_bits() < 64.0);
        assert_eq!(m.length_bits(), 48.0);
    }

    #[test]
    fn uniform_one_is_free() {
        let mut m = Message::random(1, 4);
        let before = m.clone();
        let u = Uniform::new(1).unwrap();
        u.encode(&mut m, &0).unwrap();
        assert_eq!(m, before);
        assert_eq!(u.decode(&mut m).unwrap(), 0);
        assert_eq!(m, before);
    }

    #[test]
    fn uniform_rejects_bad_sizes() {
        assert!(Uniform::new(0).is_err());
        assert!(Uniform::new((1 << 48) + 1).is_err());
        let u = Uniform::new(6).unwrap();
        assert!(matches!(u.encode(&mut Message::new(), &6), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn uniform_six_rate() {
        let u = Uniform::new(6).unwrap();
        let mut r = rng(2);
        let xs: Vec<usize> = (0..1000).map(|_| r.gen_range(0..6)).collect();
        let mut m = Message::random(3, 8);
        let before = m.length_bits();
        for x in &xs {
            u.encode(&mut m, x).unwrap();
        }
        let added = m.length_bits() - before;
        let ideal = 1000.0 * 6f64.log2();
        assert!((added - ideal).abs() <= 1.0, "added {added}, ideal {ideal}");
        for x in xs.iter().rev() {
            assert_eq!(u.decode(&mut m).unwrap(), *x);
        }
        assert_eq!(m, Message::random(3, 8));
    }

    #[test]
    fn uniform_largest_size() {
        let n = 1u64 << 48;
        let u = Uniform::new(n).unwrap();
        let mut m = Message::new();
        u.encode_value(&mut m, n - 1).unwrap();
        assert_eq!(u.decode_value(&mut m).unwrap(), n - 1);
        assert!(m.is_initial());

        let odd = Uniform::new(n - 3).unwrap();
        odd.encode_value(&mut m, n - 4).unwrap();
        odd.encode_value(&mut m, 0).unwrap();
        assert_eq!(odd.decode_value(&mut m).unwrap(), 0);
        assert_eq!(odd.decode_value(&mut m).unwrap(), n - 4);
        assert!(m.is_initial());
    }

    #[test]
    fn bernoulli_half_costs_one_bit() {
        let b = Bernoulli::new(1 << 31, 32).unwrap();
        let mut m = Message::random(4, 4);
        let before = m.length_bits();
        for i in 0..1000 {
            b.encode(&mut m, &(i % 3 == 0)).unwrap();
        }
        let added = m.length_bits() - before;
        assert!((added - 1000.0).abs() < 0.5, "{added}");
    }

    #[test]
    fn bernoulli_quarter_rate_and_roundtrip() {
        let b = Bernoulli::from_probability(0.25, 32).unwrap();
        let mut r = rng(5);
        let xs: Vec<bool> = (0..10_000).map(|_| r.gen_bool(0.25)).collect();
        let ideal: f64 = xs.iter().map(|&x| if x { 2.0 } else { -(0.75f64).log2() }).sum();
        let mut m = Message::new();
        for x in &xs {
            b.encode(&mut m, x).unwrap();
        }
        let added = m.length_bits() - 48.0;
        assert!((added - ideal).abs() <= 0.001 * ideal, "added {added}, ideal {ideal}");
        for x in xs.iter().rev() {
            assert_eq!(b.decode(&mut m).unwrap(), *x);
        }
        assert!(m.is_initial());
    }

    #[test]
    fn bernoulli_rejects_degenerate() {
        assert!(Bernoulli::new(0, 32).is_err());
        assert!(Bernoulli::new(1 << 32, 32).is_err());
        assert!(Bernoulli::from_probability(1.0, 20).is_err());
    }

    #[test]
    fn categorical_uniform_reduction() {
        let c = Categorical::new(&[1, 1, 1, 1]).unwrap();
        let mut m = Message::random(6, 4);
        let before = m.length_bits();
        for x in 0..100 {
            c.encode(&mut m, &(x % 4)).unwrap();
        }
        assert!((m.length_bits() - before - 200.0).abs() < 0.01);
    }

    #[test]
    fn categorical_three_to_one_rate() {
        let c = Categorical::new(&[3, 1]).unwrap();
        let mut r = rng(7);
        let xs: Vec<usize> = (0..10_000).map(|_| usize::from(r.gen_bool(0.25))).collect();
        let ideal: f64 = xs.iter().map(|&x| c.bits(&x).unwrap()).sum();
        let mut m = Message::new();
        for x in &xs {
            c.encode(&mut m, x).unwrap();
        }
        let added = m.length_bits() - 48.0;
        assert!((added - ideal).abs() <= 0.001 * ideal);
        // Empirical entropy of the sample is close to H(3/4, 1/4) = 0.811.
        assert!((ideal / 10_000.0 - 0.8113).abs() < 0.02);
    }

    #[test]
    fn categorical_zero_mass_and_bad_tables() {
        let c = Categorical::new(&[4, 0, 4]).unwrap();
        assert!(matches!(c.encode(&mut Message::new(), &1), Err(Error::ZeroMass { symbol: 1 })));
        assert!(Categorical::new(&[3, 2]).is_err());
        assert!(Categorical::new(&[u64::MAX, 2]).is_err());
        assert!(Categorical::new(&[1 << 49]).is_err());
    }

    #[test]
    fn categorical_decode_samples_distribution() {
        // Chi-square goodness of fit at alpha = 0.001 (3 dof critical value 16.27).
        let c = Categorical::new(&[8, 4, 2, 2]).unwrap();
        let mut m = Message::random(8, 200_000);
        let mut counts = [0u64; 4];
        let n = 100_000;
        for _ in 0..n {
            counts[c.decode(&mut m).unwrap()] += 1;
        }
        let chi2: f64 = counts
            .iter()
            .enumerate()
            .map(|(i, &o)| {
                let e = n as f64 * c.probability(i);
                (o as f64 - e).powi(2) / e
            })
            .sum();
        assert!(chi2 < 16.27, "chi2 = {chi2}, counts {counts:?}");
    }

    #[test]
    fn underflow_without_pad() {
        let u = Uniform::new(3).unwrap();
        let mut m = Message::new();
        assert!(matches!(u.decode(&mut m), Err(Error::Underflow)));
        let mut padded = Message::with_pad(0);
        u.decode(&mut padded).unwrap();
        assert!(padded.pad_bits() > 0.0);
    }

    #[test]
    fn quantize_keeps_nonzero_masses() {
        let q = quantize(&[1_000_000, 1, 0, 3], 8).unwrap();
        assert_eq!(q.iter().sum::<u64>(), 256);
        assert!(q[1] >= 1 && q[3] >= 1);
        assert_eq!(q[2], 0);
        assert_eq!(quantize(&[1, 1, 1], 2).unwrap(), vec![2, 1, 1]);
        assert!(quantize(&[0, 0], 4).is_err());
        assert!(quantize(&[1, 1, 1], 1).is_err());
    }

    proptest::proptest! {
        #[test]
        fn stack_discipline(ops in proptest::collection::vec((1u64..5000, 0u64..5000), 1..200)) {
            let mut m = Message::new();
            let mut pushed = vec![];
            for (n, x) in ops {
                let u = Uniform::new(n).unwrap();
                let x = x % n;
                u.encode_value(&mut m, x).unwrap();
                pushed.push((u, x));
            }
            for (u, x) in pushed.into_iter().rev() {
                proptest::prop_assert_eq!(u.decode_value(&mut m).unwrap(), x);
            }
            proptest::prop_assert!(m.is_initial());
        }

        #[test]
        fn rate_optimality(ps in proptest::collection::vec(1u64..1000, 2..6), seed in 0u64..1000) {
            let c = Categorical::from_weights(&ps, 32).unwrap();
            let mut r = rng(seed);
            let total: u64 = ps.iter().sum();
            let xs: Vec<usize> = (0..10_000).map(|_| {
                let mut t = r.gen_range(0..total);
                ps.iter().position(|&w| { if t < w { true } else { t -= w; false } }).unwrap()
            }).collect();
            let ideal: f64 = xs.iter().map(|x| c.bits(x).unwrap()).sum();
            let mut m = Message::new();
            for x in &xs { c.encode(&mut m, x).unwrap(); }
            let added = m.length_bits() - 48.0;
            proptest::prop_assert!((added - ideal).abs() <= 32.0 + 0.001 * ideal);
        }
    }
}
