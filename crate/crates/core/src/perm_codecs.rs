//! Uniform codecs over `S_n`, over a permutation group, and over the left
//! cosets of a permutation group.

use crate::ans::{Message, Uniform};
use crate::codec::Codec;
use crate::perm::{Permutation, StabilizerChain};
use crate::{Error, Result};

/// Uniform codec over `S_n`, via the Fisher-Yates shuffle.
#[derive(Clone, Debug)]
pub struct UniformS {
    n: usize,
}

impl UniformS {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    /// `log2(n!)`.
    pub fn log2_size(&self) -> f64 {
        (2..=self.n).map(|j| (j as f64).log2()).sum()
    }
}

impl Codec for UniformS {
    type Symbol = Permutation;

    fn encode(&self, m: &mut Message, s: &Permutation) -> Result<()> {
        let n = self.n;
        if s.len() != n {
            return Err(Error::DegreeMismatch { expected: n, actual: s.len() });
        }
        let s = s.images();
        let mut p: Vec<usize> = (0..n).collect();
        let mut p_inv: Vec<usize> = (0..n).collect();
        let mut to_encode = Vec::with_capacity(n.saturating_sub(1));
        for j in (2..=n).rev() {
            let i = p_inv[s[j - 1]];
            p_inv.swap(p[j - 1], s[j - 1]);
            p.swap(i, j - 1);
            to_encode.push(i);
        }
        for (j, &i) in (2..=n).zip(to_encode.iter().rev()) {
            Uniform::new(j as u64)?.encode_value(m, i as u64)?;
        }
        Ok(())
    }

    fn decode(&self, m: &mut Message) -> Result<Permutation> {
        let n = self.n;
        let mut s: Vec<usize> = (0..n).collect();
        for j in (2..=n).rev() {
            let i = Uniform::new(j as u64)?.decode_value(m)? as usize;
            s.swap(i, j - 1);
        }
        Ok(Permutation::from_images_unchecked(s))
    }

    fn bits(&self, s: &Permutation) -> Option<f64> {
        (s.len() == self.n).then(|| self.log2_size())
    }
}

/// Uniform codec over the elements of a group given by a stabilizer chain.
/// Each orbit index of the element's rank is coded with `Uniform(|O_k|)`.
#[derive(Clone, Debug)]
pub struct UniformPermGrp<'a> {
    chain: &'a StabilizerChain,
    digits: Vec<Uniform>,
}

impl<'a> UniformPermGrp<'a> {
    pub fn new(chain: &'a StabilizerChain) -> Result<Self> {
        let digits = chain.orbit_sizes().into_iter().map(|k| Uniform::new(k as u64)).collect::<Result<_>>()?;
        Ok(Self { chain, digits })
    }

    pub fn chain(&self) -> &'a StabilizerChain {
        self.chain
    }
}

impl Codec for UniformPermGrp<'_> {
    type Symbol = Permutation;

    fn encode(&self, m: &mut Message, h: &Permutation) -> Result<()> {
        let rank = self.chain.element_rank(h)?;
        for (u, &d) in self.digits.iter().zip(&rank).rev() {
            u.encode_value(m, d as u64)?;
        }
        Ok(())
    }

    fn decode(&self, m: &mut Message) -> Result<Permutation> {
        let rank = self
            .digits
            .iter()
            .map(|u| u.decode_value(m).map(|d| d as usize))
            .collect::<Result<Vec<_>>>()?;
        self.chain.element_unrank(&rank)
    }

    fn bits(&self, h: &Permutation) -> Option<f64> {
        self.chain.contains(h).then(|| self.chain.log2_order())
    }
}

/// Bits-back codec over left cosets `sH` of a group `H ≤ S_n`. Any member
/// can be encoded; decoding returns the coset's canonical member.
#[derive(Clone, Debug)]
pub struct UniformLCoset<'a> {
    grp: UniformPermGrp<'a>,
    sn: UniformS,
}

impl<'a> UniformLCoset<'a> {
    pub fn new(chain: &'a StabilizerChain) -> Result<Self> {
        Ok(Self { grp: UniformPermGrp::new(chain)?, sn: UniformS::new(chain.degree()) })
    }

    /// `log2 n! - log2 |H|`.
    pub fn net_bits(&self) -> f64 {
        self.sn.log2_size() - self.grp.chain.log2_order()
    }
}

impl Codec for UniformLCoset<'_> {
    type Symbol = Permutation;

    fn encode(&self, m: &mut Message, s: &Permutation) -> Result<()> {
        let s_canon = self.grp.chain.coset_canon(s)?;
        let t = self.grp.decode(m)?;
        let u = &s_canon * &t;
        self.sn.encode(m, &u)
    }

    fn decode(&self, m: &mut Message) -> Result<Permutation> {
        let u = self.sn.decode(m)?;
        let s_canon = self.grp.chain.coset_canon(&u)?;
        let t = s_canon.inverse().compose(&u)?;
        self.grp.encode(m, &t)?;
        Ok(s_canon)
    }

    fn bits(&self, s: &Permutation) -> Option<f64> {
        (s.len() == self.sn.n).then(|| self.net_bits())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::tests::{closure, perm};
    use crate::perm::PermGroup;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn trivial_degrees_are_free() {
        for n in [0, 1] {
            let mut m = Message::new();
            UniformS::new(n).encode(&mut m, &Permutation::identity(n)).unwrap();
            assert!(m.is_initial());
            assert_eq!(UniformS::new(n).decode(&mut m).unwrap(), Permutation::identity(n));
        }
    }

    #[test]
    fn self_swaps_decode_to_identity() {
        let n = 6;
        let mut m = Message::new();
        for j in 2..=n {
            Uniform::new(j as u64).unwrap().encode_value(&mut m, (j - 1) as u64).unwrap();
        }
        assert!(UniformS::new(n).decode(&mut m).unwrap().is_identity());
        assert!(m.is_initial());
    }

    #[test]
    fn degree_mismatch() {
        let mut m = Message::new();
        assert!(matches!(
            UniformS::new(3).encode(&mut m, &Permutation::identity(4)),
            Err(Error::DegreeMismatch { expected: 3, actual: 4 })
        ));
    }

    #[test]
    fn s10_rate() {
        let mut rng = StdRng::seed_from_u64(3);
        let codec = UniformS::new(10);
        let perms: Vec<_> = (0..1000).map(|_| Permutation::random(10, &mut rng)).collect();
        let mut m = Message::new();
        for s in &perms {
            codec.encode(&mut m, s).unwrap();
        }
        let ideal = 1000.0 * codec.log2_size();
        assert!((ideal - 21791.1).abs() < 0.1);
        let used = m.length_bits() - Message::new().length_bits();
        assert!((used - ideal).abs() <= 4.0, "used {used}, ideal {ideal}");
        for s in perms.iter().rev() {
            assert_eq!(&codec.decode(&mut m).unwrap(), s);
        }
        assert!(m.is_initial());
    }

    fn path_aut() -> StabilizerChain {
        PermGroup::new(3, vec![perm(&[2, 1, 0])]).unwrap().stabilizer_chain()
    }

    fn group_rate(chain: &StabilizerChain, seed: u64) -> f64 {
        let codec = UniformPermGrp::new(chain).unwrap();
        let mut elements: Vec<_> = closure(chain.degree(), chain.strong_generators()).into_iter().collect();
        elements.sort();
        let mut rng = StdRng::seed_from_u64(seed);
        let picks: Vec<_> = (0..1000).map(|_| elements[rng.gen_range(0..elements.len())].clone()).collect();
        let mut m = Message::random(seed, 8);
        let before = m.length_bits();
        for h in &picks {
            codec.encode(&mut m, h).unwrap();
        }
        let used = m.length_bits() - before;
        for h in picks.iter().rev() {
            assert_eq!(&codec.decode(&mut m).unwrap(), h);
        }
        assert_eq!(m, Message::random(seed, 8));
        used / 1000.0
    }

    #[test]
    fn group_codec_rates() {
        let trivial = StabilizerChain::trivial(4);
        let mut m = Message::new();
        UniformPermGrp::new(&trivial).unwrap().encode(&mut m, &Permutation::identity(4)).unwrap();
        assert!(m.is_initial());
        assert!(matches!(
            UniformPermGrp::new(&trivial).unwrap().encode(&mut m, &perm(&[1, 0, 2, 3])),
            Err(Error::NotMember)
        ));

        let s3 = PermGroup::symmetric(3).stabilizer_chain();
        assert!((group_rate(&s3, 1) - 6f64.log2()).abs() < 0.01);
        assert!((group_rate(&path_aut(), 2) - 1.0).abs() < 0.01);

        // dihedral group of the square, order 8
        let d4 = PermGroup::new(4, vec![perm(&[1, 2, 3, 0]), perm(&[3, 2, 1, 0])]).unwrap().stabilizer_chain();
        assert_eq!(d4.log2_order(), 3.0);
        assert!((group_rate(&d4, 3) * 1000.0 - 3000.0).abs() <= 1.0);
    }

    fn coset_rate(chain: &StabilizerChain, seed: u64) -> f64 {
        let codec = UniformLCoset::new(chain).unwrap();
        let n = chain.degree();
        let mut rng = StdRng::seed_from_u64(seed);
        let cosets: Vec<_> = (0..1000).map(|_| Permutation::random(n, &mut rng)).collect();
        let mut m = Message::random(seed, 64);
        let before = m.length_bits();
        for s in &cosets {
            codec.encode(&mut m, s).unwrap();
        }
        let used = m.length_bits() - before;
        for s in cosets.iter().rev() {
            assert_eq!(codec.decode(&mut m).unwrap(), chain.coset_canon(s).unwrap());
        }
        assert_eq!(m, Message::random(seed, 64));
        used
    }

    #[test]
    fn coset_codec_rates() {
        let sym = PermGroup::symmetric(5).stabilizer_chain();
        assert!(coset_rate(&sym, 4).abs() < 1e-9);
        let mut m = Message::random(9, 4);
        let codec = UniformLCoset::new(&sym).unwrap();
        assert!(codec.decode(&mut m).unwrap().is_identity());

        let trivial = StabilizerChain::trivial(6);
        let ideal = 1000.0 * UniformS::new(6).log2_size();
        assert!((coset_rate(&trivial, 5) - ideal).abs() < 32.0);

        let used = coset_rate(&path_aut(), 6);
        assert!((used - 1000.0 * 3f64.log2()).abs() <= 2.0, "used {used}");
    }

    proptest! {
        #[test]
        fn uniform_s_roundtrip(seed in any::<u64>(), n in 0usize..40) {
            let mut rng = StdRng::seed_from_u64(seed);
            let s = Permutation::random(n, &mut rng);
            let codec = UniformS::new(n);
            let mut m = Message::random(seed, 3);
            codec.encode(&mut m, &s).unwrap();
            prop_assert_eq!(codec.decode(&mut m).unwrap(), s);
            prop_assert_eq!(m, Message::random(seed, 3));
        }

        #[test]
        fn coset_member_independence(seed in any::<u64>(), n in 1usize..8, k in 0usize..3) {
            let mut rng = StdRng::seed_from_u64(seed);
            let gens: Vec<_> = (0..k).map(|_| Permutation::random(n, &mut rng)).collect();
            let chain = PermGroup::new(n, gens.clone()).unwrap().stabilizer_chain();
            let codec = UniformLCoset::new(&chain).unwrap();
            let s = Permutation::random(n, &mut rng);
            let mut reference = Message::random(seed, 4);
            codec.encode(&mut reference, &s).unwrap();
            for h in closure(n, &gens) {
                let mut m = Message::random(seed, 4);
                codec.encode(&mut m, &(&s * &h)).unwrap();
                prop_assert_eq!(&m, &reference);
            }
            let canon = codec.decode(&mut reference).unwrap();
            prop_assert_eq!(canon, chain.coset_canon(&s).unwrap());
            prop_assert_eq!(reference, Message::random(seed, 4));
        }

        #[test]
        fn aggregate_coset_rate(seed in any::<u64>(), k in 0usize..3) {
            let n = 6;
            let mut rng = StdRng::seed_from_u64(seed);
            let gens: Vec<_> = (0..k).map(|_| Permutation::random(n, &mut rng)).collect();
            let chain = PermGroup::new(n, gens).unwrap().stabilizer_chain();
            let ideal = 1000.0 * (UniformS::new(n).log2_size() - chain.log2_order());
            let used = coset_rate(&chain, seed);
            prop_assert!((used - ideal).abs() <= 1000.0 * 0.01 + 32.0, "used {} ideal {}", used, ideal);
        }
    }
}
