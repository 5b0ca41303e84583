//! Permutations, permutation groups and stabilizer chains.
//!
//! Permutations compose like functions: `s.compose(t)` performs `t` first,
//! then `s`. One-line notation stores `images[i] = s(i)`.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::ops::Mul;
use std::sync::OnceLock;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.images)
    }
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self { images: (0..n).collect() }
    }

    /// Validates that `images` is a bijection on `0..images.len()`.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || std::mem::replace(&mut seen[x], true) {
                return Err(Error::Parameter(format!("{images:?} is not a permutation")));
            }
        }
        Ok(Self { images })
    }

    pub(crate) fn from_images_unchecked(images: Vec<usize>) -> Self {
        debug_assert!(Self::from_images(images.clone()).is_ok());
        Self { images }
    }

    /// The transposition swapping `i` and `j`.
    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(i, j);
        Self { images }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.shuffle(rng);
        Self { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn into_images(self) -> Vec<usize> {
        self.images
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// Smallest point not fixed.
    pub fn first_moved(&self) -> Option<usize> {
        self.images.iter().enumerate().position(|(i, &x)| i != x)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Self { images: inv }
    }

    /// `self ∘ t`: performs `t`, then `self`.
    pub fn compose(&self, t: &Permutation) -> Result<Self> {
        if self.len() != t.len() {
            return Err(Error::DegreeMismatch { expected: self.len(), actual: t.len() });
        }
        Ok(self * t)
    }

    /// `self^{-1} ∘ t` without materializing the inverse.
    pub(crate) fn inverse_then(&self, t: &Permutation) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x] = i;
        }
        Self { images: t.images.iter().map(|&x| inv[x]).collect() }
    }
}

impl Mul for &Permutation {
    type Output = Permutation;

    fn mul(self, t: &Permutation) -> Permutation {
        assert_eq!(self.len(), t.len(), "degree mismatch");
        Permutation { images: t.images.iter().map(|&x| self.images[x]).collect() }
    }
}

/// A permutation group given by generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Permutation>,
}

impl PermGroup {
    pub fn new(degree: usize, generators: Vec<Permutation>) -> Result<Self> {
        if let Some(g) = generators.iter().find(|g| g.len() != degree) {
            return Err(Error::DegreeMismatch { expected: degree, actual: g.len() });
        }
        Ok(Self { degree, generators })
    }

    pub fn trivial(degree: usize) -> Self {
        Self { degree, generators: vec![] }
    }

    /// `S_n`, generated by a transposition and an `n`-cycle.
    pub fn symmetric(degree: usize) -> Self {
        if degree < 2 {
            return Self::trivial(degree);
        }
        let cycle = Permutation { images: (0..degree).map(|i| (i + 1) % degree).collect() };
        Self { degree, generators: vec![Permutation::transposition(degree, 0, 1), cycle] }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    /// Orbit of `point` under the group, sorted ascending.
    pub fn orbit_of(&self, point: usize) -> Result<Vec<usize>> {
        if point >= self.degree {
            return Err(Error::Parameter(format!("point {point} out of range for degree {}", self.degree)));
        }
        let mut seen = vec![false; self.degree];
        seen[point] = true;
        let mut queue = VecDeque::from([point]);
        let mut orbit = vec![point];
        while let Some(p) = queue.pop_front() {
            for g in &self.generators {
                let q = g.apply(p);
                if !seen[q] {
                    seen[q] = true;
                    orbit.push(q);
                    queue.push_back(q);
                }
            }
        }
        orbit.sort_unstable();
        Ok(orbit)
    }

    pub fn stabilizer_chain(&self) -> StabilizerChain {
        StabilizerChain::new(self)
    }
}

/// One level of a stabilizer chain: the orbit of the base point under `H_k`
/// and a Schreier tree reaching every orbit point.
#[derive(Debug)]
struct Level {
    base: usize,
    /// Sorted.
    orbit: Vec<usize>,
    /// point -> (index of the generator g, predecessor q) with point = g(q).
    tree: HashMap<usize, (usize, usize)>,
    /// Lexicographically least member of `u_p H_{k+1}` for each orbit point, filled lazily.
    canonical: Vec<OnceLock<Permutation>>,
}

/// A stabilizer chain relative to an increasing base: every base point is
/// the smallest point moved by its subgroup `H_k`, and `H_K` is trivial.
#[derive(Debug)]
pub struct StabilizerChain {
    degree: usize,
    generators: Vec<Permutation>,
    levels: Vec<Level>,
}

fn schreier_rep(gens: &[Permutation], tree: &HashMap<usize, (usize, usize)>, n: usize, p: usize) -> Permutation {
    let mut path = vec![];
    let mut q = p;
    while let Some(&(g, pred)) = tree.get(&q) {
        path.push(g);
        q = pred;
    }
    let mut images: Vec<usize> = (0..n).collect();
    for &g in path.iter().rev() {
        for x in images.iter_mut() {
            *x = gens[g].apply(*x);
        }
    }
    Permutation { images }
}

#[derive(Default)]
struct BuildLevel {
    orbit: Vec<usize>,
    tree: HashMap<usize, (usize, usize)>,
    checked: HashSet<(usize, usize)>,
}

struct Builder {
    degree: usize,
    gens: Vec<Permutation>,
    /// Smallest point moved by each generator.
    gen_level: Vec<usize>,
    levels: BTreeMap<usize, BuildLevel>,
}

impl Builder {
    fn add_generator(&mut self, g: Permutation) {
        let b = g.first_moved().expect("non-identity generator");
        self.gens.push(g);
        self.gen_level.push(b);
        self.levels.entry(b).or_insert_with(|| BuildLevel { orbit: vec![b], ..Default::default() });
        let bases: Vec<usize> = self.levels.range(..=b).map(|(&k, _)| k).collect();
        for base in bases {
            self.extend_orbit(base);
        }
    }

    fn extend_orbit(&mut self, base: usize) {
        let Builder { gens, gen_level, levels, .. } = self;
        let level = levels.get_mut(&base).expect("level exists");
        let mut i = 0;
        while i < level.orbit.len() {
            let p = level.orbit[i];
            for (gi, g) in gens.iter().enumerate() {
                if gen_level[gi] < base {
                    continue;
                }
                let q = g.apply(p);
                if q != base && !level.tree.contains_key(&q) {
                    level.tree.insert(q, (gi, p));
                    level.orbit.push(q);
                }
            }
            i += 1;
        }
    }

    fn rep(&self, base: usize, p: usize) -> Permutation {
        schreier_rep(&self.gens, &self.levels[&base].tree, self.degree, p)
    }

    /// Strips `h` through the levels at points `>= from`. Returns the point
    /// where stripping failed and the residue, or `None` if `h` is a member.
    fn sift(&self, mut h: Permutation, from: usize) -> Option<(usize, Permutation)> {
        for i in from..self.degree {
            let p = h.apply(i);
            if p == i {
                continue;
            }
            match self.levels.get(&i) {
                Some(level) if level.tree.contains_key(&p) => {
                    h = self.rep(i, p).inverse_then(&h);
                }
                _ => return Some((i, h)),
            }
        }
        None
    }

    fn run(&mut self) {
        'outer: loop {
            let bases: Vec<usize> = self.levels.keys().rev().copied().collect();
            for base in bases {
                let mut oi = 0;
                while oi < self.levels[&base].orbit.len() {
                    let p = self.levels[&base].orbit[oi];
                    for gi in 0..self.gens.len() {
                        if self.gen_level[gi] < base {
                            continue;
                        }
                        if !self.levels.get_mut(&base).expect("level").checked.insert((p, gi)) {
                            continue;
                        }
                        let s = &self.gens[gi];
                        let sp = s.apply(p);
                        let schreier = self.rep(base, sp).inverse_then(&(s * &self.rep(base, p)));
                        if let Some((_, residue)) = self.sift(schreier, base + 1) {
                            self.add_generator(residue);
                            continue 'outer;
                        }
                    }
                    oi += 1;
                }
            }
            break;
        }
    }
}

impl StabilizerChain {
    /// Deterministic Schreier-Sims.
    pub fn new(group: &PermGroup) -> Self {
        let mut builder = Builder {
            degree: group.degree,
            gens: vec![],
            gen_level: vec![],
            levels: BTreeMap::new(),
        };
        let mut seen = HashSet::new();
        for g in &group.generators {
            if !g.is_identity() && seen.insert(g.clone()) {
                builder.add_generator(g.clone());
            }
        }
        builder.run();
        let levels = builder
            .levels
            .into_iter()
            .map(|(base, bl)| {
                let mut orbit = bl.orbit;
                orbit.sort_unstable();
                let canonical = (0..orbit.len()).map(|_| OnceLock::new()).collect();
                Level { base, orbit, tree: bl.tree, canonical }
            })
            .collect();
        Self { degree: group.degree, generators: builder.gens, levels }
    }

    pub fn trivial(degree: usize) -> Self {
        Self { degree, generators: vec![], levels: vec![] }
    }

    /// Direct product of the symmetric groups on disjoint `blocks`, built
    /// without Schreier-Sims.
    pub fn symmetric_on_blocks(degree: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut seen = vec![false; degree];
        let mut generators = vec![];
        let mut levels = vec![];
        for block in blocks {
            let mut b = block.clone();
            b.sort_unstable();
            for &x in &b {
                if x >= degree || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::Parameter(format!("blocks are not disjoint subsets of 0..{degree}")));
                }
            }
            let first_gen = generators.len();
            for w in b.windows(2) {
                generators.push(Permutation::transposition(degree, w[0], w[1]));
            }
            for j in 0..b.len().saturating_sub(1) {
                let tree = (j..b.len() - 1).map(|k| (b[k + 1], (first_gen + k, b[k]))).collect();
                let orbit = b[j..].to_vec();
                let canonical = (0..orbit.len()).map(|_| OnceLock::new()).collect();
                levels.push(Level { base: b[j], orbit, tree, canonical });
            }
        }
        levels.sort_by_key(|l| l.base);
        Ok(Self { degree, generators, levels })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn orbit(&self, level: usize) -> &[usize] {
        &self.levels[level].orbit
    }

    pub fn orbit_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.orbit.len()).collect()
    }

    /// Strong generating set collected while building the chain.
    pub fn strong_generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn group(&self) -> PermGroup {
        PermGroup { degree: self.degree, generators: self.generators.clone() }
    }

    /// `|H| = Π |O_k|`, exactly.
    pub fn order(&self) -> BigUint {
        self.levels.iter().fold(BigUint::from(1u32), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    pub fn log2_order(&self) -> f64 {
        self.levels.iter().map(|l| (l.orbit.len() as f64).log2()).sum()
    }

    pub fn is_trivial(&self) -> bool {
        self.levels.is_empty()
    }

    fn check_degree(&self, s: &Permutation) -> Result<()> {
        if s.len() != self.degree {
            return Err(Error::DegreeMismatch { expected: self.degree, actual: s.len() });
        }
        Ok(())
    }

    fn rep(&self, k: usize, p: usize) -> Permutation {
        schreier_rep(&self.generators, &self.levels[k].tree, self.degree, p)
    }

    /// Lexicographically least element of `s H_start`, where `H_start` is
    /// the subgroup at level `start`.
    fn canon_from(&self, start: usize, mut s: Permutation) -> Permutation {
        for k in start..self.levels.len() {
            let level = &self.levels[k];
            let best = *level.orbit.iter().min_by_key(|&&p| s.apply(p)).expect("orbit is nonempty");
            if best != level.base {
                s = &s * &self.rep(k, best);
            }
        }
        s
    }

    fn canonical_rep(&self, k: usize, idx: usize) -> &Permutation {
        self.levels[k].canonical[idx].get_or_init(|| {
            let p = self.levels[k].orbit[idx];
            self.canon_from(k + 1, self.rep(k, p))
        })
    }

    /// Canonical member of the left coset `sH`: its lexicographically
    /// smallest element in one-line notation.
    pub fn coset_canon(&self, s: &Permutation) -> Result<Permutation> {
        self.check_degree(s)?;
        Ok(self.canon_from(0, s.clone()))
    }

    pub fn contains(&self, h: &Permutation) -> bool {
        self.element_rank(h).is_ok()
    }

    /// Orbit indices of `h` under the bijection `H ↔ Π_k O_k`, where
    /// `h = c_0 ∘ c_1 ∘ … ∘ c_{K-1}` with canonical coset representatives `c_k`.
    pub fn element_rank(&self, h: &Permutation) -> Result<Vec<usize>> {
        self.check_degree(h)?;
        let mut h = h.clone();
        let mut digits = Vec::with_capacity(self.levels.len());
        for (k, level) in self.levels.iter().enumerate() {
            let p = h.apply(level.base);
            let idx = level.orbit.binary_search(&p).map_err(|_| Error::NotMember)?;
            h = self.canonical_rep(k, idx).inverse_then(&h);
            digits.push(idx);
        }
        if h.is_identity() {
            Ok(digits)
        } else {
            Err(Error::NotMember)
        }
    }

    pub fn element_unrank(&self, digits: &[usize]) -> Result<Permutation> {
        if digits.len() != self.levels.len() {
            return Err(Error::Parameter(format!(
                "expected {} orbit indices, got {}",
                self.levels.len(),
                digits.len()
            )));
        }
        let mut h = Permutation::identity(self.degree);
        for (k, &idx) in digits.iter().enumerate() {
            if idx >= self.levels[k].orbit.len() {
                return Err(Error::OutOfRange { symbol: idx as u64, size: self.levels[k].orbit.len() as u64 });
            }
            h = &h * self.canonical_rep(k, idx);
        }
        Ok(h)
    }
}

impl From<&PermGroup> for StabilizerChain {
    fn from(group: &PermGroup) -> Self {
        Self::new(group)
    }
}
