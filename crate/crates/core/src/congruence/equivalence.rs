//! Equivalence relations on `{0..m}` in canonical block-id form, plus the
//! general binary relations that arise from composing them.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Disjoint-set forest with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    /// Seeds the forest with the blocks of `e`.
    pub fn from_equivalence(e: &EquivalenceRelation) -> Self {
        let mut uf = UnionFind::new(e.len());
        let mut first = vec![u32::MAX; e.num_blocks()];
        for (x, &b) in e.labels().iter().enumerate() {
            let f = &mut first[b as usize];
            if *f == u32::MAX {
                *f = x as u32;
            } else {
                uf.union(*f as usize, x);
            }
        }
        uf
    }

    #[inline]
    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let grand = self.parent[self.parent[x] as usize];
            self.parent[x] = grand;
            x = grand as usize;
        }
        x
    }

    /// Returns `true` if two distinct classes were merged.
    #[inline]
    pub fn union(&mut self, x: usize, y: usize) -> bool {
        let (mut rx, mut ry) = (self.find(x), self.find(y));
        if rx == ry {
            return false;
        }
        if self.size[rx] < self.size[ry] {
            std::mem::swap(&mut rx, &mut ry);
        }
        self.parent[ry] = rx as u32;
        self.size[rx] += self.size[ry];
        true
    }

    pub fn into_equivalence(mut self) -> EquivalenceRelation {
        let roots: Vec<usize> = (0..self.parent.len()).map(|x| self.find(x)).collect();
        EquivalenceRelation::from_labels(&roots)
    }
}

/// A partition of `{0..m}`. Block ids are numbered by first occurrence, so two
/// equal partitions always have identical label sequences.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EquivalenceRelation {
    block: Vec<u32>,
    blocks: u32,
}

impl EquivalenceRelation {
    /// Canonicalizes arbitrary labels: `x ~ y` iff `labels[x] == labels[y]`.
    pub fn from_labels<L: Copy + Eq + std::hash::Hash>(labels: &[L]) -> Self {
        let mut seen: HashMap<L, u32> = HashMap::with_capacity(labels.len());
        let block = labels
            .iter()
            .map(|l| {
                let next = seen.len() as u32;
                *seen.entry(*l).or_insert(next)
            })
            .collect();
        EquivalenceRelation {
            block,
            blocks: seen.len() as u32,
        }
    }

    /// Same as [`from_labels`](Self::from_labels) for dense labels below `bound`.
    pub fn from_dense_labels(labels: &[usize], bound: usize) -> Self {
        let mut map = vec![u32::MAX; bound];
        let mut next = 0u32;
        let block = labels
            .iter()
            .map(|&l| {
                if map[l] == u32::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        EquivalenceRelation { block, blocks: next }
    }

    pub fn discrete(m: usize) -> Self {
        EquivalenceRelation {
            block: (0..m as u32).collect(),
            blocks: m as u32,
        }
    }

    pub fn full(m: usize) -> Self {
        EquivalenceRelation {
            block: vec![0; m],
            blocks: if m == 0 { 0 } else { 1 },
        }
    }

    pub fn from_blocks(m: usize, blocks: &[Vec<usize>]) -> Result<Self> {
        let mut label = vec![usize::MAX; m];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::Parse("empty block".into()));
            }
            for &x in block {
                if x >= m {
                    return Err(Error::Parse(format!("index {x} outside universe of size {m}")));
                }
                if label[x] != usize::MAX {
                    return Err(Error::Parse(format!("index {x} appears twice")));
                }
                label[x] = b;
            }
        }
        if let Some(x) = label.iter().position(|&l| l == usize::MAX) {
            return Err(Error::Parse(format!("index {x} is not covered")));
        }
        Ok(Self::from_dense_labels(&label, blocks.len()))
    }

    /// Smallest equivalence containing the given pairs.
    pub fn from_pairs(m: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut uf = UnionFind::new(m);
        for (x, y) in pairs {
            uf.union(x, y);
        }
        uf.into_equivalence()
    }

    /// Universe size.
    pub fn len(&self) -> usize {
        self.block.len()
    }

    pub fn is_empty(&self) -> bool {
        self.block.is_empty()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks as usize
    }

    pub fn labels(&self) -> &[u32] {
        &self.block
    }

    #[inline]
    pub fn block_of(&self, x: usize) -> usize {
        self.block[x] as usize
    }

    #[inline]
    pub fn related(&self, x: usize, y: usize) -> bool {
        self.block[x] == self.block[y]
    }

    pub fn is_discrete(&self) -> bool {
        self.num_blocks() == self.len()
    }

    pub fn is_full(&self) -> bool {
        self.num_blocks() <= 1
    }

    /// Blocks in id order; each block sorted.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_blocks()];
        for (x, &b) in self.block.iter().enumerate() {
            out[b as usize].push(x);
        }
        out
    }

    /// Number of related ordered pairs, diagonal included.
    pub fn pair_count(&self) -> usize {
        let mut sizes = vec![0usize; self.num_blocks()];
        for &b in &self.block {
            sizes[b as usize] += 1;
        }
        sizes.iter().map(|s| s * s).sum()
    }

    /// Non-diagonal related pairs `(x, y)` with `x < y`.
    pub fn nontrivial_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.blocks().into_iter().flat_map(|b| {
            let mut pairs = Vec::new();
            for i in 0..b.len() {
                for j in i + 1..b.len() {
                    pairs.push((b[i], b[j]));
                }
            }
            pairs
        })
    }

    fn check_universe(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::UniverseMismatch(self.len(), other.len()));
        }
        Ok(())
    }

    /// `self ⊆ other`.
    pub fn refines(&self, other: &Self) -> bool {
        if self.len() != other.len() {
            return false;
        }
        let mut image = vec![u32::MAX; self.num_blocks()];
        for (&a, &b) in self.block.iter().zip(&other.block) {
            let slot = &mut image[a as usize];
            if *slot == u32::MAX {
                *slot = b;
            } else if *slot != b {
                return false;
            }
        }
        true
    }

    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.check_universe(other)?;
        let width = other.num_blocks().max(1);
        let labels: Vec<usize> = self
            .block
            .iter()
            .zip(&other.block)
            .map(|(&a, &b)| a as usize * width + b as usize)
            .collect();
        Ok(Self::from_labels(&labels))
    }

    pub fn join(&self, other: &Self) -> Result<Self> {
        self.check_universe(other)?;
        let mut uf = UnionFind::from_equivalence(self);
        let mut first = vec![u32::MAX; other.num_blocks()];
        for (x, &b) in other.block.iter().enumerate() {
            let f = &mut first[b as usize];
            if *f == u32::MAX {
                *f = x as u32;
            } else {
                uf.union(*f as usize, x);
            }
        }
        Ok(uf.into_equivalence())
    }

    /// Relational product `self ∘ other = {(x, z) : x self y, y other z}`.
    pub fn compose(&self, other: &Self) -> Result<Relation> {
        self.check_universe(other)?;
        let m = self.len();
        let other_blocks = other.blocks();
        let mut per_block = vec![FixedBitSet::with_capacity(m); self.num_blocks()];
        let mut touched = vec![FixedBitSet::with_capacity(other.num_blocks()); self.num_blocks()];
        for x in 0..m {
            touched[self.block_of(x)].insert(other.block_of(x));
        }
        for (row, hit) in per_block.iter_mut().zip(&touched) {
            for b in hit.ones() {
                for &z in &other_blocks[b] {
                    row.insert(z);
                }
            }
        }
        let rows = (0..m).map(|x| per_block[self.block_of(x)].clone()).collect();
        Ok(Relation { rows })
    }

    /// `self` restricted to `subset`, re-indexed by position in `subset`.
    pub fn restrict(&self, subset: &[usize]) -> Self {
        let labels: Vec<u32> = subset.iter().map(|&x| self.block[x]).collect();
        Self::from_labels(&labels)
    }

    /// The relation `{(map[x], map[y]) : x ~ y}` on `{0..target}`, which must be
    /// an equivalence.
    pub fn image_under(&self, map: &[usize], target: usize) -> Result<Self> {
        if map.len() != self.len() {
            return Err(Error::UniverseMismatch(map.len(), self.len()));
        }
        let mut rel = Relation::empty(target);
        let blocks = self.blocks();
        for b in &blocks {
            for &x in b {
                for &y in b {
                    rel.insert(map[x], map[y]);
                }
            }
        }
        for z in 0..target {
            if !map.contains(&z) {
                rel.insert(z, z);
            }
        }
        rel.into_equivalence()
    }

    /// Extends a relation on the sub-universe `subset` of `{0..m}` by singletons.
    pub fn embed(&self, subset: &[usize], m: usize) -> Self {
        let mut labels: Vec<usize> = (0..m).map(|x| self.len() + x).collect();
        for (i, &x) in subset.iter().enumerate() {
            labels[x] = self.block_of(i);
        }
        Self::from_dense_labels(&labels, self.len() + m)
    }

    /// Every equivalence containing `self`.
    pub fn coarsenings(&self) -> Vec<Self> {
        let mut out = Vec::new();
        for_each_partition(self.num_blocks(), |rgs| {
            let labels: Vec<usize> = self.block.iter().map(|&b| rgs[b as usize]).collect();
            out.push(Self::from_dense_labels(&labels, self.num_blocks()));
        });
        out
    }

    /// Every equivalence on `{0..m}`, in restricted-growth-string order.
    pub fn all(m: usize) -> Vec<Self> {
        Self::discrete(m).coarsenings()
    }
}

/// Calls `f` with every restricted growth string of length `k`
/// (i.e. every set partition of `{0..k}`).
pub fn for_each_partition(k: usize, mut f: impl FnMut(&[usize])) {
    let mut rgs = vec![0usize; k];
    let mut max = vec![0usize; k];
    loop {
        f(&rgs);
        // advance: find rightmost position that can be incremented
        let mut i = k;
        loop {
            if i <= 1 {
                return;
            }
            i -= 1;
            if rgs[i] <= max[i - 1] {
                rgs[i] += 1;
                max[i] = max[i - 1].max(rgs[i]);
                for j in i + 1..k {
                    rgs[j] = 0;
                    max[j] = max[i];
                }
                break;
            }
        }
    }
}

impl fmt::Debug for EquivalenceRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `[[0,3],[1],[2]]`
impl fmt::Display for EquivalenceRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, block) in self.blocks().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str("[")?;
            for (j, x) in block.iter().enumerate() {
                if j > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{x}")?;
            }
            f.write_str("]")?;
        }
        f.write_str("]")
    }
}

impl FromStr for EquivalenceRelation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let blocks: Vec<Vec<usize>> = serde_json::from_str(s.trim()).map_err(|e| Error::Parse(e.to_string()))?;
        let m = blocks.iter().map(Vec::len).sum();
        Self::from_blocks(m, &blocks)
    }
}

impl Serialize for EquivalenceRelation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.blocks().serialize(s)
    }
}

impl<'de> Deserialize<'de> for EquivalenceRelation {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let blocks = Vec::<Vec<usize>>::deserialize(d)?;
        let m = blocks.iter().map(Vec::len).sum();
        Self::from_blocks(m, &blocks).map_err(serde::de::Error::custom)
    }
}

/// A binary relation on `{0..m}` stored as bitset rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    rows: Vec<FixedBitSet>,
}

impl Relation {
    pub fn empty(m: usize) -> Self {
        Relation {
            rows: vec![FixedBitSet::with_capacity(m); m],
        }
    }

    pub fn from_equivalence(e: &EquivalenceRelation) -> Self {
        let m = e.len();
        let blocks = e.blocks();
        let mut sets = Vec::with_capacity(blocks.len());
        for b in &blocks {
            let mut set = FixedBitSet::with_capacity(m);
            b.iter().for_each(|&x| set.insert(x));
            sets.push(set);
        }
        Relation {
            rows: (0..m).map(|x| sets[e.block_of(x)].clone()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn insert(&mut self, x: usize, y: usize) {
        self.rows[x].insert(y);
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.rows[x].contains(y)
    }

    pub fn row(&self, x: usize) -> &FixedBitSet {
        &self.rows[x]
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.rows.len() == other.rows.len() && self.rows.iter().zip(&other.rows).all(|(a, b)| a.is_subset(b))
    }

    pub fn compose(&self, other: &Relation) -> Result<Relation> {
        if self.len() != other.len() {
            return Err(Error::UniverseMismatch(self.len(), other.len()));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut out = FixedBitSet::with_capacity(self.len());
                for y in row.ones() {
                    out.union_with(&other.rows[y]);
                }
                out
            })
            .collect();
        Ok(Relation { rows })
    }

    pub fn is_equivalence(&self) -> bool {
        self.to_labels().is_some()
    }

    fn to_labels(&self) -> Option<Vec<usize>> {
        let m = self.len();
        let mut label = vec![usize::MAX; m];
        let mut next = 0;
        for x in 0..m {
            if !self.rows[x].contains(x) {
                return None;
            }
            if label[x] != usize::MAX {
                continue;
            }
            for y in self.rows[x].ones() {
                if label[y] != usize::MAX || self.rows[y] != self.rows[x] {
                    return None;
                }
                label[y] = next;
            }
            next += 1;
        }
        Some(label)
    }

    pub fn into_equivalence(self) -> Result<EquivalenceRelation> {
        let m = self.len();
        self.to_labels()
            .map(|l| EquivalenceRelation::from_dense_labels(&l, m))
            .ok_or(Error::NotEquivalence)
    }
}
