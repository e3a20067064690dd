//! Finite posets given by an order predicate: Hasse diagrams, longest chains,
//! and the closed-form height of `Cong(P)`.

use fixedbitset::FixedBitSet;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::congruence::EquivalenceRelation;
use crate::error::{Error, Result};

/// A finite poset, stored with its nodes in a linear extension of the order.
#[derive(Clone, Debug)]
pub struct FiniteLattice {
    /// `below[j]`: nodes strictly below `j`.
    below: Vec<FixedBitSet>,
    /// Upper covers of each node.
    covers: Vec<Vec<usize>>,
    /// Congruence behind each node, when built from congruences.
    nodes: Vec<EquivalenceRelation>,
}

impl FiniteLattice {
    /// Builds from a partial order on `0..m`. Node indices are preserved.
    pub fn from_order(m: usize, leq: impl Fn(usize, usize) -> bool) -> Self {
        let mut below = vec![FixedBitSet::with_capacity(m); m];
        for (j, set) in below.iter_mut().enumerate() {
            for i in 0..m {
                if i != j && leq(i, j) {
                    set.insert(i);
                }
            }
        }
        Self::from_below(below, Vec::new())
    }

    /// Builds the inclusion order on a set of congruences, sorted by size so
    /// that the indices form a linear extension.
    pub fn from_congruences(mut nodes: Vec<EquivalenceRelation>) -> Self {
        nodes.sort_by_cached_key(|c| (c.pair_count(), c.clone()));
        nodes.dedup();
        let m = nodes.len();
        let sizes: Vec<usize> = nodes.iter().map(EquivalenceRelation::pair_count).collect();
        let leaders: Vec<Vec<usize>> = nodes.iter().map(block_leaders).collect();
        let below: Vec<FixedBitSet> = (0..m)
            .map(|j| {
                let mut set = FixedBitSet::with_capacity(m);
                for i in 0..j {
                    if sizes[i] < sizes[j] && refines_with(&leaders[i], &nodes[j]) {
                        set.insert(i);
                    }
                }
                set
            })
            .collect();
        Self::from_below(below, nodes)
    }

    fn from_below(below: Vec<FixedBitSet>, nodes: Vec<EquivalenceRelation>) -> Self {
        let m = below.len();
        let mut covers = vec![Vec::new(); m];
        for j in 0..m {
            let mut shadow = FixedBitSet::with_capacity(m);
            for k in below[j].ones() {
                shadow.union_with(&below[k]);
            }
            for i in below[j].ones() {
                if !shadow.contains(i) {
                    covers[i].push(j);
                }
            }
        }
        FiniteLattice { below, covers, nodes }
    }

    pub fn len(&self) -> usize {
        self.below.len()
    }

    pub fn is_empty(&self) -> bool {
        self.below.is_empty()
    }

    pub fn nodes(&self) -> &[EquivalenceRelation] {
        &self.nodes
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        i == j || self.below[j].contains(i)
    }

    /// Upper covers of `i`.
    pub fn covers(&self, i: usize) -> &[usize] {
        &self.covers[i]
    }

    /// All Hasse edges `(lower, upper)`.
    pub fn hasse_edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .covers
            .iter()
            .enumerate()
            .flat_map(|(i, up)| up.iter().map(move |&j| (i, j)))
            .collect();
        edges.sort_unstable();
        edges
    }

    fn up_closed(&self, i: usize) -> FixedBitSet {
        let mut set = FixedBitSet::with_capacity(self.len());
        set.extend((0..self.len()).filter(|&j| self.leq(i, j)));
        set
    }

    fn down_closed(&self, j: usize) -> FixedBitSet {
        let mut set = self.below[j].clone();
        set.insert(j);
        set
    }

    /// Least upper bound of `i` and `j`, if it exists.
    pub fn join(&self, i: usize, j: usize) -> Option<usize> {
        let mut common = self.up_closed(i);
        common.intersect_with(&self.up_closed(j));
        common.ones().find(|&k| common.ones().all(|l| self.leq(k, l)))
    }

    /// Greatest lower bound of `i` and `j`, if it exists.
    pub fn meet(&self, i: usize, j: usize) -> Option<usize> {
        let mut common = self.down_closed(i);
        common.intersect_with(&self.down_closed(j));
        common.ones().find(|&k| common.ones().all(|l| self.leq(l, k)))
    }

    /// Do all meets and joins exist?
    pub fn is_lattice(&self) -> bool {
        let m = self.len();
        (0..m).all(|i| (i + 1..m).all(|j| self.join(i, j).is_some() && self.meet(i, j).is_some()))
    }

    pub fn is_chain(&self) -> bool {
        let m = self.len();
        (0..m).all(|i| (i + 1..m).all(|j| self.leq(i, j) || self.leq(j, i)))
    }

    /// Maximum number of elements in a chain, with a witness chain listed
    /// bottom-up. Ties go to the smallest node index.
    pub fn height(&self) -> (usize, Vec<usize>) {
        let m = self.len();
        if m == 0 {
            return (0, Vec::new());
        }
        // longest chain starting at each node, over the cover DAG
        let order = self.topological_order();
        let mut best = vec![1usize; m];
        let mut next = vec![usize::MAX; m];
        for &i in order.iter().rev() {
            for &j in &self.covers[i] {
                if best[j] + 1 > best[i] || (best[j] + 1 == best[i] && j < next[i]) {
                    best[i] = best[j] + 1;
                    next[i] = j;
                }
            }
        }
        let start = (0..m).max_by(|&x, &y| best[x].cmp(&best[y]).then(y.cmp(&x))).unwrap();
        let mut chain = vec![start];
        while next[*chain.last().unwrap()] != usize::MAX {
            chain.push(next[*chain.last().unwrap()]);
        }
        (best[start], chain)
    }

    fn topological_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&j| (self.below[j].count_ones(..), j));
        order
    }

    /// The product order on pairs `(i, j)`, indexed `i * other.len() + j`.
    pub fn product(&self, other: &FiniteLattice) -> FiniteLattice {
        let k = other.len();
        FiniteLattice::from_order(self.len() * k, |x, y| self.leq(x / k, y / k) && other.leq(x % k, y % k))
    }

    /// Hasse diagram in DOT, optionally labelling nodes.
    pub fn to_dot(&self, name: &str, label: impl Fn(usize) -> String) -> String {
        let mut out = format!("digraph \"{name}\" {{\n  rankdir=BT;\n  node [shape=circle, fontsize=9];\n");
        for i in 0..self.len() {
            out.push_str(&format!("  n{i} [label=\"{}\"];\n", label(i)));
        }
        for (i, j) in self.hasse_edges() {
            out.push_str(&format!("  n{i} -> n{j} [arrowhead=none];\n"));
        }
        out.push_str("}\n");
        out
    }
}

fn block_leaders(rel: &EquivalenceRelation) -> Vec<usize> {
    let mut first = vec![usize::MAX; rel.num_blocks()];
    for x in (0..rel.len()).rev() {
        first[rel.block_of(x)] = x;
    }
    (0..rel.len()).map(|x| first[rel.block_of(x)]).collect()
}

/// `a ⊆ b`, given the block leader of each point under `a`.
fn refines_with(leaders: &[usize], b: &EquivalenceRelation) -> bool {
    leaders.iter().enumerate().all(|(x, &l)| b.related(x, l))
}

/// Stirling number of the second kind `S(r, q)`.
pub fn stirling2(r: usize, q: usize) -> BigUint {
    let mut row = vec![BigUint::one()];
    for n in 1..=r {
        let mut next = vec![BigUint::zero(); n + 1];
        for k in 1..=n {
            let stay = if k < n { &row[k] * k } else { BigUint::zero() };
            next[k] = stay + &row[k - 1];
        }
        row = next;
    }
    row.get(q).cloned().unwrap_or_default()
}

/// Bell number `B(r)`.
pub fn bell(r: usize) -> BigUint {
    (0..=r).map(|q| stirling2(r, q)).sum()
}

/// `Σ_{q=1}^r S(r, q) q^{n−r}`, the number of partitions of an `n`-set
/// whose blocks each meet a fixed `r`-subset.
pub fn partition_sum(n: usize, r: usize) -> BigUint {
    (1..=r)
        .map(|q| stirling2(r, q) * BigUint::from(q).pow((n - r) as u32))
        .sum()
}

fn check_blocks(n: usize, blocks: &[usize]) -> Result<()> {
    if blocks.is_empty() || blocks.contains(&0) || blocks.iter().sum::<usize>() != n {
        return Err(Error::Invalid(format!(
            "block sizes {blocks:?} do not partition {n} points"
        )));
    }
    Ok(())
}

/// Height of `[Δ_P, λ]`: `1 − B(r) + Σ S(r, q) q^{n−r}`.
pub fn height_lambda(n: usize, blocks: &[usize]) -> Result<BigInt> {
    check_blocks(n, blocks)?;
    let r = blocks.len();
    Ok(BigInt::one() - BigInt::from(bell(r)) + BigInt::from(partition_sum(n, r)))
}

/// Height of `[Δ_P, ρ]`: `1 − 2^r + ∏(|A_q| + 1)`.
pub fn height_rho(n: usize, blocks: &[usize]) -> Result<BigInt> {
    check_blocks(n, blocks)?;
    let product: BigInt = blocks.iter().map(|&b| BigInt::from(b + 1)).product();
    Ok(BigInt::one() - (BigInt::one() << blocks.len()) + product)
}

/// Height of `Cong(T_r)`: `3r − 2` for `r ≤ 3`, `3r − 1` otherwise.
pub fn height_chain(r: usize) -> usize {
    if r <= 3 {
        3 * r - 2
    } else {
        3 * r - 1
    }
}

/// Height of `Cong(P)` from the block sizes `|A_1|, …, |A_r|` of the sandwich element.
pub fn height_formula(n: usize, blocks: &[usize]) -> Result<BigInt> {
    check_blocks(n, blocks)?;
    let r = blocks.len();
    let correction = if r <= 3 { 2 } else { 1 };
    let product: BigInt = blocks.iter().map(|&b| BigInt::from(b + 1)).product();
    Ok(BigInt::from(3 * r) + product + BigInt::from(partition_sum(n, r))
        - (BigInt::one() << r)
        - BigInt::from(bell(r))
        - correction)
}
