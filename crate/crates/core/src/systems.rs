//! Cross-section sets `C_I`, partition sets `𝒫_𝐈`, their restriction maps,
//! coherent systems of equivalences on them, and the correspondence between
//! such systems and the intervals `[Δ, ρ]` and `[Δ, λ]`.

use std::collections::{BTreeMap, HashMap};

use log::debug;
use serde_json::Value;

use crate::congruence::{EquivalenceRelation, UnionFind};
use crate::error::{Error, Result};
use crate::transform::SandwichElement;
use crate::variant::VariantContext;

/// Default cap on the number of coherent systems produced by one enumeration.
pub const DEFAULT_SYSTEM_CAP: usize = 200_000;

/// A restriction map from the items of node `from` to the items of node `to`.
#[derive(Clone, Debug)]
pub struct Restriction {
    pub from: usize,
    pub to: usize,
    pub map: Vec<usize>,
}

/// Finite sets indexed by nodes, with restriction maps between them.
/// Nodes are ordered so that every restriction goes from an earlier node to a
/// later one.
#[derive(Clone, Debug)]
pub struct SystemShape {
    pub sizes: Vec<usize>,
    pub restrictions: Vec<Restriction>,
    incoming: Vec<Vec<usize>>,
}

impl SystemShape {
    fn new(sizes: Vec<usize>, restrictions: Vec<Restriction>) -> Self {
        let mut incoming = vec![Vec::new(); sizes.len()];
        for (k, e) in restrictions.iter().enumerate() {
            assert!(e.from < e.to, "restrictions must run forward");
            incoming[e.to].push(k);
        }
        SystemShape {
            sizes,
            restrictions,
            incoming,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.sizes.len()
    }

    /// First restriction `ψ_u↾_v ⊈ ψ_v`, if any.
    pub fn incoherence(&self, psi: &[EquivalenceRelation]) -> Option<&Restriction> {
        self.restrictions.iter().find(|e| {
            let (src, dst) = (&psi[e.from], &psi[e.to]);
            let first = block_leaders(src);
            (0..src.len()).any(|x| !dst.related(e.map[x], e.map[first[src.block_of(x)]]))
        })
    }

    /// Least equivalence on node `v` containing every `ψ_u↾_v` for `u < v`.
    fn lower_bound(&self, v: usize, chosen: &[EquivalenceRelation]) -> EquivalenceRelation {
        let mut uf = UnionFind::new(self.sizes[v]);
        for &k in &self.incoming[v] {
            let e = &self.restrictions[k];
            let src = &chosen[e.from];
            let first = block_leaders(src);
            for x in 0..src.len() {
                uf.union(e.map[first[src.block_of(x)]], e.map[x]);
            }
        }
        uf.into_equivalence()
    }

    /// All coherent systems. Node `v` ranges over the coarsenings of its
    /// lower bound, so every partial assignment extends.
    pub fn enumerate(&self, cap: usize) -> Result<Vec<Vec<EquivalenceRelation>>> {
        let mut out = Vec::new();
        let mut chosen = Vec::with_capacity(self.num_nodes());
        self.extend(&mut chosen, &mut out, cap)?;
        Ok(out)
    }

    fn extend(
        &self,
        chosen: &mut Vec<EquivalenceRelation>,
        out: &mut Vec<Vec<EquivalenceRelation>>,
        cap: usize,
    ) -> Result<()> {
        let v = chosen.len();
        if v == self.num_nodes() {
            if out.len() == cap {
                return Err(Error::CapExceeded {
                    what: "coherent systems",
                    size: cap + 1,
                    cap,
                });
            }
            out.push(chosen.clone());
            return Ok(());
        }
        for psi in self.lower_bound(v, chosen).coarsenings() {
            chosen.push(psi);
            self.extend(chosen, out, cap)?;
            chosen.pop();
        }
        Ok(())
    }
}

/// Least element of each block.
fn block_leaders(rel: &EquivalenceRelation) -> Vec<usize> {
    let mut first = vec![usize::MAX; rel.num_blocks()];
    for x in (0..rel.len()).rev() {
        first[rel.block_of(x)] = x;
    }
    first
}

/// The sets `C_I` of cross-sections of `{A_i : i ∈ I}` for nonempty `I ⊆ [r]`.
///
/// Index sets are ordered by decreasing size, then lexicographically; the
/// cross-sections of each `C_I` lexicographically, as tuples `(c_i)_{i ∈ I}`.
#[derive(Clone, Debug)]
pub struct CrossSectionFamily {
    /// Zero-indexed `I`, sorted.
    pub index_sets: Vec<Vec<usize>>,
    /// Zero-indexed points `(c_i)_{i ∈ I}` for each cross-section.
    pub sections: Vec<Vec<Vec<usize>>>,
    lookup: Vec<HashMap<Vec<usize>, usize>>,
    node_of: HashMap<Vec<usize>, usize>,
    pub shape: SystemShape,
}

impl CrossSectionFamily {
    pub fn new(a: &SandwichElement) -> Self {
        let r = a.rank();
        let mut index_sets: Vec<Vec<usize>> = (1u32..1 << r)
            .map(|mask| (0..r).filter(|&i| mask >> i & 1 == 1).collect())
            .collect();
        index_sets.sort_by(|x, y| y.len().cmp(&x.len()).then_with(|| x.cmp(y)));

        let sections: Vec<Vec<Vec<usize>>> = index_sets
            .iter()
            .map(|set| {
                let mut out: Vec<Vec<usize>> = vec![Vec::new()];
                for &i in set {
                    out = out
                        .into_iter()
                        .flat_map(|prefix| {
                            a.blocks()[i].iter().map(move |&c| {
                                let mut next = prefix.clone();
                                next.push(c);
                                next
                            })
                        })
                        .collect();
                }
                out
            })
            .collect();
        let lookup: Vec<HashMap<Vec<usize>, usize>> = sections
            .iter()
            .map(|list| list.iter().cloned().enumerate().map(|(k, c)| (c, k)).collect())
            .collect();
        let node_of: HashMap<Vec<usize>, usize> = index_sets.iter().cloned().enumerate().map(|(k, s)| (s, k)).collect();

        let mut restrictions = Vec::new();
        for (u, big) in index_sets.iter().enumerate() {
            for (v, small) in index_sets.iter().enumerate() {
                if small.len() >= big.len() || !small.iter().all(|i| big.contains(i)) {
                    continue;
                }
                let coords: Vec<usize> = small.iter().map(|i| big.iter().position(|j| j == i).unwrap()).collect();
                let map = sections[u]
                    .iter()
                    .map(|c| lookup[v][&coords.iter().map(|&k| c[k]).collect::<Vec<_>>()])
                    .collect();
                restrictions.push(Restriction { from: u, to: v, map });
            }
        }
        let shape = SystemShape::new(sections.iter().map(Vec::len).collect(), restrictions);
        CrossSectionFamily {
            index_sets,
            sections,
            lookup,
            node_of,
            shape,
        }
    }

    pub fn node(&self, set: &[usize]) -> Option<usize> {
        self.node_of.get(set).copied()
    }

    /// `(node of I, index of C)` for an image set meeting each `A_i` at most once.
    pub fn locate(&self, a: &SandwichElement, image: &[usize]) -> Option<(usize, usize)> {
        let mut pts: Vec<(usize, usize)> = image.iter().map(|&x| (a.block_of(x), x)).collect();
        pts.sort_unstable();
        let set: Vec<usize> = pts.iter().map(|p| p.0).collect();
        let node = self.node(&set)?;
        let section: Vec<usize> = pts.iter().map(|p| p.1).collect();
        Some((node, *self.lookup[node].get(&section)?))
    }

    fn key(&self, node: usize) -> String {
        one_indexed(&self.index_sets[node])
    }
}

/// The sets `𝒫_𝐈` for partitions `𝐈` of `[r]`: partitions `{P_I : I ∈ 𝐈}` of
/// `X` with `P_I ∩ im(a) = {a_i : i ∈ I}`.
///
/// Index partitions are ordered finest first, then canonically; the members
/// of `𝒫_𝐈` by the lexicographic order of the block assignment of the points
/// outside `im(a)`.
#[derive(Clone, Debug)]
pub struct PartitionFamily {
    pub index_partitions: Vec<EquivalenceRelation>,
    pub partitions: Vec<Vec<EquivalenceRelation>>,
    lookup: Vec<HashMap<EquivalenceRelation, usize>>,
    node_of: HashMap<EquivalenceRelation, usize>,
    pub shape: SystemShape,
}

impl PartitionFamily {
    pub fn new(a: &SandwichElement) -> Self {
        let (n, r) = (a.degree(), a.rank());
        let reps = a.reps();
        let outside: Vec<usize> = (0..n).filter(|x| !reps.contains(x)).collect();

        let mut index_partitions = EquivalenceRelation::all(r);
        index_partitions.sort_by(|x, y| y.num_blocks().cmp(&x.num_blocks()).then_with(|| x.cmp(y)));

        let partitions: Vec<Vec<EquivalenceRelation>> = index_partitions
            .iter()
            .map(|ip| {
                let q = ip.num_blocks();
                let total = q.pow(outside.len() as u32);
                (0..total)
                    .map(|code| {
                        let mut labels = vec![0usize; n];
                        for (i, &x) in reps.iter().enumerate() {
                            labels[x] = ip.block_of(i);
                        }
                        let mut rest = code;
                        for &x in outside.iter().rev() {
                            labels[x] = rest % q;
                            rest /= q;
                        }
                        EquivalenceRelation::from_dense_labels(&labels, q)
                    })
                    .collect()
            })
            .collect();
        let lookup: Vec<HashMap<EquivalenceRelation, usize>> = partitions
            .iter()
            .map(|list| list.iter().cloned().enumerate().map(|(k, p)| (p, k)).collect())
            .collect();
        let node_of: HashMap<EquivalenceRelation, usize> = index_partitions
            .iter()
            .cloned()
            .enumerate()
            .map(|(k, p)| (p, k))
            .collect();

        let mut restrictions = Vec::new();
        for (u, fine) in index_partitions.iter().enumerate() {
            for (v, coarse) in index_partitions.iter().enumerate() {
                if u == v || !fine.refines(coarse) {
                    continue;
                }
                let map = partitions[u]
                    .iter()
                    .map(|p| {
                        let mut block_to_index = vec![0usize; p.num_blocks()];
                        for (i, &x) in reps.iter().enumerate() {
                            block_to_index[p.block_of(x)] = i;
                        }
                        let labels: Vec<usize> =
                            (0..n).map(|x| coarse.block_of(block_to_index[p.block_of(x)])).collect();
                        lookup[v][&EquivalenceRelation::from_dense_labels(&labels, coarse.num_blocks())]
                    })
                    .collect();
                restrictions.push(Restriction { from: u, to: v, map });
            }
        }
        let shape = SystemShape::new(partitions.iter().map(Vec::len).collect(), restrictions);
        PartitionFamily {
            index_partitions,
            partitions,
            lookup,
            node_of,
            shape,
        }
    }

    pub fn node(&self, ip: &EquivalenceRelation) -> Option<usize> {
        self.node_of.get(ip).copied()
    }

    /// `(node of 𝐈, index of 𝐏)` for a kernel partition of `X`.
    pub fn locate(&self, a: &SandwichElement, kernel: &EquivalenceRelation) -> Option<(usize, usize)> {
        let ip = EquivalenceRelation::from_labels(&a.reps().iter().map(|&x| kernel.block_of(x)).collect::<Vec<_>>());
        let node = self.node(&ip)?;
        Some((node, *self.lookup[node].get(kernel)?))
    }

    fn key(&self, node: usize) -> String {
        partition_key(&self.index_partitions[node])
    }
}

fn one_indexed(set: &[usize]) -> String {
    serde_json::to_string(&set.iter().map(|i| i + 1).collect::<Vec<_>>()).unwrap()
}

fn partition_key(p: &EquivalenceRelation) -> String {
    let blocks: Vec<Vec<usize>> = p.blocks().iter().map(|b| b.iter().map(|i| i + 1).collect()).collect();
    serde_json::to_string(&blocks).unwrap()
}

/// Which kind of index the components of a system are attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SystemKind {
    CrossSection,
    Partition,
}

/// A coherent tuple of equivalences, one per node of a family.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct System {
    pub kind: SystemKind,
    pub psi: Vec<EquivalenceRelation>,
    /// `max{q : ψ = ∇ on every node of size-index ≤ q}`.
    pub rank: usize,
}

pub type CSystem = System;
pub type PSystem = System;

impl System {
    pub fn is_discrete(&self) -> bool {
        self.psi.iter().all(EquivalenceRelation::is_discrete)
    }

    pub fn is_full(&self) -> bool {
        self.psi.iter().all(EquivalenceRelation::is_full)
    }

    pub fn meet(&self, other: &Self) -> Result<Vec<EquivalenceRelation>> {
        self.psi.iter().zip(&other.psi).map(|(x, y)| x.meet(y)).collect()
    }

    pub fn join(&self, other: &Self) -> Result<Vec<EquivalenceRelation>> {
        self.psi.iter().zip(&other.psi).map(|(x, y)| x.join(y)).collect()
    }
}

/// Everything needed to move between `[Δ, κ]` and pairs of systems.
#[derive(Clone, Debug)]
pub struct Systems {
    pub cross_sections: CrossSectionFamily,
    pub partitions: PartitionFamily,
    /// Per element of `P`: node and item in the cross-section family.
    c_loc: Vec<(usize, usize)>,
    /// Per element of `P`: node and item in the partition family.
    p_loc: Vec<(usize, usize)>,
    /// `|I|` per cross-section node and `|𝐈|` per partition node.
    c_level: Vec<usize>,
    p_level: Vec<usize>,
    r: usize,
}

impl Systems {
    pub fn new(ctx: &VariantContext) -> Result<Self> {
        let a = ctx.sandwich();
        let cross_sections = CrossSectionFamily::new(a);
        let partitions = PartitionFamily::new(a);
        let mut c_loc = Vec::with_capacity(ctx.p.len());
        let mut p_loc = Vec::with_capacity(ctx.p.len());
        for f in ctx.p.elements() {
            let image: Vec<usize> = f.image().iter().map(|x| x - 1).collect();
            c_loc.push(
                cross_sections
                    .locate(a, &image)
                    .ok_or_else(|| Error::Invalid(format!("image of {f} is not a cross-section")))?,
            );
            let kernel = kernel_relation(f.degree(), &f.kernel());
            p_loc.push(
                partitions
                    .locate(a, &kernel)
                    .ok_or_else(|| Error::Invalid(format!("kernel of {f} is not in any partition set")))?,
            );
        }
        let c_level = cross_sections.index_sets.iter().map(Vec::len).collect();
        let p_level = partitions
            .index_partitions
            .iter()
            .map(EquivalenceRelation::num_blocks)
            .collect();
        debug!(
            "families: {} cross-section sets, {} partition sets",
            cross_sections.index_sets.len(),
            partitions.index_partitions.len()
        );
        Ok(Systems {
            cross_sections,
            partitions,
            c_loc,
            p_loc,
            c_level,
            p_level,
            r: ctx.rank(),
        })
    }

    pub fn shape(&self, kind: SystemKind) -> &SystemShape {
        match kind {
            SystemKind::CrossSection => &self.cross_sections.shape,
            SystemKind::Partition => &self.partitions.shape,
        }
    }

    fn levels(&self, kind: SystemKind) -> &[usize] {
        match kind {
            SystemKind::CrossSection => &self.c_level,
            SystemKind::Partition => &self.p_level,
        }
    }

    fn loc(&self, kind: SystemKind) -> &[(usize, usize)] {
        match kind {
            SystemKind::CrossSection => &self.c_loc,
            SystemKind::Partition => &self.p_loc,
        }
    }

    /// `L_C` is the set of `f` with `cross_section_of(f) = C`.
    pub fn cross_section_of(&self, f: usize) -> (usize, usize) {
        self.c_loc[f]
    }

    /// `R_𝐏` is the set of `f` with `partition_of(f) = 𝐏`.
    pub fn partition_of(&self, f: usize) -> (usize, usize) {
        self.p_loc[f]
    }

    /// Validates coherence and computes the rank.
    pub fn system(&self, kind: SystemKind, psi: Vec<EquivalenceRelation>) -> Result<System> {
        let shape = self.shape(kind);
        if psi.len() != shape.num_nodes() {
            return Err(Error::Invalid(format!(
                "expected {} components, got {}",
                shape.num_nodes(),
                psi.len()
            )));
        }
        for (v, p) in psi.iter().enumerate() {
            if p.len() != shape.sizes[v] {
                return Err(Error::UniverseMismatch(p.len(), shape.sizes[v]));
            }
        }
        if let Some(e) = shape.incoherence(&psi) {
            return Err(Error::Incoherent {
                from: self.node_key(kind, e.from),
                to: self.node_key(kind, e.to),
            });
        }
        let levels = self.levels(kind);
        let rank = (0..=self.r)
            .rev()
            .find(|&q| psi.iter().zip(levels).all(|(p, &l)| l > q || p.is_full()))
            .unwrap_or(0);
        Ok(System { kind, psi, rank })
    }

    pub fn node_key(&self, kind: SystemKind, node: usize) -> String {
        match kind {
            SystemKind::CrossSection => self.cross_sections.key(node),
            SystemKind::Partition => self.partitions.key(node),
        }
    }

    /// `Ψ(θ)`: on each node, the pairs of items whose classes `θ` links.
    fn extract(&self, kind: SystemKind, bound: &EquivalenceRelation, theta: &EquivalenceRelation) -> Result<System> {
        if !theta.refines(bound) {
            return Err(Error::Invalid(
                "relation is not contained in the bounding congruence".into(),
            ));
        }
        let shape = self.shape(kind);
        let loc = self.loc(kind);
        let mut ufs: Vec<UnionFind> = shape.sizes.iter().map(|&m| UnionFind::new(m)).collect();
        let mut first = vec![usize::MAX; theta.num_blocks()];
        for (f, &(node, item)) in loc.iter().enumerate() {
            let b = theta.block_of(f);
            if first[b] == usize::MAX {
                first[b] = f;
                continue;
            }
            let (other_node, other_item) = loc[first[b]];
            debug_assert_eq!(node, other_node);
            ufs[node].union(item, other_item);
        }
        self.system(kind, ufs.into_iter().map(UnionFind::into_equivalence).collect())
    }

    /// `⋃ bound ∩ (K × K')` over the pairs of classes linked by `Ψ`.
    fn assemble(&self, kind: SystemKind, bound: &EquivalenceRelation, psi: &System) -> Result<EquivalenceRelation> {
        if psi.kind != kind {
            return Err(Error::Invalid("system of the wrong kind".into()));
        }
        if let Some(e) = self.shape(kind).incoherence(&psi.psi) {
            return Err(Error::Incoherent {
                from: self.node_key(kind, e.from),
                to: self.node_key(kind, e.to),
            });
        }
        let labels: Vec<(usize, usize)> = self
            .loc(kind)
            .iter()
            .enumerate()
            .map(|(f, &(node, item))| (bound.block_of(f), psi.psi[node].block_of(item)))
            .collect();
        Ok(EquivalenceRelation::from_labels(&labels))
    }

    pub fn psi_extract_rho(&self, ctx: &VariantContext, theta: &EquivalenceRelation) -> Result<CSystem> {
        self.extract(SystemKind::CrossSection, &ctx.rho, theta)
    }

    pub fn assemble_rho(&self, ctx: &VariantContext, psi: &CSystem) -> Result<EquivalenceRelation> {
        self.assemble(SystemKind::CrossSection, &ctx.rho, psi)
    }

    pub fn psi_extract_lambda(&self, ctx: &VariantContext, theta: &EquivalenceRelation) -> Result<PSystem> {
        self.extract(SystemKind::Partition, &ctx.lambda, theta)
    }

    pub fn assemble_lambda(&self, ctx: &VariantContext, psi: &PSystem) -> Result<EquivalenceRelation> {
        self.assemble(SystemKind::Partition, &ctx.lambda, psi)
    }

    pub fn enumerate(&self, kind: SystemKind, cap: usize) -> Result<Vec<System>> {
        self.shape(kind)
            .enumerate(cap)?
            .into_iter()
            .map(|psi| self.system(kind, psi))
            .collect()
    }

    pub fn enumerate_csystems(&self, cap: usize) -> Result<Vec<CSystem>> {
        self.enumerate(SystemKind::CrossSection, cap)
    }

    pub fn enumerate_psystems(&self, cap: usize) -> Result<Vec<PSystem>> {
        self.enumerate(SystemKind::Partition, cap)
    }

    /// Map from node key to the blocks of `ψ` on that node.
    pub fn to_json(&self, psi: &System) -> Value {
        let map: BTreeMap<String, Vec<Vec<usize>>> = psi
            .psi
            .iter()
            .enumerate()
            .map(|(v, p)| (self.node_key(psi.kind, v), p.blocks()))
            .collect();
        serde_json::json!({ "rank": psi.rank, "psi": map })
    }

    /// The families themselves: node key to the list of items, one-indexed.
    pub fn families_json(&self) -> Value {
        let cs: BTreeMap<String, Vec<Vec<usize>>> = (0..self.cross_sections.index_sets.len())
            .map(|v| {
                let items = self.cross_sections.sections[v]
                    .iter()
                    .map(|c| c.iter().map(|x| x + 1).collect())
                    .collect();
                (self.cross_sections.key(v), items)
            })
            .collect();
        let ps: BTreeMap<String, Vec<String>> = (0..self.partitions.index_partitions.len())
            .map(|v| {
                let items = self.partitions.partitions[v].iter().map(partition_key).collect();
                (self.partitions.key(v), items)
            })
            .collect();
        serde_json::json!({ "cross_sections": cs, "partitions": ps })
    }
}

fn kernel_relation(n: usize, kernel: &[Vec<usize>]) -> EquivalenceRelation {
    let mut labels = vec![0usize; n];
    for (b, block) in kernel.iter().enumerate() {
        for &x in block {
            labels[x - 1] = b;
        }
    }
    EquivalenceRelation::from_dense_labels(&labels, kernel.len())
}
