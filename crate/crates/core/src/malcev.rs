//! Ideals, Rees congruences, normal subgroups of group H-classes, the
//! relations `ν_N` and `R_N^S`, the congruence chain of `T ≅ T_r` and the lift
//! `ξ ↦ ξ^♯` into `P`.
//!
//! Layers are indexed by transformation rank, which is correct for `P` and
//! `T` where the D-classes are exactly the rank classes.

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::congruence::{congruence_closure, EquivalenceRelation, UnionFind};
use crate::error::{Error, Result};
use crate::semigroup::{FiniteSemigroup, GreenStructure};
use crate::variant::VariantContext;

/// A group H-class together with its normal subgroups.
#[derive(Clone, Debug)]
pub struct GroupHClass {
    elements: Vec<usize>,
    identity: usize,
    /// Multiplication table in local positions.
    local: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    normal_subgroups: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NormalLabel {
    #[serde(rename = "triv")]
    Triv,
    V,
    A,
    S,
}

impl std::fmt::Display for NormalLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormalLabel::Triv => "triv",
            NormalLabel::V => "V",
            NormalLabel::A => "A",
            NormalLabel::S => "S",
        })
    }
}

impl GroupHClass {
    /// Checks the group axioms on `elements` (indices into `s`) and computes
    /// the normal subgroups.
    pub fn new(s: &FiniteSemigroup, mut elements: Vec<usize>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        if elements.is_empty() {
            return Err(Error::NotGroup("empty set".into()));
        }
        let pos = |x: usize| elements.binary_search(&x).ok();
        let k = elements.len();
        let mut local = vec![vec![0; k]; k];
        for (i, &x) in elements.iter().enumerate() {
            for (j, &y) in elements.iter().enumerate() {
                let z = s.mul(x, y);
                local[i][j] = pos(z).ok_or_else(|| Error::NotGroup(format!("{} escapes", s.element(z))))?;
            }
        }
        let e = (0..k)
            .find(|&i| (0..k).all(|j| local[i][j] == j && local[j][i] == j))
            .ok_or_else(|| Error::NotGroup("no identity".into()))?;
        let inverse = (0..k)
            .map(|i| {
                (0..k)
                    .find(|&j| local[i][j] == e && local[j][i] == e)
                    .ok_or_else(|| Error::NotGroup(format!("{} has no inverse", s.element(elements[i]))))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut g = GroupHClass {
            identity: elements[e],
            elements,
            local,
            inverse,
            normal_subgroups: Vec::new(),
        };
        g.normal_subgroups = g.find_normal_subgroups();
        Ok(g)
    }

    /// The H-class of the idempotent `e`.
    pub fn of_idempotent(s: &FiniteSemigroup, greens: &GreenStructure, e: usize) -> Result<Self> {
        if !s.is_idempotent(e) {
            return Err(Error::NotGroup(format!("{} is not idempotent", s.element(e))));
        }
        let class = (0..s.len()).filter(|&x| greens.h.related(x, e)).collect();
        Self::new(s, class)
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// All normal subgroups as sorted element lists, ordered by size.
    pub fn normal_subgroups(&self) -> &[Vec<usize>] {
        &self.normal_subgroups
    }

    pub fn contains(&self, x: usize) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    /// Name of a normal subgroup, assuming the group is symmetric.
    pub fn label(&self, n: &[usize]) -> NormalLabel {
        if n.len() == 1 {
            NormalLabel::Triv
        } else if n.len() == self.order() {
            NormalLabel::S
        } else if 2 * n.len() == self.order() {
            NormalLabel::A
        } else {
            NormalLabel::V
        }
    }

    /// Is `n` a normal subgroup of this group?
    pub fn is_normal_subgroup(&self, n: &[usize]) -> bool {
        let Some(mut local) = n
            .iter()
            .map(|&x| self.elements.binary_search(&x).ok())
            .collect::<Option<Vec<usize>>>()
        else {
            return false;
        };
        local.sort_unstable();
        local.dedup();
        let mut member = vec![false; self.order()];
        for &i in &local {
            member[i] = true;
        }
        let closed = local.iter().all(|&i| local.iter().all(|&j| member[self.local[i][j]]));
        let conj = (0..self.order()).all(|g| local.iter().all(|&x| member[self.conjugate(g, x)]));
        !local.is_empty() && closed && conj
    }

    fn conjugate(&self, g: usize, x: usize) -> usize {
        self.local[self.local[g][x]][self.inverse[g]]
    }

    /// Unions of conjugacy classes containing the identity, kept when closed.
    fn find_normal_subgroups(&self) -> Vec<Vec<usize>> {
        let k = self.order();
        let mut class_of = vec![usize::MAX; k];
        let mut classes: Vec<Vec<usize>> = Vec::new();
        for x in 0..k {
            if class_of[x] != usize::MAX {
                continue;
            }
            let mut class: Vec<usize> = (0..k).map(|g| self.conjugate(g, x)).collect();
            class.sort_unstable();
            class.dedup();
            for &y in &class {
                class_of[y] = classes.len();
            }
            classes.push(class);
        }
        let e = self.elements.binary_search(&self.identity).unwrap();
        let id_class = class_of[e];
        let others: Vec<usize> = (0..classes.len()).filter(|&c| c != id_class).collect();
        let mut found = Vec::new();
        for mask in 0u64..(1u64 << others.len()) {
            let mut member = vec![false; k];
            member[e] = true;
            for (bit, &c) in others.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    for &y in &classes[c] {
                        member[y] = true;
                    }
                }
            }
            let set: Vec<usize> = (0..k).filter(|&i| member[i]).collect();
            if set.iter().all(|&i| set.iter().all(|&j| member[self.local[i][j]])) {
                found.push(set.into_iter().map(|i| self.elements[i]).collect::<Vec<_>>());
            }
        }
        found.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        found
    }
}

/// Largest transformation rank present in `s`.
pub fn max_rank(s: &FiniteSemigroup) -> usize {
    (0..s.len()).map(|x| s.rank_of(x)).max().unwrap_or(0)
}

/// Idempotents of rank `q`, one per group H-class, in index order.
pub fn group_h_class_idempotents(s: &FiniteSemigroup, q: usize) -> Vec<usize> {
    (0..s.len())
        .filter(|&x| s.rank_of(x) == q && s.is_idempotent(x))
        .collect()
}

/// The canonical group H-class of rank `q`: the one holding the least idempotent.
pub fn canonical_group(s: &FiniteSemigroup, greens: &GreenStructure, q: usize) -> Result<GroupHClass> {
    let e = *group_h_class_idempotents(s, q)
        .first()
        .ok_or_else(|| Error::Invalid(format!("no idempotent of rank {q}")))?;
    GroupHClass::of_idempotent(s, greens, e)
}

/// `ν_N = S¹(N×N)S¹ ∩ (J×J)` for the D-class `J` holding `N`, returned as an
/// equivalence on all of `S` that is trivial outside `J`.
///
/// `e` is the identity of the group containing `N`. Generated by the pairs
/// `(aeb, anb)` with `n ∈ N`, since `(axb, ayb) = (a'eb, a'(x⁻¹y)b)` with `a' = ax`.
pub fn nu_n(s: &FiniteSemigroup, j: &FixedBitSet, e: usize, n: &[usize]) -> EquivalenceRelation {
    let m = s.len();
    let mut uf = UnionFind::new(m);
    // a ranges over S¹; a = 1 is encoded as None
    let lefts = std::iter::once(None).chain((0..m).map(Some));
    for a in lefts {
        let left = |x: usize| a.map_or(x, |a| s.mul(a, x));
        let ae = left(e);
        if !j.contains(ae) {
            continue;
        }
        for &g in n {
            let ag = left(g);
            if !j.contains(ag) || ag == ae {
                continue;
            }
            uf.union(ae, ag);
            let (row_e, row_g) = (s.row(ae), s.row(ag));
            for b in 0..m {
                let (x, y) = (row_e[b] as usize, row_g[b] as usize);
                if j.contains(x) && j.contains(y) {
                    uf.union(x, y);
                }
            }
        }
    }
    uf.into_equivalence()
}

/// `R_N^S = ∇_{I_{q-1}} ∪ ν_N ∪ Δ` for `N` a normal subgroup of a group
/// H-class of rank `q`.
pub fn rees_with_group(
    s: &FiniteSemigroup,
    greens: &GreenStructure,
    q: usize,
    n: &[usize],
) -> Result<EquivalenceRelation> {
    let r = max_rank(s);
    if q == 0 || q > r {
        return Err(Error::Invalid(format!("rank {q} outside 1..={r}")));
    }
    let first = *n
        .first()
        .ok_or_else(|| Error::Invalid("empty normal subgroup".into()))?;
    if n.iter().any(|&x| s.rank_of(x) != q) {
        return Err(Error::Invalid(format!("N does not lie in rank {q}")));
    }
    let e = (0..s.len())
        .find(|&x| s.is_idempotent(x) && greens.h.related(x, first))
        .ok_or_else(|| Error::Invalid("N does not lie in a group H-class".into()))?;
    let g = GroupHClass::of_idempotent(s, greens, e)?;
    if !g.is_normal_subgroup(n) {
        return Err(Error::Invalid("N is not a normal subgroup of its H-class".into()));
    }
    Ok(rees_with_group_unchecked(s, q, e, n))
}

fn rees_with_group_unchecked(s: &FiniteSemigroup, q: usize, e: usize, n: &[usize]) -> EquivalenceRelation {
    let mut uf = UnionFind::from_equivalence(&nu_n(s, &rank_layer(s, q), e, n));
    let ideal = s.rank_ideal(q - 1);
    if let Some((&x, rest)) = ideal.split_first() {
        for &y in rest {
            uf.union(x, y);
        }
    }
    uf.into_equivalence()
}

/// Elements of rank exactly `q`.
pub fn rank_layer(s: &FiniteSemigroup, q: usize) -> FixedBitSet {
    let mut j = FixedBitSet::with_capacity(s.len());
    j.extend((0..s.len()).filter(|&x| s.rank_of(x) == q));
    j
}

/// One congruence of the chain. `q` and `normal` are absent for `∇`.
#[derive(Clone, Debug, Serialize)]
pub struct ChainEntry {
    pub q: Option<usize>,
    #[serde(rename = "N_name")]
    pub n_name: String,
    pub rank: usize,
    pub size_of_congruence: usize,
    #[serde(skip)]
    pub normal: Vec<usize>,
    #[serde(skip)]
    pub congruence: EquivalenceRelation,
}

/// The congruences of `T ≅ T_r`, increasing.
#[derive(Clone, Debug, Serialize)]
pub struct MalcevChain {
    pub r: usize,
    pub entries: Vec<ChainEntry>,
}

impl MalcevChain {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn congruences(&self) -> impl Iterator<Item = &EquivalenceRelation> {
        self.entries.iter().map(|e| &e.congruence)
    }

    pub fn position(&self, xi: &EquivalenceRelation) -> Option<usize> {
        self.entries.iter().position(|e| &e.congruence == xi)
    }
}

/// The chain `Δ = R_{id_1} ⊂ … ⊂ ∇` of `T`.
///
/// When `r = 1` the single congruence `Δ = ∇` gets rank 0.
pub fn malcev_chain(t: &FiniteSemigroup, greens: &GreenStructure) -> Result<MalcevChain> {
    let r = max_rank(t);
    let mut entries: Vec<ChainEntry> = Vec::new();
    for q in 1..=r {
        let g = canonical_group(t, greens, q)?;
        for n in g.normal_subgroups() {
            let congruence = rees_with_group_unchecked(t, q, g.identity(), n);
            if entries.last().is_some_and(|prev| prev.congruence == congruence) {
                continue;
            }
            entries.push(ChainEntry {
                q: Some(q),
                n_name: g.label(n).to_string(),
                rank: q - 1,
                size_of_congruence: congruence.pair_count(),
                normal: n.clone(),
                congruence,
            });
        }
    }
    let nabla = EquivalenceRelation::full(t.len());
    if entries.last().is_none_or(|prev| prev.congruence != nabla) {
        entries.push(ChainEntry {
            q: None,
            n_name: "nabla".into(),
            rank: r,
            size_of_congruence: nabla.pair_count(),
            normal: Vec::new(),
            congruence: nabla,
        });
    }
    debug_assert!(entries.windows(2).all(|w| w[0].congruence.refines(&w[1].congruence)));
    Ok(MalcevChain { r, entries })
}

/// `ξ^♯`, the congruence of `P` generated by `ξ ∈ Cong(T)`, via the chain:
/// `(R_N^T)^♯ = R_N^P` and `∇_T^♯ = ∇_P` for `r ≥ 2`.
pub fn lift_sharp(ctx: &VariantContext, chain: &MalcevChain, xi: &EquivalenceRelation) -> Result<EquivalenceRelation> {
    if xi.len() != ctx.t.len() {
        return Err(Error::UniverseMismatch(xi.len(), ctx.t.len()));
    }
    if ctx.rank() == 1 {
        return Ok(lift_by_closure(ctx, xi));
    }
    let i = chain
        .position(xi)
        .ok_or_else(|| Error::Invalid("relation is not a congruence of T".into()))?;
    let entry = &chain.entries[i];
    Ok(match entry.q {
        None => EquivalenceRelation::full(ctx.p.len()),
        Some(q) => {
            let n: Vec<usize> = entry.normal.iter().map(|&h| ctx.t_to_p(h)).collect();
            let e = n
                .iter()
                .copied()
                .find(|&x| ctx.p.is_idempotent(x))
                .expect("N holds its identity");
            rees_with_group_unchecked(&ctx.p, q, e, &n)
        }
    })
}

/// `ξ^♯` computed directly as a congruence closure in `P`.
pub fn lift_by_closure(ctx: &VariantContext, xi: &EquivalenceRelation) -> EquivalenceRelation {
    congruence_closure(
        &ctx.p,
        xi.nontrivial_pairs().map(|(x, y)| (ctx.t_to_p(x), ctx.t_to_p(y))),
    )
}

/// `max{q : R_q^T ⊆ ξ}`, with `rank(Δ_{T_1}) = 0`.
pub fn rank_of_xi(t: &FiniteSemigroup, xi: &EquivalenceRelation) -> usize {
    let r = max_rank(t);
    if r <= 1 {
        return 0;
    }
    (1..=r)
        .rev()
        .find(|&q| {
            let ideal = t.rank_ideal(q);
            ideal.iter().all(|&x| xi.related(x, ideal[0]))
        })
        .unwrap_or(0)
}

/// `max{q : κ ∩ R_q^P ⊆ θ}` for `θ ⊆ κ`.
///
/// `κ` preserves rank, so `κ ∩ R_q^P` is `κ` restricted to ranks `≤ q`, and
/// each `f` is `κ`-related to `φ(f)`.
pub fn rank_of_theta(ctx: &VariantContext, theta: &EquivalenceRelation) -> usize {
    let p = &ctx.p;
    let fine_from = (0..p.len())
        .filter(|&f| !theta.related(f, ctx.t_to_p(ctx.phi(f))))
        .map(|f| p.rank_of(f))
        .min();
    match fine_from {
        None => ctx.rank(),
        Some(q) => q - 1,
    }
}

/// `κ ∩ R_q^P`.
pub fn kappa_q(ctx: &VariantContext, q: usize) -> EquivalenceRelation {
    let labels: Vec<usize> = (0..ctx.p.len())
        .map(|f| {
            if ctx.p.rank_of(f) <= q {
                ctx.phi(f)
            } else {
                ctx.t.len() + f
            }
        })
        .collect();
    EquivalenceRelation::from_dense_labels(&labels, ctx.t.len() + ctx.p.len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::{enumerate_all_congruences, is_congruence, rees_congruence};
    use crate::transform::{SandwichElement, Transformation};

    fn ctx(a: &str) -> VariantContext {
        VariantContext::from_transformation(&a.parse().unwrap()).unwrap()
    }

    fn sym(n: usize) -> (FiniteSemigroup, GroupHClass) {
        let s = FiniteSemigroup::full_transformation_monoid(n);
        let g = s.greens();
        let id = s.index_of(&Transformation::identity(n)).unwrap();
        let grp = GroupHClass::of_idempotent(&s, &g, id).unwrap();
        (s, grp)
    }

    #[test]
    fn normal_subgroups_of_symmetric_groups() {
        let sizes = |n| sym(n).1.normal_subgroups().iter().map(Vec::len).collect::<Vec<_>>();
        assert_eq!(sizes(1), vec![1]);
        assert_eq!(sizes(2), vec![1, 2]);
        assert_eq!(sizes(3), vec![1, 3, 6]);
        assert_eq!(sizes(4), vec![1, 4, 12, 24]);
        let (_, s4) = sym(4);
        let labels: Vec<_> = s4.normal_subgroups().iter().map(|n| s4.label(n)).collect();
        assert_eq!(
            labels,
            [NormalLabel::Triv, NormalLabel::V, NormalLabel::A, NormalLabel::S]
        );
        for n in s4.normal_subgroups() {
            assert!(s4.is_normal_subgroup(n));
        }
    }

    #[test]
    fn non_group_rejected() {
        let s = FiniteSemigroup::full_transformation_monoid(2);
        assert!(matches!(GroupHClass::new(&s, vec![0, 1, 2]), Err(Error::NotGroup(_))));
        let g = s.greens();
        let not_idem = s.index_of(&"2: 2 1".parse().unwrap()).unwrap();
        assert!(GroupHClass::of_idempotent(&s, &g, not_idem).is_err());
    }

    #[test]
    fn non_normal_subgroup_rejected() {
        let (s, s3) = sym(3);
        let g = s.greens();
        let t = s.index_of(&"3: 2 1 3".parse().unwrap()).unwrap();
        let pair = vec![s3.identity(), t];
        assert!(!s3.is_normal_subgroup(&pair));
        assert!(rees_with_group(&s, &g, 3, &pair).is_err());
        assert!(rees_with_group(&s, &g, 4, &[s3.identity()]).is_err());
        assert!(rees_with_group(&s, &g, 0, &[s3.identity()]).is_err());
    }

    fn raw_nu(s: &FiniteSemigroup, j: &FixedBitSet, n: &[usize]) -> Vec<(usize, usize)> {
        let m = s.len();
        let s1: Vec<Option<usize>> = std::iter::once(None).chain((0..m).map(Some)).collect();
        let act = |a: Option<usize>, x: usize, b: Option<usize>| {
            let ax = a.map_or(x, |a| s.mul(a, x));
            b.map_or(ax, |b| s.mul(ax, b))
        };
        let mut pairs = Vec::new();
        for &x in n {
            for &y in n {
                for &a in &s1 {
                    for &b in &s1 {
                        let (u, v) = (act(a, x, b), act(a, y, b));
                        if j.contains(u) && j.contains(v) {
                            pairs.push((u, v));
                        }
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    #[test]
    fn nu_matches_raw_definition() {
        let s = FiniteSemigroup::full_transformation_monoid(3);
        let greens = s.greens();
        for q in 1..=3 {
            let j = rank_layer(&s, q);
            for e in group_h_class_idempotents(&s, q) {
                let g = GroupHClass::of_idempotent(&s, &greens, e).unwrap();
                for n in g.normal_subgroups() {
                    let nu = nu_n(&s, &j, e, n);
                    let mut expected: Vec<(usize, usize)> = (0..s.len())
                        .flat_map(|x| (0..s.len()).map(move |y| (x, y)))
                        .filter(|&(x, y)| j.contains(x) && nu.related(x, y))
                        .collect();
                    expected.sort_unstable();
                    assert_eq!(raw_nu(&s, &j, n), expected);
                    assert!(nu.refines(&greens.h));
                }
            }
        }
    }

    #[test]
    fn nu_of_whole_group_is_h_and_trivial_is_diagonal() {
        let s = FiniteSemigroup::full_transformation_monoid(3);
        let greens = s.greens();
        let j = rank_layer(&s, 2);
        let g = canonical_group(&s, &greens, 2).unwrap();
        let whole = nu_n(&s, &j, g.identity(), g.elements());
        for x in j.ones() {
            for y in j.ones() {
                assert_eq!(whole.related(x, y), greens.h.related(x, y));
            }
        }
        assert!(nu_n(&s, &j, g.identity(), &[g.identity()]).is_discrete());
    }

    #[test]
    fn nu_is_independent_of_the_group_h_class() {
        let s = FiniteSemigroup::full_transformation_monoid(4);
        let greens = s.greens();
        for q in 1..=4 {
            let j = rank_layer(&s, q);
            let family = |e: usize| {
                let g = GroupHClass::of_idempotent(&s, &greens, e).unwrap();
                let mut rels: Vec<_> = g.normal_subgroups().iter().map(|n| nu_n(&s, &j, e, n)).collect();
                rels.sort();
                rels
            };
            let idems = group_h_class_idempotents(&s, q);
            let reference = family(idems[0]);
            for &e in idems.iter().skip(1).step_by(7) {
                assert_eq!(family(e), reference, "q = {q}");
            }
        }
    }

    #[test]
    fn rees_with_group_special_cases() {
        let s = FiniteSemigroup::full_transformation_monoid(3);
        let greens = s.greens();
        let g1 = canonical_group(&s, &greens, 1).unwrap();
        assert!(rees_with_group(&s, &greens, 1, &[g1.identity()]).unwrap().is_discrete());
        for q in 1..3 {
            let next = canonical_group(&s, &greens, q + 1).unwrap();
            let r = rees_with_group(&s, &greens, q + 1, &[next.identity()]).unwrap();
            assert_eq!(r, rees_congruence(s.len(), &s.rank_ideal(q)));
        }
    }

    #[test]
    fn chain_lengths() {
        for (n, len) in [(1, 1), (2, 4), (3, 7), (4, 11)] {
            let t = FiniteSemigroup::full_transformation_monoid(n);
            let chain = malcev_chain(&t, &t.greens()).unwrap();
            assert_eq!(chain.len(), len, "r = {n}");
            for c in chain.congruences() {
                assert!(is_congruence(c, &t));
            }
        }
    }

    #[test]
    fn chain_equals_oracle_for_t3() {
        let t = FiniteSemigroup::full_transformation_monoid(3);
        let chain = malcev_chain(&t, &t.greens()).unwrap();
        let mut ours: Vec<_> = chain.congruences().cloned().collect();
        ours.sort();
        assert_eq!(ours, enumerate_all_congruences(&t, 100).unwrap());
    }

    #[test]
    fn chain_report() {
        let t = FiniteSemigroup::full_transformation_monoid(3);
        let chain = malcev_chain(&t, &t.greens()).unwrap();
        let names: Vec<_> = chain.entries.iter().map(|e| (e.q, e.n_name.as_str(), e.rank)).collect();
        assert_eq!(
            names,
            [
                (Some(1), "triv", 0),
                (Some(2), "triv", 1),
                (Some(2), "S", 1),
                (Some(3), "triv", 2),
                (Some(3), "A", 2),
                (Some(3), "S", 2),
                (None, "nabla", 3)
            ]
        );
        assert_eq!(chain.entries[0].size_of_congruence, 27);
        assert_eq!(chain.entries[6].size_of_congruence, 27 * 27);
        let json = serde_json::to_value(&chain).unwrap();
        assert_eq!(json["entries"][6]["q"], serde_json::Value::Null);
        assert_eq!(json["entries"][2]["N_name"], "S");
    }

    #[test]
    fn ranks_along_the_chain() {
        let t = FiniteSemigroup::full_transformation_monoid(3);
        let chain = malcev_chain(&t, &t.greens()).unwrap();
        for e in &chain.entries {
            assert_eq!(rank_of_xi(&t, &e.congruence), e.rank);
        }
        let t1 = FiniteSemigroup::full_transformation_monoid(1);
        assert_eq!(rank_of_xi(&t1, &EquivalenceRelation::discrete(1)), 0);
    }

    #[test]
    fn lift_agrees_with_closure() {
        for n in 1..=4 {
            for a in Transformation::all(n).filter(Transformation::is_idempotent) {
                let c = VariantContext::build(SandwichElement::new(a.clone()).unwrap()).unwrap();
                let chain = malcev_chain(&c.t, &c.t_greens).unwrap();
                for (i, xi) in chain.congruences().enumerate() {
                    let lifted = lift_sharp(&c, &chain, xi).unwrap();
                    assert_eq!(lifted, lift_by_closure(&c, xi), "a = {a}, entry {i}");
                    // R_N^P restricted to T is R_N^T
                    assert_eq!(&lifted.restrict(c.t_in_p()), xi);
                }
                if c.rank() == 1 {
                    let nabla = EquivalenceRelation::full(1);
                    assert!(lift_sharp(&c, &chain, &nabla).unwrap().is_discrete());
                }
            }
        }
    }

    #[test]
    fn lift_of_non_congruence_fails() {
        let c = ctx("3: 1 2 2");
        let chain = malcev_chain(&c.t, &c.t_greens).unwrap();
        let bogus = EquivalenceRelation::from_pairs(c.t.len(), [(0, 1)]);
        assert!(lift_sharp(&c, &chain, &bogus).is_err());
    }

    #[test]
    fn theta_ranks() {
        let c = ctx("4: 1 2 3 3");
        assert_eq!(rank_of_theta(&c, &c.kappa), 3);
        assert_eq!(rank_of_theta(&c, &EquivalenceRelation::discrete(c.p.len())), 0);
        for q in 0..=3 {
            assert_eq!(rank_of_theta(&c, &kappa_q(&c, q)), q);
            assert!(is_congruence(&kappa_q(&c, q), &c.p));
        }
        let r1 = ctx("3: 1 1 1");
        assert_eq!(rank_of_theta(&r1, &r1.kappa), 1);
        assert_eq!(rank_of_theta(&r1, &EquivalenceRelation::from_pairs(3, [(0, 1)])), 0);
    }

    #[test]
    fn lemma_on_h_restrictions() {
        // σ ∩ H|_D = ν_N with N the σ-class of e inside a group H-class of D
        for a in ["3: 1 2 2", "3: 1 1 1", "3: 1 1 3"] {
            let c = ctx(a);
            let all = enumerate_all_congruences(&c.p, 300).unwrap();
            for q in 1..=c.rank() {
                let j = rank_layer(&c.p, q);
                let g = canonical_group(&c.p, &c.p_greens, q).unwrap();
                for sigma in &all {
                    let n: Vec<usize> = g
                        .elements()
                        .iter()
                        .copied()
                        .filter(|&x| sigma.related(x, g.identity()))
                        .collect();
                    let nu = nu_n(&c.p, &j, g.identity(), &n);
                    for x in j.ones() {
                        for y in j.ones() {
                            let in_sigma = sigma.related(x, y) && c.p_greens.h.related(x, y);
                            assert_eq!(in_sigma, nu.related(x, y));
                        }
                    }
                }
            }
        }
    }
}
