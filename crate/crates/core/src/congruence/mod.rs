//! Equivalence-relation algebra and the brute-force congruence oracle.
//!
//! Nothing here consults the structural decomposition; the oracle works from
//! the multiplication table alone.

mod equivalence;

use std::collections::HashSet;

use log::info;
use rayon::prelude::*;

pub use equivalence::{for_each_partition, EquivalenceRelation, Relation, UnionFind};

use crate::error::{Error, Result, Side};
use crate::semigroup::FiniteSemigroup;

/// Default element cap for full lattice enumeration.
pub const DEFAULT_ENUMERATION_CAP: usize = 300;
/// Default element cap for the principal-only pass.
pub const DEFAULT_PRINCIPAL_CAP: usize = 1024;

/// A pair `(x, y)` related by `rel` whose translations by `s` are not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    pub x: usize,
    pub y: usize,
    pub s: usize,
    pub side: Side,
}

impl From<Violation> for Error {
    fn from(v: Violation) -> Self {
        Error::NotCongruence {
            x: v.x,
            y: v.y,
            s: v.s,
            side: v.side,
        }
    }
}

/// First compatibility failure of `rel` on `s`, if any.
///
/// Each element is compared with the first element of its block, which covers
/// every related pair by transitivity.
pub fn find_violation(rel: &EquivalenceRelation, s: &FiniteSemigroup) -> Option<Violation> {
    assert_eq!(rel.len(), s.len());
    let mut first = vec![usize::MAX; rel.num_blocks()];
    for x in 0..rel.len() {
        let b = rel.block_of(x);
        if first[b] == usize::MAX {
            first[b] = x;
            continue;
        }
        let y = first[b];
        for t in 0..s.len() {
            if !rel.related(s.mul(t, x), s.mul(t, y)) {
                return Some(Violation {
                    x: y,
                    y: x,
                    s: t,
                    side: Side::Left,
                });
            }
            if !rel.related(s.mul(x, t), s.mul(y, t)) {
                return Some(Violation {
                    x: y,
                    y: x,
                    s: t,
                    side: Side::Right,
                });
            }
        }
    }
    None
}

pub fn is_congruence(rel: &EquivalenceRelation, s: &FiniteSemigroup) -> bool {
    rel.len() == s.len() && find_violation(rel, s).is_none()
}

/// Smallest congruence containing `pairs`, by union-find saturation: every
/// successful merge of `(x, y)` queues the translates `(tx, ty)` and `(xt, yt)`.
pub fn congruence_closure(s: &FiniteSemigroup, pairs: impl IntoIterator<Item = (usize, usize)>) -> EquivalenceRelation {
    let mut uf = UnionFind::new(s.len());
    let mut queue = Vec::new();
    for (x, y) in pairs {
        if uf.union(x, y) {
            queue.push((x, y));
        }
    }
    saturate(s, uf, queue)
}

/// Closure of an equivalence that is already known to be one (e.g. a join).
pub fn congruence_generated_by(s: &FiniteSemigroup, rel: &EquivalenceRelation) -> EquivalenceRelation {
    congruence_closure(
        s,
        rel.blocks().into_iter().flat_map(|b| {
            let head = b[0];
            b.into_iter().skip(1).map(move |y| (head, y))
        }),
    )
}

fn saturate(s: &FiniteSemigroup, mut uf: UnionFind, mut queue: Vec<(usize, usize)>) -> EquivalenceRelation {
    let m = s.len();
    while let Some((x, y)) = queue.pop() {
        let (rx, ry) = (s.row(x), s.row(y));
        for t in 0..m {
            let (u, v) = (rx[t] as usize, ry[t] as usize);
            if uf.union(u, v) {
                queue.push((u, v));
            }
            let (u, v) = (s.mul(t, x), s.mul(t, y));
            if uf.union(u, v) {
                queue.push((u, v));
            }
        }
    }
    uf.into_equivalence()
}

fn check_cap(s: &FiniteSemigroup, cap: usize) -> Result<()> {
    if s.len() > cap {
        return Err(Error::CapExceeded {
            what: "semigroup size",
            size: s.len(),
            cap,
        });
    }
    Ok(())
}

/// All distinct principal congruences `(x, y)♯` with `x < y`, sorted.
pub fn principal_congruences(s: &FiniteSemigroup, cap: usize) -> Result<Vec<EquivalenceRelation>> {
    check_cap(s, cap)?;
    let m = s.len();
    let found: HashSet<EquivalenceRelation> = (0..m)
        .into_par_iter()
        .fold(HashSet::new, |mut acc, x| {
            for y in x + 1..m {
                acc.insert(congruence_closure(s, [(x, y)]));
            }
            acc
        })
        .reduce(HashSet::new, |mut a, b| {
            a.extend(b);
            a
        });
    let mut out: Vec<_> = found.into_iter().collect();
    out.sort();
    Ok(out)
}

/// Number of distinct congruences `(x, y)♯` over pairs of distinct elements.
/// `Δ` is never among them.
pub fn principal_congruence_count(s: &FiniteSemigroup, cap: usize) -> Result<usize> {
    Ok(principal_congruences(s, cap)?.len())
}

/// The whole of `Cong(S)`: principal congruences closed under binary join.
/// Output is sorted by canonical form.
pub fn enumerate_all_congruences(s: &FiniteSemigroup, cap: usize) -> Result<Vec<EquivalenceRelation>> {
    let principal = principal_congruences(s, cap)?;
    info!("{} principal congruences on {} elements", principal.len(), s.len());
    let delta = EquivalenceRelation::discrete(s.len());
    let mut seen: HashSet<EquivalenceRelation> = HashSet::new();
    seen.insert(delta.clone());
    let mut worklist = vec![delta];
    for p in &principal {
        if seen.insert(p.clone()) {
            worklist.push(p.clone());
        }
    }
    // joins of congruences are joins of equivalences, so no re-closure is needed
    while let Some(c) = worklist.pop() {
        for p in &principal {
            if p.refines(&c) {
                continue;
            }
            let j = c.join(p).expect("same universe");
            if !seen.contains(&j) {
                seen.insert(j.clone());
                worklist.push(j);
            }
        }
        if seen.len().is_multiple_of(5000) {
            info!("{} congruences so far", seen.len());
        }
    }
    let mut out: Vec<_> = seen.into_iter().collect();
    out.sort();
    Ok(out)
}

/// Rees congruence `R_I = ∇_I ∪ Δ`.
pub fn rees_congruence(m: usize, ideal: &[usize]) -> EquivalenceRelation {
    let mut labels: Vec<usize> = (0..m).map(|x| x + 1).collect();
    for &x in ideal {
        labels[x] = 0;
    }
    EquivalenceRelation::from_dense_labels(&labels, m + 1)
}

/// Is `ideal` closed under multiplication by `S` on both sides?
pub fn is_ideal(s: &FiniteSemigroup, ideal: &[usize]) -> bool {
    let mut member = vec![false; s.len()];
    ideal.iter().for_each(|&x| member[x] = true);
    ideal
        .iter()
        .all(|&x| (0..s.len()).all(|t| member[s.mul(t, x)] && member[s.mul(x, t)]))
}

/// Checks that a family of congruences is closed under meet and join.
pub fn is_sublattice(congruences: &[EquivalenceRelation]) -> bool {
    let set: HashSet<&EquivalenceRelation> = congruences.iter().collect();
    congruences.iter().enumerate().all(|(i, a)| {
        congruences[i + 1..].iter().all(|b| {
            set.contains(&a.meet(b).expect("same universe")) && set.contains(&a.join(b).expect("same universe"))
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::Operation;
    use crate::transform::Transformation;

    fn t(s: &str) -> Transformation {
        s.parse().unwrap()
    }

    fn variant(a: &str) -> FiniteSemigroup {
        let a = t(a);
        FiniteSemigroup::build(Transformation::all(a.degree()).collect(), Operation::Sandwich(a)).unwrap()
    }

    fn right_zero(k: usize) -> FiniteSemigroup {
        FiniteSemigroup::build(
            (1..=k).map(|x| Transformation::constant(k, x)).collect(),
            Operation::Plain,
        )
        .unwrap()
    }

    #[test]
    fn bounds_are_congruences() {
        let t3 = FiniteSemigroup::full_transformation_monoid(3);
        assert!(is_congruence(&EquivalenceRelation::discrete(27), &t3));
        assert!(is_congruence(&EquivalenceRelation::full(27), &t3));
    }

    #[test]
    fn rees_congruences_are_congruences() {
        let t3 = FiniteSemigroup::full_transformation_monoid(3);
        for q in 0..=3 {
            let ideal = t3.rank_ideal(q);
            assert!(is_ideal(&t3, &ideal));
            assert!(is_congruence(&rees_congruence(27, &ideal), &t3));
        }
    }

    #[test]
    fn mixed_rank_pair_is_not_a_congruence() {
        let t3 = FiniteSemigroup::full_transformation_monoid(3);
        let f = t3.index_of(&t("3: 1 1 1")).unwrap();
        let g = t3.index_of(&t("3: 1 2 2")).unwrap();
        let rel = EquivalenceRelation::from_pairs(27, [(f, g)]);
        let v = find_violation(&rel, &t3).expect("violation");
        let (x, y) = (v.x.min(v.y), v.x.max(v.y));
        assert_eq!((x, y), (f.min(g), f.max(g)));
        let (u, w) = match v.side {
            Side::Left => (t3.mul(v.s, f), t3.mul(v.s, g)),
            Side::Right => (t3.mul(f, v.s), t3.mul(g, v.s)),
        };
        assert!(u != w && !rel.related(u, w));
    }

    #[test]
    fn closure_of_nothing_is_trivial() {
        let t3 = FiniteSemigroup::full_transformation_monoid(3);
        assert_eq!(congruence_closure(&t3, []), EquivalenceRelation::discrete(27));
    }

    #[test]
    fn closure_is_the_least_congruence() {
        let t3 = FiniteSemigroup::full_transformation_monoid(3);
        let f = t3.index_of(&t("3: 1 1 2")).unwrap();
        let g = t3.index_of(&t("3: 2 2 1")).unwrap();
        let c = congruence_closure(&t3, [(f, g)]);
        assert!(is_congruence(&c, &t3));
        assert!(c.related(f, g));
        for other in enumerate_all_congruences(&t3, 300).unwrap() {
            if other.related(f, g) {
                assert!(c.refines(&other));
            }
        }
    }

    #[test]
    fn isolated_principal_congruences_in_the_full_variant() {
        // af = ag and fa = ga: the closure relates nothing else
        let s = variant("4: 1 2 3 3");
        let a = t("4: 1 2 3 3");
        let f = t("4: 1 2 3 3");
        let g = t("4: 1 2 3 4");
        assert_eq!(a.then(&f), a.then(&g));
        assert_eq!(f.then(&a), g.then(&a));
        let (x, y) = (s.index_of(&f).unwrap(), s.index_of(&g).unwrap());
        let c = congruence_closure(&s, [(x, y)]);
        assert_eq!(c.nontrivial_pairs().collect::<Vec<_>>(), vec![(x.min(y), x.max(y))]);
    }

    #[test]
    fn join_of_principals_is_closure_of_union() {
        let s = variant("3: 1 2 2");
        let pairs = [(0usize, 5usize), (7, 19), (3, 26)];
        let c1 = congruence_closure(&s, [pairs[0]]);
        let c2 = congruence_closure(&s, [pairs[1], pairs[2]]);
        assert_eq!(c1.join(&c2).unwrap(), congruence_closure(&s, pairs));
    }

    #[test]
    fn right_zero_semigroup() {
        let s = right_zero(2);
        assert_eq!(enumerate_all_congruences(&s, 300).unwrap().len(), 2);
        // every equivalence on a right-zero semigroup is a congruence
        let s = right_zero(4);
        assert_eq!(enumerate_all_congruences(&s, 300).unwrap().len(), 15);
    }

    #[test]
    fn cap_is_enforced() {
        let s = FiniteSemigroup::full_transformation_monoid(3);
        let err = enumerate_all_congruences(&s, 10).unwrap_err();
        assert!(matches!(err, Error::CapExceeded { size: 27, cap: 10, .. }));
    }

    #[test]
    fn principal_count_on_t2_by_brute_force() {
        let t2 = FiniteSemigroup::full_transformation_monoid(2);
        // independent route: test every equivalence for being a congruence,
        // then find the least congruence containing each pair
        let all_cong: Vec<_> = EquivalenceRelation::all(4)
            .into_iter()
            .filter(|e| is_congruence(e, &t2))
            .collect();
        let mut least = HashSet::new();
        for x in 0..4 {
            for y in x + 1..4 {
                let above: Vec<_> = all_cong.iter().filter(|c| c.related(x, y)).collect();
                let min = above
                    .iter()
                    .find(|c| above.iter().all(|d| c.refines(d)))
                    .expect("least congruence");
                least.insert((*min).clone());
            }
        }
        assert_eq!(principal_congruence_count(&t2, 300).unwrap(), least.len());
        assert!(!least.contains(&EquivalenceRelation::discrete(4)));
        assert!(!least.is_empty());
        let mut oracle = enumerate_all_congruences(&t2, 300).unwrap();
        let mut brute = all_cong.clone();
        oracle.sort();
        brute.sort();
        assert_eq!(oracle, brute);
    }

    #[test]
    fn enumerated_lattice_is_closed_and_valid() {
        let s = variant("3: 1 2 2");
        let small = FiniteSemigroup::build(
            s.regular_elements().iter().map(|&x| s.element(x).clone()).collect(),
            s.operation().clone(),
        )
        .unwrap();
        let all = enumerate_all_congruences(&small, 300).unwrap();
        assert!(all.iter().all(|c| is_congruence(c, &small)));
        assert!(is_sublattice(&all));
    }
}
