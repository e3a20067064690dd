//! The variant `T_X^a`, its regular part `P`, the local monoid `T = aT_Xa`,
//! the retraction `φ: f ↦ afa` and the relations `κ = ker φ`, `λ = κ ∩ L^P`,
//! `ρ = κ ∩ R^P`.

use serde::Serialize;

use crate::congruence::EquivalenceRelation;
use crate::error::{Error, Result};
use crate::semigroup::{FiniteSemigroup, GreenStructure, Operation};
use crate::transform::{normalize_sandwich, SandwichElement, Transformation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GreenKind {
    L,
    R,
    H,
}

#[derive(Clone, Debug)]
pub struct VariantContext {
    sandwich: SandwichElement,
    /// Permutation `p` with `ap` idempotent when the context was built from an
    /// arbitrary sandwich element; identity otherwise.
    normalizer: Transformation,
    pub p: FiniteSemigroup,
    pub t: FiniteSemigroup,
    pub p_greens: GreenStructure,
    pub t_greens: GreenStructure,
    /// `φ` as a map from P-indices to T-indices.
    phi: Vec<usize>,
    /// The injection `T ↪ P`.
    t_in_p: Vec<usize>,
    pub kappa: EquivalenceRelation,
    pub lambda: EquivalenceRelation,
    pub rho: EquivalenceRelation,
}

/// One-line description of a context, as emitted by the CLI.
#[derive(Clone, Debug, Serialize)]
pub struct VariantSummary {
    pub n: usize,
    pub r: usize,
    pub a: Transformation,
    pub normalizer: Transformation,
    pub size_p: usize,
    pub size_t: usize,
    pub block_sizes: Vec<usize>,
}

/// All of `T_X` under `f ⋆ g = fag`.
pub fn full_variant(a: &Transformation) -> FiniteSemigroup {
    FiniteSemigroup::build(
        Transformation::all(a.degree()).collect(),
        Operation::Sandwich(a.clone()),
    )
    .expect("T_X is closed under any sandwich product")
}

impl VariantContext {
    /// Normalizes an arbitrary sandwich element first; the permutation used is
    /// kept in [`normalizer`](Self::normalizer).
    pub fn from_transformation(a: &Transformation) -> Result<Self> {
        let (p, sandwich) = normalize_sandwich(a);
        let mut ctx = Self::build(sandwich)?;
        ctx.normalizer = p;
        Ok(ctx)
    }

    pub fn build(sandwich: SandwichElement) -> Result<Self> {
        let a = sandwich.transformation().clone();
        let n = a.degree();
        let op = Operation::Sandwich(a.clone());
        let sandwich_of = |f: &Transformation| a.then(f).then(&a);

        let p_elements: Vec<Transformation> = Transformation::all(n)
            .filter(|f| sandwich_of(f).rank() == f.rank())
            .collect();
        // closure is checked, not assumed
        let p = FiniteSemigroup::build(p_elements, op.clone())?;

        let mut t_elements: Vec<Transformation> = p.elements().iter().map(sandwich_of).collect();
        t_elements.sort();
        t_elements.dedup();
        let t = FiniteSemigroup::build(t_elements, op)?;

        let t_in_p = t
            .elements()
            .iter()
            .map(|h| {
                p.index_of(h)
                    .ok_or_else(|| Error::Invalid(format!("{h} lies in T but not in P")))
            })
            .collect::<Result<Vec<_>>>()?;
        let phi: Vec<usize> = p
            .elements()
            .iter()
            .map(|f| t.index_of(&sandwich_of(f)).expect("afa ∈ T"))
            .collect();

        let p_greens = p.greens();
        let t_greens = t.greens();
        let kappa = EquivalenceRelation::from_dense_labels(&phi, t.len());
        let lambda = kappa.meet(&p_greens.l)?;
        let rho = kappa.meet(&p_greens.r)?;

        Ok(VariantContext {
            sandwich,
            normalizer: Transformation::identity(n),
            p,
            t,
            p_greens,
            t_greens,
            phi,
            t_in_p,
            kappa,
            lambda,
            rho,
        })
    }

    pub fn sandwich(&self) -> &SandwichElement {
        &self.sandwich
    }

    pub fn normalizer(&self) -> &Transformation {
        &self.normalizer
    }

    pub fn degree(&self) -> usize {
        self.sandwich.degree()
    }

    pub fn rank(&self) -> usize {
        self.sandwich.rank()
    }

    /// `φ(f)` as a T-index.
    #[inline]
    pub fn phi(&self, f: usize) -> usize {
        self.phi[f]
    }

    pub fn phi_map(&self) -> &[usize] {
        &self.phi
    }

    /// P-index of the T-element `h`.
    #[inline]
    pub fn t_to_p(&self, h: usize) -> usize {
        self.t_in_p[h]
    }

    pub fn t_in_p(&self) -> &[usize] {
        &self.t_in_p
    }

    pub fn summary(&self) -> VariantSummary {
        VariantSummary {
            n: self.degree(),
            r: self.rank(),
            a: self.sandwich.transformation().clone(),
            normalizer: self.normalizer.clone(),
            size_p: self.p.len(),
            size_t: self.t.len(),
            block_sizes: self.sandwich.block_sizes(),
        }
    }

    fn t_relation(&self, kind: GreenKind) -> &EquivalenceRelation {
        match kind {
            GreenKind::L => &self.t_greens.l,
            GreenKind::R => &self.t_greens.r,
            GreenKind::H => &self.t_greens.h,
        }
    }

    pub fn p_relation(&self, kind: GreenKind) -> &EquivalenceRelation {
        match kind {
            GreenKind::L => &self.p_greens.l,
            GreenKind::R => &self.p_greens.r,
            GreenKind::H => &self.p_greens.h,
        }
    }

    /// The hat relation `K̂^P = {(f, g) : φ(f) K^T φ(g)}`.
    pub fn hat_relation(&self, kind: GreenKind) -> EquivalenceRelation {
        let k = self.t_relation(kind);
        let labels: Vec<usize> = self.phi.iter().map(|&h| k.block_of(h)).collect();
        EquivalenceRelation::from_dense_labels(&labels, k.num_blocks())
    }

    /// `{g ∈ P : φ(g) K^T φ(f)}`.
    pub fn hat_class(&self, kind: GreenKind, f: usize) -> Vec<usize> {
        let k = self.t_relation(kind);
        let target = k.block_of(self.phi[f]);
        (0..self.p.len())
            .filter(|&g| k.block_of(self.phi[g]) == target)
            .collect()
    }

    /// Is `φ` restricted to `H_f^P` a bijection onto `H_{φ(f)}^T`?
    pub fn phi_restrict_bijection_check(&self, f: usize) -> bool {
        let hp = &self.p_greens.h;
        let ht = &self.t_greens.h;
        let class: Vec<usize> = (0..self.p.len()).filter(|&g| hp.related(f, g)).collect();
        let target: Vec<usize> = (0..self.t.len()).filter(|&h| ht.related(h, self.phi[f])).collect();
        let mut images: Vec<usize> = class.iter().map(|&g| self.phi[g]).collect();
        images.sort_unstable();
        images.dedup();
        images.len() == class.len() && images == target
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::congruence::is_congruence;

    fn ctx(a: &str) -> VariantContext {
        VariantContext::from_transformation(&a.parse().unwrap()).unwrap()
    }

    fn idempotents(n: usize) -> impl Iterator<Item = Transformation> {
        Transformation::all(n).filter(Transformation::is_idempotent)
    }

    #[test]
    fn figure_one_sizes() {
        let c = ctx("4: 1 2 3 3");
        assert_eq!(c.t.len(), 27);
        assert_eq!(c.rank(), 3);
        assert_eq!(c.sandwich().block_sizes(), vec![1, 1, 2]);
        assert_eq!(c.p_greens.num_d_classes(), 3);
        assert!(c.p_greens.d_classes_form_chain());
    }

    #[test]
    fn regular_part_matches_both_definitions() {
        for n in 1..=4 {
            for a in idempotents(n) {
                let c = VariantContext::build(SandwichElement::new(a.clone()).unwrap()).unwrap();
                let full = full_variant(&a);
                let regular: Vec<&Transformation> = full.regular_elements().iter().map(|&x| full.element(x)).collect();
                let p: Vec<&Transformation> = c.p.elements().iter().collect();
                assert_eq!(regular, p, "a = {a}");
            }
        }
    }

    #[test]
    fn constant_sandwich_gives_right_zero_semigroup() {
        let c = ctx("3: 2 2 2");
        assert_eq!(c.p.len(), 3);
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(c.p.mul(x, y), y);
            }
        }
        assert_eq!(c.t.len(), 1);
        assert!(c.kappa.is_full());
        assert!(c.lambda.is_discrete());
        assert!(c.rho.is_full());
    }

    #[test]
    fn identity_sandwich_degenerates_to_t_n() {
        let c = ctx("3: 1 2 3");
        assert_eq!(c.p.len(), 27);
        assert_eq!(c.t.len(), 27);
        assert!(c.kappa.is_discrete());
    }

    #[test]
    fn phi_is_a_retraction() {
        for n in 1..=4 {
            for a in idempotents(n) {
                let c = VariantContext::build(SandwichElement::new(a).unwrap()).unwrap();
                for h in 0..c.t.len() {
                    assert_eq!(c.phi(c.t_to_p(h)), h);
                }
                for f in 0..c.p.len() {
                    for g in 0..c.p.len() {
                        assert_eq!(c.phi(c.p.mul(f, g)), c.t.mul(c.phi(f), c.phi(g)));
                    }
                }
            }
        }
    }

    #[test]
    fn distinguished_relations() {
        for n in 1..=4 {
            for a in idempotents(n) {
                let c = VariantContext::build(SandwichElement::new(a.clone()).unwrap()).unwrap();
                for rel in [&c.kappa, &c.lambda, &c.rho] {
                    assert!(is_congruence(rel, &c.p), "a = {a}");
                }
                let composed = c.lambda.compose(&c.rho).unwrap();
                assert_eq!(composed.clone().into_equivalence().unwrap(), c.kappa);
                assert_eq!(c.rho.compose(&c.lambda).unwrap(), composed);
                assert!(c.lambda.meet(&c.rho).unwrap().is_discrete());
                assert!(c.kappa.refines(&c.hat_relation(GreenKind::H)));
                // K^P ⊆ K̂^P ⊆ D^P
                for kind in [GreenKind::L, GreenKind::R, GreenKind::H] {
                    let hat = c.hat_relation(kind);
                    assert!(c.p_relation(kind).refines(&hat));
                    assert!(hat.refines(&c.p_greens.d));
                }
            }
        }
    }

    #[test]
    fn d_classes_of_p_and_t_are_ranks() {
        for a in idempotents(4) {
            let c = VariantContext::build(SandwichElement::new(a).unwrap()).unwrap();
            for (s, g) in [(&c.p, &c.p_greens), (&c.t, &c.t_greens)] {
                for x in 0..s.len() {
                    for y in 0..s.len() {
                        assert_eq!(g.d.related(x, y), s.rank_of(x) == s.rank_of(y));
                    }
                }
            }
            // H^T_f = H^P_f for f ∈ T
            for h in 0..c.t.len() {
                let f = c.t_to_p(h);
                let mut in_p: Vec<usize> = (0..c.p.len()).filter(|&g| c.p_greens.h.related(f, g)).collect();
                let mut in_t: Vec<usize> = (0..c.t.len())
                    .filter(|&k| c.t_greens.h.related(h, k))
                    .map(|k| c.t_to_p(k))
                    .collect();
                in_p.sort_unstable();
                in_t.sort_unstable();
                assert_eq!(in_p, in_t);
            }
        }
    }

    #[test]
    fn hat_classes() {
        let c = ctx("4: 1 2 3 3");
        for f in 0..c.p.len() {
            for kind in [GreenKind::L, GreenKind::R, GreenKind::H] {
                let hat = c.hat_class(kind, f);
                let own: Vec<usize> = (0..c.p.len()).filter(|&g| c.p_relation(kind).related(f, g)).collect();
                assert!(own.iter().all(|g| hat.contains(g)));
            }
            // rectangular group or union of non-group H-classes
            let hat_h = c.hat_class(GreenKind::H, f);
            let image_is_group = c.t_greens.is_group_h_class_of(c.phi(f));
            assert!(hat_h
                .iter()
                .all(|&g| c.p_greens.is_group_h_class_of(g) == image_is_group));
        }
        for h in 0..c.t.len() {
            let f = c.t_to_p(h);
            let hat = c.hat_class(GreenKind::L, f);
            for k in 0..c.t.len() {
                if c.t_greens.l.related(h, k) {
                    assert!(hat.contains(&c.t_to_p(k)));
                }
            }
        }
    }

    #[test]
    fn phi_is_bijective_on_h_classes() {
        for n in 1..=4 {
            for a in idempotents(n) {
                let c = VariantContext::build(SandwichElement::new(a).unwrap()).unwrap();
                assert!((0..c.p.len()).all(|f| c.phi_restrict_bijection_check(f)));
            }
        }
    }

    #[test]
    fn normalizer_is_recorded() {
        let c = ctx("2: 2 1");
        assert_eq!(c.normalizer().to_string(), "2: 2 1");
        assert_eq!(c.sandwich().transformation(), &Transformation::identity(2));
        let s = c.summary();
        assert_eq!((s.n, s.r, s.size_p, s.size_t), (2, 2, 4, 4));
    }
}
