mod common;

use common::{idempotents_up_to, t};
use proptest::prelude::*;
use varcong::congruence::{is_congruence, is_sublattice, EquivalenceRelation};
use varcong::synthesis::Synthesizer;
use varcong::systems::DEFAULT_SYSTEM_CAP;
use varcong::variant::VariantContext;

fn structural(ctx: &VariantContext) -> Vec<EquivalenceRelation> {
    let syn = Synthesizer::new(ctx).unwrap();
    let lattice = syn
        .enumerate_structurally(DEFAULT_SYSTEM_CAP, DEFAULT_SYSTEM_CAP)
        .unwrap();
    lattice.congruences().cloned().collect()
}

/// Both coordinates of the split commute with meet and join.
fn check_split_morphism(syn: &Synthesizer, s: &EquivalenceRelation, u: &EquivalenceRelation) {
    let (a, b) = (syn.split(s).unwrap(), syn.split(u).unwrap());
    let meet = syn.split(&s.meet(u).unwrap()).unwrap();
    let join = syn.split(&s.join(u).unwrap()).unwrap();
    // the chain is totally ordered, so meet and join of ξ are min and max
    assert_eq!(meet.xi_index, a.xi_index.min(b.xi_index));
    assert_eq!(join.xi_index, a.xi_index.max(b.xi_index));
    assert_eq!(meet.theta, a.theta.meet(&b.theta).unwrap());
    assert_eq!(join.theta, a.theta.join(&b.theta).unwrap());
}

#[test]
fn split_is_a_lattice_morphism_exhaustively_for_small_cases() {
    for a in ["3: 1 2 2", "4: 1 2 3 3", "4: 1 2 2 2"] {
        let ctx = VariantContext::from_transformation(&t(a)).unwrap();
        let syn = Synthesizer::new(&ctx).unwrap();
        let cong = structural(&ctx);
        for (i, s) in cong.iter().enumerate() {
            for u in &cong[i..] {
                check_split_morphism(&syn, s, u);
            }
        }
    }
}

#[test]
fn structural_lattices_are_sublattices_of_congruences() {
    for a in idempotents_up_to(4) {
        let ctx = VariantContext::from_transformation(&a).unwrap();
        let cong = structural(&ctx);
        assert!(is_sublattice(&cong), "a = {a}");
        assert!(cong.iter().all(|c| is_congruence(c, &ctx.p)), "a = {a}");
    }
}

#[test]
fn consecutive_layers_are_stacked_by_covers() {
    for a in idempotents_up_to(4) {
        let ctx = VariantContext::from_transformation(&a).unwrap();
        let syn = Synthesizer::new(&ctx).unwrap();
        let lattice = syn
            .enumerate_structurally(DEFAULT_SYSTEM_CAP, DEFAULT_SYSTEM_CAP)
            .unwrap();
        assert!(lattice.layer_cover_violations().is_empty(), "a = {a}");
        assert_eq!(lattice.layers.len(), syn.chain.len());
    }
}

#[test]
fn non_idempotent_sandwich_matches_its_normalization() {
    // 3: 2 1 1 becomes idempotent after a permutation; the lattice size is a conjugacy invariant
    let ctx = VariantContext::from_transformation(&t("3: 2 1 1")).unwrap();
    let normal = VariantContext::from_transformation(&t("3: 1 2 2")).unwrap();
    assert!(ctx.sandwich().transformation().is_idempotent());
    assert_eq!(structural(&ctx).len(), structural(&normal).len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn split_morphism_on_sampled_pairs(i in 0usize..811, j in 0usize..811) {
        thread_local! {
            static DATA: (VariantContext, Vec<EquivalenceRelation>) = {
                let ctx = VariantContext::from_transformation(&t("4: 1 1 3 3")).unwrap();
                let cong = structural(&ctx);
                (ctx, cong)
            };
        }
        DATA.with(|(ctx, cong)| {
            prop_assert_eq!(cong.len(), 811);
            let syn = Synthesizer::new(ctx).unwrap();
            check_split_morphism(&syn, &cong[i], &cong[j]);
            Ok(())
        })?;
    }
}
