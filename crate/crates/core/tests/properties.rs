//! Property tests for the subset algebra, the covering calculus, and the
//! lemma postconditions, over randomized small groups and subsets.

use std::sync::Arc;

use proptest::prelude::*;

use asg_core::approx::{
    commensurability, family_validate, minimal_doubling, product_commensurability_witness,
    xx_intersection_witness,
};
use asg_core::covering::{
    check_cover_bound, covering_number, maximal_disjoint_family, packing_index, SearchLimits,
};
use asg_core::group::{FiniteGroup, GroupSubset};

fn group_pool() -> Vec<Arc<FiniteGroup>> {
    vec![
        FiniteGroup::cyclic(7),
        FiniteGroup::cyclic(12),
        FiniteGroup::dihedral(2),
        FiniteGroup::dihedral(4),
        FiniteGroup::dihedral(6),
        FiniteGroup::direct_product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(4)).unwrap(),
    ]
}

fn limits() -> SearchLimits {
    SearchLimits::default()
}

/// A group from the pool plus a nonempty subset given by a bitmask.
fn subset_strategy() -> impl Strategy<Value = (Arc<FiniteGroup>, GroupSubset)> {
    (0..group_pool().len(), any::<u32>()).prop_map(|(gi, mask)| {
        let group = group_pool()[gi].clone();
        let order = group.order();
        let mut indices: Vec<usize> = (0..order).filter(|&i| mask & (1 << i) != 0).collect();
        if indices.is_empty() {
            indices.push(group.identity());
        }
        let set = GroupSubset::from_indices(&group, &indices).unwrap();
        (group, set)
    })
}

/// Symmetric identity-containing subset: symmetrize and adjoin the identity.
fn symmetric_subset_strategy() -> impl Strategy<Value = (Arc<FiniteGroup>, GroupSubset)> {
    subset_strategy().prop_map(|(group, set)| {
        let sym = set
            .union(&set.inverse())
            .unwrap()
            .union(&GroupSubset::identity_singleton(&group))
            .unwrap();
        (group, sym)
    })
}

fn three_subsets() -> impl Strategy<Value = (Arc<FiniteGroup>, GroupSubset, GroupSubset, GroupSubset)>
{
    (0..group_pool().len(), any::<u32>(), any::<u32>(), any::<u32>()).prop_map(
        |(gi, m1, m2, m3)| {
            let group = group_pool()[gi].clone();
            let order = group.order();
            let mk = |mask: u32| {
                let mut v: Vec<usize> = (0..order).filter(|&i| mask & (1 << i) != 0).collect();
                if v.is_empty() {
                    v.push(group.identity());
                }
                GroupSubset::from_indices(&group, &v).unwrap()
            };
            (group.clone(), mk(m1), mk(m2), mk(m3))
        },
    )
}

/// A base set and a symmetric identity-containing block in one shared group.
fn base_and_block() -> impl Strategy<Value = (Arc<FiniteGroup>, GroupSubset, GroupSubset)> {
    three_subsets().prop_map(|(group, x, raw, _)| {
        let block = raw
            .union(&raw.inverse())
            .unwrap()
            .union(&GroupSubset::identity_singleton(&group))
            .unwrap();
        (group, x, block)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn set_product_is_associative((_g, a, b, c) in three_subsets()) {
        let left = a.product(&b).unwrap().product(&c).unwrap();
        let right = a.product(&b.product(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn inverse_reverses_products((_g, a, b, _c) in three_subsets()) {
        let lhs = a.product(&b).unwrap().inverse();
        let rhs = b.inverse().product(&a.inverse()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn powers_grow_to_the_generated_subgroup((_g, a) in symmetric_subset_strategy()) {
        let mut previous = a.clone();
        for k in 2..=4usize {
            let next = a.power(k);
            prop_assert!(previous.is_subset(&next));
            previous = next;
        }
        let (gen, exponent) = a.generated_subgroup().unwrap();
        prop_assert!(gen.is_subgroup());
        prop_assert!(gen.is_symmetric());
        prop_assert_eq!(a.power(exponent), gen.clone());
        if exponent > 1 {
            prop_assert_ne!(a.power(exponent - 1), gen);
        }
    }

    #[test]
    fn automorphisms_commute_with_set_algebra(
        (g, a, b, _c) in three_subsets(),
        pick in any::<u16>(),
    ) {
        let autos = g.automorphisms().unwrap();
        let phi = &autos[pick as usize % autos.len()];
        prop_assert_eq!(
            phi.apply(&a.product(&b).unwrap()).unwrap(),
            phi.apply(&a).unwrap().product(&phi.apply(&b).unwrap()).unwrap()
        );
        prop_assert_eq!(phi.apply(&a.inverse()).unwrap(), phi.apply(&a).unwrap().inverse());
        prop_assert_eq!(
            phi.apply(&a.union(&b).unwrap()).unwrap(),
            phi.apply(&a).unwrap().union(&phi.apply(&b).unwrap()).unwrap()
        );
        prop_assert_eq!(
            phi.apply(&a.intersection(&b).unwrap()).unwrap(),
            phi.apply(&a).unwrap().intersection(&phi.apply(&b).unwrap()).unwrap()
        );
    }

    #[test]
    fn packing_never_exceeds_covering((_g, x, y) in base_and_block()) {
        let pack = packing_index(&x, &y, &limits()).unwrap();
        let cover = covering_number(&x, &y, &limits()).unwrap();
        prop_assert!(pack.size <= cover.size);
        pack.verify().unwrap();
        cover.verify().unwrap();
    }

    #[test]
    fn covering_and_packing_are_monotone_in_the_block((_g, x, y) in base_and_block()) {
        // y' = y * y is a symmetric superset of y
        let bigger = y.product(&y).unwrap();
        prop_assert!(y.is_subset(&bigger));
        let c_small = covering_number(&x, &y, &limits()).unwrap().size;
        let c_big = covering_number(&x, &bigger, &limits()).unwrap().size;
        prop_assert!(c_big <= c_small);
        let p_small = packing_index(&x, &y, &limits()).unwrap().size;
        let p_big = packing_index(&x, &bigger, &limits()).unwrap().size;
        prop_assert!(p_big <= p_small);
    }

    #[test]
    fn search_sizes_are_automorphism_equivariant(
        (g, x) in subset_strategy(),
        pick in any::<u16>(),
    ) {
        let y = x.union(&x.inverse()).unwrap()
            .union(&GroupSubset::identity_singleton(&g)).unwrap();
        let autos = g.automorphisms().unwrap();
        let phi = &autos[pick as usize % autos.len()];
        let (fx, fy) = (phi.apply(&x).unwrap(), phi.apply(&y).unwrap());
        prop_assert_eq!(
            covering_number(&x, &y, &limits()).unwrap().size,
            covering_number(&fx, &fy, &limits()).unwrap().size
        );
        prop_assert_eq!(
            packing_index(&x, &y, &limits()).unwrap().size,
            packing_index(&fx, &fy, &limits()).unwrap().size
        );
    }

    #[test]
    fn greedy_family_is_maximal_and_bounded((_g, x, y) in base_and_block()) {
        let pack = maximal_disjoint_family(&x, &y).unwrap();
        pack.verify().unwrap();
        // maximality in product form: x ⊆ centers * y * y
        let reach = pack.centers.product(&y).unwrap().product(&y).unwrap();
        prop_assert!(x.is_subset(&reach));
        // the covering lemma, with the exact optimal cover
        let cover = covering_number(&x, &y, &limits()).unwrap();
        prop_assert!(check_cover_bound(&pack, &cover).unwrap());
    }

    #[test]
    fn doubling_is_reproducible((_g, a) in symmetric_subset_strategy()) {
        let first = minimal_doubling(&a, &limits()).unwrap();
        first.verify().unwrap();
        let again = minimal_doubling(&first.carrier, &limits()).unwrap();
        prop_assert_eq!(first.doubling_k, again.doubling_k);
    }

    #[test]
    fn commensurability_constant_is_symmetric(
        (g, a) in symmetric_subset_strategy(),
        mask in any::<u32>(),
    ) {
        let order = g.order();
        let mut extra: Vec<usize> = (0..order).filter(|&i| mask & (1 << i) != 0).collect();
        extra.push(g.identity());
        let raw = GroupSubset::from_indices(&g, &extra).unwrap();
        let b = raw.union(&raw.inverse()).unwrap();
        let x = minimal_doubling(&a, &limits()).unwrap();
        let y = minimal_doubling(&b, &limits()).unwrap();
        let xy = commensurability(&x, &y, &limits()).unwrap();
        let yx = commensurability(&y, &x, &limits()).unwrap();
        prop_assert_eq!(xy.n, yx.n);
        xy.verify().unwrap();
    }

    #[test]
    fn xx_lemma_holds_on_random_commensurable_pairs((g, a) in symmetric_subset_strategy()) {
        // pair a with its square: always commensurable
        let square = a.product(&a).unwrap();
        let x = minimal_doubling(&a, &limits()).unwrap();
        let y = minimal_doubling(&square, &limits()).unwrap();
        let cert = commensurability(&x, &y, &limits()).unwrap();
        let e = xx_intersection_witness(&x, &y, &cert).unwrap();
        prop_assert!(e.len() <= x.doubling_k * cert.n);
        let _ = g;
    }

    #[test]
    fn product_lemma_holds_up_to_length_four(
        (g, a) in symmetric_subset_strategy(),
        picks in proptest::collection::vec(any::<u8>(), 1..=4),
    ) {
        let square = a.product(&a).unwrap();
        let family = family_validate(&[a, square], &limits()).unwrap();
        let parts: Vec<usize> = picks.iter().map(|&p| p as usize % 2).collect();
        let report = product_commensurability_witness(&parts, 0, &family, &limits()).unwrap();
        prop_assert!((report.forward.len() as u128) <= report.bound);
        prop_assert!((report.optimal_forward as u128) <= report.bound);
        prop_assert!(report.optimal_backward <= family.n_uniform);
        let _ = g;
    }
}

/// The covering lemma on a thousand seeded random instances in groups of
/// order up to 48: a greedy maximal disjoint family never beats the exact
/// cover.
#[test]
fn cover_bound_on_a_thousand_randomized_instances() {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    let groups = [
        FiniteGroup::cyclic(48),
        FiniteGroup::cyclic(37),
        FiniteGroup::dihedral(24),
        FiniteGroup::direct_product(&FiniteGroup::cyclic(6), &FiniteGroup::cyclic(8)).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for sample in 0..1000 {
        let group = &groups[sample % groups.len()];
        let order = group.order();
        let mut x_indices: Vec<usize> = (0..order).filter(|_| rng.gen_bool(0.4)).collect();
        if x_indices.is_empty() {
            x_indices.push(group.identity());
        }
        let x = GroupSubset::from_indices(group, &x_indices).unwrap();
        let mut y_indices = vec![group.identity()];
        for a in 0..order {
            if rng.gen_bool(0.2) {
                y_indices.push(a);
                y_indices.push(group.inv(a));
            }
        }
        let y = GroupSubset::from_indices(group, &y_indices).unwrap();
        let pack = maximal_disjoint_family(&x, &y).unwrap();
        let cover = covering_number(&x, &y, &limits()).unwrap();
        assert!(
            check_cover_bound(&pack, &cover).unwrap(),
            "sample {sample} violated the cover bound"
        );
    }
}
