//! Seeded randomized oracle/pipeline equivalence beyond the fixed corpus:
//! every generated family within the oracle caps must agree field by field.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use asg_core::approx::family_validate;
use asg_core::covering::SearchLimits;
use asg_core::group::{enumerate_subgroups, FiniteGroup, GroupSubset};
use asg_core::oracle::oracle_core;

fn symmetrized(group: &Arc<FiniteGroup>, rng: &mut ChaCha8Rng, density: f64) -> GroupSubset {
    let mut indices = vec![group.identity()];
    for a in 0..group.order() {
        if rng.gen_bool(density) {
            indices.push(a);
            indices.push(group.inv(a));
        }
    }
    GroupSubset::from_indices(group, &indices).unwrap()
}

#[test]
fn oracle_agrees_on_sixty_random_families() {
    let pool: Vec<Arc<FiniteGroup>> = vec![
        FiniteGroup::cyclic(6),
        FiniteGroup::cyclic(9),
        FiniteGroup::cyclic(12),
        FiniteGroup::cyclic(16),
        FiniteGroup::dihedral(3),
        FiniteGroup::dihedral(4),
        FiniteGroup::dihedral(6),
        FiniteGroup::direct_product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(6)).unwrap(),
        FiniteGroup::direct_product(&FiniteGroup::cyclic(3), &FiniteGroup::cyclic(3)).unwrap(),
    ];
    let limits = SearchLimits::default();
    let mut rng = ChaCha8Rng::seed_from_u64(1105);
    let mut checked = 0;
    while checked < 60 {
        let group = &pool[rng.gen_range(0..pool.len())];
        let sets: Vec<GroupSubset> = match rng.gen_range(0..3u32) {
            0 => {
                let subs = enumerate_subgroups(group);
                (0..rng.gen_range(1..=3usize))
                    .map(|_| subs[rng.gen_range(0..subs.len())].clone())
                    .collect()
            }
            1 => {
                let base = symmetrized(group, &mut rng, 0.2);
                vec![base.clone(), base.product(&base).unwrap()]
            }
            _ => {
                let base = symmetrized(group, &mut rng, 0.15);
                let g = rng.gen_range(0..group.order());
                let extra = GroupSubset::from_indices(group, &[g, group.inv(g)])
                    .unwrap()
                    .union(&base)
                    .unwrap();
                vec![base, extra]
            }
        };
        let family = family_validate(&sets, &limits).unwrap();
        // keep the exact searches small, mirroring realistic inputs
        if family.k_uniform > 6 || family.n_uniform > 6 {
            continue;
        }
        let report = oracle_core(&family)
            .unwrap_or_else(|e| panic!("oracle mismatch on check {checked}: {e}"));
        assert!(report.matches.unwrap().values().all(|&ok| ok));
        checked += 1;
    }
}
