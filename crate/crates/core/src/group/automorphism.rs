//! Automorphisms of a finite group: validated permutations and exhaustive
//! enumeration by extending generator images with backtracking.

use std::sync::Arc;

use crate::error::{Error, Result};

use super::{FiniteGroup, GroupSubset};

/// A permutation of element indices that respects the group operation.
#[derive(Clone, PartialEq, Eq)]
pub struct Automorphism {
    group: Arc<FiniteGroup>,
    map: Vec<usize>,
}

impl Automorphism {
    /// Validates that `map` is a bijective homomorphism. The identity is
    /// necessarily fixed; asserted anyway as a cheap sanity check.
    pub fn new(group: &Arc<FiniteGroup>, map: Vec<usize>) -> Result<Self> {
        let n = group.order();
        if map.len() != n {
            return Err(Error::NotAutomorphism {
                reason: format!("permutation has length {}, group order is {}", map.len(), n),
            });
        }
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n || seen[v] {
                return Err(Error::NotAutomorphism {
                    reason: "not a permutation of 0..order".to_string(),
                });
            }
            seen[v] = true;
        }
        for a in 0..n {
            for b in 0..n {
                if map[group.mul(a, b)] != group.mul(map[a], map[b]) {
                    return Err(Error::NotAutomorphism {
                        reason: format!("map({a}*{b}) != map({a})*map({b})"),
                    });
                }
            }
        }
        assert_eq!(map[group.identity()], group.identity());
        Ok(Automorphism {
            group: group.clone(),
            map,
        })
    }

    pub fn identity(group: &Arc<FiniteGroup>) -> Self {
        Automorphism {
            group: group.clone(),
            map: (0..group.order()).collect(),
        }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub fn permutation(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i == v)
    }

    #[inline]
    pub fn image(&self, a: usize) -> usize {
        self.map[a]
    }

    /// Image set `{phi(x) : x in s}`; preserves cardinality.
    pub fn apply(&self, s: &GroupSubset) -> Result<GroupSubset> {
        if !FiniteGroup::same_group(&self.group, s.group()) {
            return Err(Error::GroupMismatch {
                context: "apply_automorphism".to_string(),
            });
        }
        let imgs: Vec<usize> = s.iter().map(|a| self.map[a]).collect();
        GroupSubset::from_indices(&self.group, &imgs)
    }
}

impl std::fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Automorphism{:?}", self.map)
    }
}

/// A deterministic generating sequence: repeatedly adjoin the least element
/// outside the closure of the ones picked so far.
fn generating_sequence(group: &Arc<FiniteGroup>) -> Vec<usize> {
    let mut gens = Vec::new();
    let mut closure = GroupSubset::identity_singleton(group);
    while closure.len() < group.order() {
        let next = (0..group.order())
            .find(|&x| !closure.contains(x))
            .expect("closure is proper");
        gens.push(next);
        let with_inv: Vec<usize> = gens
            .iter()
            .flat_map(|&g| [g, group.inv(g)])
            .chain([group.identity()])
            .collect();
        let seed = GroupSubset::from_indices(group, &with_inv).expect("valid indices");
        closure = seed.generated_subgroup().expect("symmetric with identity").0;
    }
    gens
}

/// Extends the partial map `gen -> image` to the subgroup generated by the
/// assigned generators. Returns the image table on that subgroup, or `None`
/// on any inconsistency (non-injective or non-homomorphic).
fn extend_partial(
    group: &FiniteGroup,
    gens: &[usize],
    images: &[usize],
) -> Option<(Vec<usize>, Vec<Option<usize>>)> {
    let n = group.order();
    let mut phi: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    phi[group.identity()] = Some(group.identity());
    used[group.identity()] = true;
    let mut frontier = vec![group.identity()];
    let mut domain = vec![group.identity()];
    while let Some(x) = frontier.pop() {
        let fx = phi[x].expect("frontier elements are mapped");
        for (&g, &h) in gens.iter().zip(images) {
            let y = group.mul(x, g);
            let fy = group.mul(fx, h);
            match phi[y] {
                Some(existing) => {
                    if existing != fy {
                        return None;
                    }
                }
                None => {
                    if used[fy] {
                        return None;
                    }
                    phi[y] = Some(fy);
                    used[fy] = true;
                    frontier.push(y);
                    domain.push(y);
                }
            }
        }
    }
    // BFS only checks the defining words; verify multiplicativity on the
    // whole partial domain.
    for &a in &domain {
        let fa = phi[a].unwrap();
        for &b in &domain {
            let fb = phi[b].unwrap();
            if phi[group.mul(a, b)] != Some(group.mul(fa, fb)) {
                return None;
            }
        }
    }
    Some((domain, phi))
}

fn search(
    group: &FiniteGroup,
    gens: &[usize],
    images: &mut Vec<usize>,
    gen_orders: &[usize],
    out: &mut Vec<Vec<usize>>,
) {
    let level = images.len();
    if level == gens.len() {
        if let Some((domain, phi)) = extend_partial(group, gens, images) {
            if domain.len() == group.order() {
                out.push(phi.into_iter().map(|v| v.expect("total")).collect());
            }
        }
        return;
    }
    for candidate in 0..group.order() {
        // an automorphism preserves element orders
        if group.element_order(candidate) != gen_orders[level] {
            continue;
        }
        images.push(candidate);
        if extend_partial(group, gens, images).is_some() {
            search(group, gens, images, gen_orders, out);
        }
        images.pop();
    }
}

/// The complete automorphism group of `group`, in lexicographic order of the
/// permutation vectors. Errors with `OrderCapExceeded` above `cap`.
pub fn enumerate_automorphisms(
    group: &Arc<FiniteGroup>,
    cap: usize,
) -> Result<Vec<Automorphism>> {
    if group.order() > cap {
        return Err(Error::OrderCapExceeded {
            order: group.order(),
            cap,
        });
    }
    if group.order() == 1 {
        return Ok(vec![Automorphism::identity(group)]);
    }
    let gens = generating_sequence(group);
    let gen_orders: Vec<usize> = gens.iter().map(|&g| group.element_order(g)).collect();
    let mut maps = Vec::new();
    search(group, &gens, &mut Vec::new(), &gen_orders, &mut maps);
    maps.sort_unstable();
    Ok(maps
        .into_iter()
        .map(|map| Automorphism {
            group: group.clone(),
            map,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force over all permutations, filtered by the homomorphism
    /// property. Only usable for tiny groups; this is the test oracle for
    /// the backtracking enumerator.
    fn automorphisms_by_exhaustion(group: &Arc<FiniteGroup>) -> Vec<Vec<usize>> {
        fn heap_permute(k: usize, arr: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if k == 1 {
                out.push(arr.clone());
                return;
            }
            heap_permute(k - 1, arr, out);
            for i in 0..k - 1 {
                if k.is_multiple_of(2) {
                    arr.swap(i, k - 1);
                } else {
                    arr.swap(0, k - 1);
                }
                heap_permute(k - 1, arr, out);
            }
        }
        let n = group.order();
        let mut perms = Vec::new();
        heap_permute(n, &mut (0..n).collect(), &mut perms);
        let mut autos: Vec<Vec<usize>> = perms
            .into_iter()
            .filter(|p| {
                (0..n).all(|a| (0..n).all(|b| p[group.mul(a, b)] == group.mul(p[a], p[b])))
            })
            .collect();
        autos.sort_unstable();
        autos
    }

    #[test]
    fn z2_has_only_identity() {
        let g = FiniteGroup::cyclic(2);
        let autos = g.automorphisms().unwrap();
        assert_eq!(autos.len(), 1);
        assert!(autos[0].is_identity());
    }

    #[test]
    fn z5_has_four_automorphisms() {
        let g = FiniteGroup::cyclic(5);
        let autos = g.automorphisms().unwrap();
        assert_eq!(autos.len(), 4);
        // multiplication by units: x -> u*x
        for u in 1..5 {
            let map: Vec<usize> = (0..5).map(|x| (u * x) % 5).collect();
            assert!(autos.iter().any(|a| a.permutation() == map));
        }
    }

    #[test]
    fn d4_matches_full_permutation_scan() {
        let d4 = FiniteGroup::dihedral(4);
        let fast: Vec<Vec<usize>> = d4
            .automorphisms()
            .unwrap()
            .into_iter()
            .map(|a| a.permutation().to_vec())
            .collect();
        let slow = automorphisms_by_exhaustion(&d4);
        assert_eq!(fast.len(), 8);
        assert_eq!(fast, slow);
    }

    #[test]
    fn klein_matches_full_permutation_scan() {
        let k4 = FiniteGroup::dihedral(2);
        let fast: Vec<Vec<usize>> = k4
            .automorphisms()
            .unwrap()
            .into_iter()
            .map(|a| a.permutation().to_vec())
            .collect();
        assert_eq!(fast.len(), 6); // Aut(Z2 x Z2) = S3
        assert_eq!(fast, automorphisms_by_exhaustion(&k4));
    }

    #[test]
    fn small_groups_match_full_permutation_scan() {
        for (group, expected) in [
            (FiniteGroup::cyclic(6), 2),
            (FiniteGroup::cyclic(8), 4),
            (FiniteGroup::dihedral(3), 6),
            (
                FiniteGroup::direct_product(&FiniteGroup::cyclic(2), &FiniteGroup::cyclic(4))
                    .unwrap(),
                8,
            ),
        ] {
            let fast: Vec<Vec<usize>> = group
                .automorphisms()
                .unwrap()
                .into_iter()
                .map(|a| a.permutation().to_vec())
                .collect();
            assert_eq!(fast.len(), expected, "count for order {}", group.order());
            assert_eq!(fast, automorphisms_by_exhaustion(&group));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let g = FiniteGroup::cyclic(10);
        assert!(matches!(
            enumerate_automorphisms(&g, 8),
            Err(Error::OrderCapExceeded { order: 10, cap: 8 })
        ));
    }

    #[test]
    fn apply_preserves_structure() {
        let g = FiniteGroup::cyclic(5);
        let double = Automorphism::new(&g, (0..5).map(|x| (2 * x) % 5).collect()).unwrap();
        let s = GroupSubset::from_indices(&g, &[1, 2]).unwrap();
        assert_eq!(double.apply(&s).unwrap().to_vec(), vec![2, 4]);

        let whole = GroupSubset::full(&g);
        assert_eq!(double.apply(&whole).unwrap(), whole);

        let ident = Automorphism::identity(&g);
        assert_eq!(ident.apply(&s).unwrap(), s);
    }

    #[test]
    fn rejects_non_automorphisms() {
        let g = FiniteGroup::cyclic(4);
        // swapping 0 and 1 does not fix the identity
        assert!(Automorphism::new(&g, vec![1, 0, 2, 3]).is_err());
        assert!(Automorphism::new(&g, vec![0, 1, 2]).is_err());
        assert!(Automorphism::new(&g, vec![0, 1, 1, 3]).is_err());
    }
}
