//! Subsets of a finite group and their exact algebra: products, inverses,
//! powers, translates, and generated subgroups.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::bits::Bits;
use crate::error::{Error, Result};

use super::FiniteGroup;

/// A set of element indices of one [`FiniteGroup`], with dense bit-vector
/// semantics. Immutable after construction; all operations are pure.
#[derive(Clone)]
pub struct GroupSubset {
    group: Arc<FiniteGroup>,
    bits: Bits,
}

impl PartialEq for GroupSubset {
    fn eq(&self, other: &Self) -> bool {
        FiniteGroup::same_group(&self.group, &other.group) && self.bits == other.bits
    }
}

impl Eq for GroupSubset {}

impl std::hash::Hash for GroupSubset {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.group.order().hash(state);
        self.bits.hash(state);
    }
}

impl std::fmt::Debug for GroupSubset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "GroupSubset{:?}", self.bits)
    }
}

impl GroupSubset {
    pub fn empty(group: &Arc<FiniteGroup>) -> Self {
        GroupSubset {
            group: group.clone(),
            bits: Bits::empty(group.order()),
        }
    }

    pub fn full(group: &Arc<FiniteGroup>) -> Self {
        GroupSubset {
            group: group.clone(),
            bits: Bits::full(group.order()),
        }
    }

    pub fn singleton(group: &Arc<FiniteGroup>, idx: usize) -> Result<Self> {
        Self::from_indices(group, &[idx])
    }

    pub fn identity_singleton(group: &Arc<FiniteGroup>) -> Self {
        GroupSubset {
            group: group.clone(),
            bits: Bits::singleton(group.order(), group.identity()),
        }
    }

    pub fn from_indices(group: &Arc<FiniteGroup>, indices: &[usize]) -> Result<Self> {
        let bits = Bits::from_indices(group.order(), indices).ok_or_else(|| {
            let bad = indices.iter().find(|&&i| i >= group.order()).copied();
            Error::IndexOutOfRange {
                index: bad.unwrap_or(0),
                order: group.order(),
            }
        })?;
        Ok(GroupSubset {
            group: group.clone(),
            bits,
        })
    }

    pub(crate) fn from_bits(group: &Arc<FiniteGroup>, bits: Bits) -> Self {
        debug_assert_eq!(bits.len(), group.order());
        GroupSubset {
            group: group.clone(),
            bits,
        }
    }

    pub fn group(&self) -> &Arc<FiniteGroup> {
        &self.group
    }

    pub(crate) fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.bits.contains(idx)
    }

    /// Members in increasing index order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter()
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.bits.to_vec()
    }

    pub fn min_element(&self) -> Option<usize> {
        self.bits.iter().next()
    }

    fn check_same_group(&self, other: &Self, context: &str) -> Result<()> {
        if FiniteGroup::same_group(&self.group, &other.group) {
            Ok(())
        } else {
            Err(Error::GroupMismatch {
                context: context.to_string(),
            })
        }
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        self.check_same_group(other, "union")?;
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Ok(GroupSubset::from_bits(&self.group, bits))
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check_same_group(other, "intersection")?;
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        Ok(GroupSubset::from_bits(&self.group, bits))
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        FiniteGroup::same_group(&self.group, &other.group) && self.bits.is_subset(&other.bits)
    }

    pub fn intersects(&self, other: &Self) -> bool {
        FiniteGroup::same_group(&self.group, &other.group) && self.bits.intersects(&other.bits)
    }

    /// The product set `{x y : x in self, y in other}`. Empty if either
    /// operand is empty; the double loop exits early once the accumulator
    /// saturates to the whole group.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.check_same_group(other, "product")?;
        let g = &self.group;
        let order = g.order();
        let mut out = Bits::empty(order);
        let mut count = 0usize;
        'outer: for a in self.bits.iter() {
            for b in other.bits.iter() {
                let p = g.mul(a, b);
                if !out.contains(p) {
                    out.insert(p);
                    count += 1;
                    if count == order {
                        break 'outer;
                    }
                }
            }
        }
        Ok(GroupSubset::from_bits(g, out))
    }

    /// `{x^-1 : x in self}`.
    pub fn inverse(&self) -> Self {
        let g = &self.group;
        let mut out = Bits::empty(g.order());
        for a in self.bits.iter() {
            out.insert(g.inv(a));
        }
        GroupSubset::from_bits(g, out)
    }

    /// Left translate `{g x : x in self}`.
    pub fn left_translate(&self, by: usize) -> Self {
        let g = &self.group;
        let mut out = Bits::empty(g.order());
        for a in self.bits.iter() {
            out.insert(g.mul(by, a));
        }
        GroupSubset::from_bits(g, out)
    }

    /// k-fold product `self * self * ... * self`, by binary exponentiation
    /// so that the doubled powers are reused.
    pub fn power(&self, k: usize) -> Self {
        assert!(k >= 1, "set power requires k >= 1");
        let mut result: Option<GroupSubset> = None;
        let mut base = self.clone();
        let mut rem = k;
        loop {
            if rem & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.product(&base).expect("same group"),
                });
            }
            rem >>= 1;
            if rem == 0 {
                break;
            }
            base = base.product(&base).expect("same group");
        }
        result.expect("k >= 1")
    }

    pub fn is_symmetric(&self) -> bool {
        self.iter().all(|a| self.contains(self.group.inv(a)))
    }

    pub fn contains_identity(&self) -> bool {
        self.contains(self.group.identity())
    }

    /// Nonempty and closed under products; in a finite group that makes the
    /// set a subgroup.
    pub fn is_subgroup(&self) -> bool {
        !self.is_empty() && self.product(self).expect("same group") == *self
    }

    /// The least `k` with `self^k = self^(k+1)` together with that fixed
    /// set, which is the subgroup generated by `self`. Requires `self` to be
    /// symmetric and contain the identity, so the powers form a chain.
    pub fn generated_subgroup(&self) -> Result<(Self, usize)> {
        if !self.is_symmetric() {
            return Err(Error::NotSymmetric {
                what: "generated_subgroup input".to_string(),
            });
        }
        if !self.contains_identity() {
            return Err(Error::MissingIdentity {
                what: "generated_subgroup input".to_string(),
            });
        }
        let mut current = self.clone();
        let mut exponent = 1usize;
        loop {
            let next = current.product(self)?;
            if next == current {
                return Ok((current, exponent));
            }
            current = next;
            exponent += 1;
        }
    }
}

/// Every subgroup of `group`, as the closure of the cyclic subgroups under
/// pairwise join. Deterministic order (sorted by element sets). Exponential
/// in the worst case; intended for small groups.
pub fn enumerate_subgroups(group: &Arc<FiniteGroup>) -> Vec<GroupSubset> {
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    for a in 0..group.order() {
        let mut elems = vec![group.identity()];
        let mut x = a;
        while x != group.identity() {
            elems.push(x);
            x = group.mul(x, a);
        }
        elems.sort_unstable();
        found.insert(elems);
    }
    loop {
        let snapshot: Vec<Vec<usize>> = found.iter().cloned().collect();
        let before = found.len();
        for (i, h) in snapshot.iter().enumerate() {
            for k in snapshot.iter().skip(i + 1) {
                let ha = GroupSubset::from_indices(group, h).expect("valid");
                let ka = GroupSubset::from_indices(group, k).expect("valid");
                let join = ha
                    .union(&ka)
                    .and_then(|u| u.generated_subgroup())
                    .expect("subgroups are symmetric with identity");
                found.insert(join.0.to_vec());
            }
        }
        if found.len() == before {
            break;
        }
    }
    found
        .into_iter()
        .map(|v| GroupSubset::from_indices(group, &v).expect("valid"))
        .collect()
}
