//! Finite group construction, validation, automorphism enumeration, and
//! exact subset algebra.
//!
//! Elements of a group of order `n` are the dense indices `0..n`; the full
//! multiplication table is stored row-major. Everything downstream (subsets,
//! covers, packings, the pipeline) works purely on these indices.

mod automorphism;
mod subset;

pub use automorphism::{enumerate_automorphisms, Automorphism};
pub use subset::{enumerate_subgroups, GroupSubset};

use std::sync::Arc;

use crate::error::{Error, Result};

/// Default cap on the order of groups built by `direct_product`.
pub const DEFAULT_ORDER_CAP: usize = 4096;

/// Default cap on group order for exhaustive automorphism enumeration.
pub const DEFAULT_AUTOMORPHISM_CAP: usize = 64;

/// A finite group with a fully tabulated operation.
#[derive(Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    /// Row-major table: `mul[a * order + b]` is the product `a * b`.
    mul_table: Vec<usize>,
    inv_table: Vec<usize>,
    identity: usize,
}

impl FiniteGroup {
    /// Cyclic group of order `n`: `a * b = (a + b) mod n`, identity 0.
    pub fn cyclic(n: usize) -> Arc<FiniteGroup> {
        assert!(n >= 1, "cyclic group needs order >= 1");
        let mut mul = vec![0usize; n * n];
        for a in 0..n {
            for b in 0..n {
                mul[a * n + b] = (a + b) % n;
            }
        }
        Arc::new(FiniteGroup::from_table_unchecked(n, mul))
    }

    /// Dihedral group of order `2n`. Index `i < n` is the rotation `r^i`,
    /// index `n + i` is the reflection `s r^i`; relations `r^n = 1`,
    /// `s^2 = 1`, `s r s = r^-1`.
    pub fn dihedral(n: usize) -> Arc<FiniteGroup> {
        assert!(n >= 1, "dihedral group needs n >= 1");
        let order = 2 * n;
        let mut mul = vec![0usize; order * order];
        for a in 0..order {
            for b in 0..order {
                let (fa, ia) = (a >= n, a % n);
                let (fb, ib) = (b >= n, b % n);
                // r^i * r^j = r^(i+j); r^i * s r^j = s r^(j-i);
                // s r^i * r^j = s r^(i+j); s r^i * s r^j = r^(j-i).
                let (flip, rot) = match (fa, fb) {
                    (false, false) => (false, (ia + ib) % n),
                    (false, true) => (true, (n + ib - ia) % n),
                    (true, false) => (true, (ia + ib) % n),
                    (true, true) => (false, (n + ib - ia) % n),
                };
                mul[a * order + b] = if flip { n + rot } else { rot };
            }
        }
        Arc::new(FiniteGroup::from_table_unchecked(order, mul))
    }

    /// Componentwise product with row-major index pairing:
    /// `(a, b)` becomes `a * |h| + b`.
    pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> Result<Arc<FiniteGroup>> {
        Self::direct_product_capped(g, h, DEFAULT_ORDER_CAP)
    }

    pub fn direct_product_capped(
        g: &FiniteGroup,
        h: &FiniteGroup,
        cap: usize,
    ) -> Result<Arc<FiniteGroup>> {
        let order = g
            .order
            .checked_mul(h.order)
            .filter(|&o| o <= cap)
            .ok_or(Error::OrderCapExceeded {
                order: g.order.saturating_mul(h.order),
                cap,
            })?;
        let pair = |a: usize, b: usize| a * h.order + b;
        let mut mul = vec![0usize; order * order];
        for a0 in 0..g.order {
            for a1 in 0..h.order {
                for b0 in 0..g.order {
                    for b1 in 0..h.order {
                        mul[pair(a0, a1) * order + pair(b0, b1)] =
                            pair(g.mul(a0, b0), h.mul(a1, b1));
                    }
                }
            }
        }
        Ok(Arc::new(FiniteGroup::from_table_unchecked(order, mul)))
    }

    /// Validates a user-supplied Cayley table: squareness, associativity on
    /// all triples, a two-sided identity, and a two-sided inverse for every
    /// element. Errors name the first violation found.
    pub fn from_cayley(table: &[Vec<usize>]) -> Result<Arc<FiniteGroup>> {
        let order = table.len();
        if order == 0 {
            return Err(Error::MalformedTable);
        }
        let mut mul = Vec::with_capacity(order * order);
        for row in table {
            if row.len() != order || row.iter().any(|&x| x >= order) {
                return Err(Error::MalformedTable);
            }
            mul.extend_from_slice(row);
        }
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    let left = mul[mul[a * order + b] * order + c];
                    let right = mul[a * order + mul[b * order + c]];
                    if left != right {
                        return Err(Error::NotAssociative { a, b, c });
                    }
                }
            }
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|a| mul[e * order + a] == a && mul[a * order + e] == a))
            .ok_or(Error::NoIdentity)?;
        let mut inv = vec![usize::MAX; order];
        for a in 0..order {
            inv[a] = (0..order)
                .find(|&b| mul[a * order + b] == identity && mul[b * order + a] == identity)
                .ok_or(Error::NoInverse { element: a })?;
        }
        Ok(Arc::new(FiniteGroup {
            order,
            mul_table: mul,
            inv_table: inv,
            identity,
        }))
    }

    /// For tables produced by our own constructors, which are associative by
    /// construction; identity and inverses are still derived and asserted.
    fn from_table_unchecked(order: usize, mul: Vec<usize>) -> FiniteGroup {
        let identity = (0..order)
            .find(|&e| (0..order).all(|a| mul[e * order + a] == a && mul[a * order + e] == a))
            .expect("constructed table lost its identity");
        let inv = (0..order)
            .map(|a| {
                (0..order)
                    .find(|&b| mul[a * order + b] == identity && mul[b * order + a] == identity)
                    .expect("constructed table lost an inverse")
            })
            .collect();
        FiniteGroup {
            order,
            mul_table: mul,
            inv_table: inv,
            identity,
        }
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn identity(&self) -> usize {
        self.identity
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul_table[a * self.order + b]
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv_table[a]
    }

    /// Order of a single element.
    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut n = 1;
        while x != self.identity {
            x = self.mul(x, a);
            n += 1;
        }
        n
    }

    /// The Cayley table as a row-major matrix (for serialization and the
    /// `from_cayley` round trip).
    pub fn cayley_rows(&self) -> Vec<Vec<usize>> {
        (0..self.order)
            .map(|a| self.mul_table[a * self.order..(a + 1) * self.order].to_vec())
            .collect()
    }

    /// All automorphisms, capped at [`DEFAULT_AUTOMORPHISM_CAP`].
    pub fn automorphisms(self: &Arc<Self>) -> Result<Vec<Automorphism>> {
        enumerate_automorphisms(self, DEFAULT_AUTOMORPHISM_CAP)
    }

    pub(crate) fn same_group(a: &Arc<FiniteGroup>, b: &Arc<FiniteGroup>) -> bool {
        Arc::ptr_eq(a, b) || **a == **b
    }
}

impl std::fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("order", &self.order)
            .field("identity", &self.identity)
            .finish()
    }
}
