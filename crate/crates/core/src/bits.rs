//! Fixed-width dense bitset over element indices `0..len`.
//!
//! All subsets of a group share the group's order as their width, so the
//! block vectors always line up and the boolean ops need no padding logic.

/// Dense bitset with a fixed universe size.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits {
    len: usize,
    blocks: Vec<u64>,
}

impl Bits {
    pub fn empty(len: usize) -> Self {
        Bits {
            len,
            blocks: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut b = Bits::empty(len);
        for i in 0..len {
            b.insert(i);
        }
        b
    }

    pub fn singleton(len: usize, idx: usize) -> Self {
        let mut b = Bits::empty(len);
        b.insert(idx);
        b
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn insert(&mut self, idx: usize) {
        debug_assert!(idx < self.len);
        self.blocks[idx / 64] |= 1u64 << (idx % 64);
    }

    #[inline]
    pub fn remove(&mut self, idx: usize) {
        debug_assert!(idx < self.len);
        self.blocks[idx / 64] &= !(1u64 << (idx % 64));
    }

    #[inline]
    pub fn contains(&self, idx: usize) -> bool {
        idx < self.len && self.blocks[idx / 64] & (1u64 << (idx % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn union_with(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &Bits) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a &= !b;
        }
    }

    pub fn is_subset(&self, other: &Bits) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.blocks.iter().zip(&other.blocks).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.blocks.iter().zip(&other.blocks).any(|(a, b)| a & b != 0)
    }

    /// Iterate set indices in increasing order.
    pub fn iter(&self) -> BitsIter<'_> {
        BitsIter {
            bits: self,
            block: 0,
            current: if self.blocks.is_empty() { 0 } else { self.blocks[0] },
        }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Option<Self> {
        let mut b = Bits::empty(len);
        for &i in indices {
            if i >= len {
                return None;
            }
            b.insert(i);
        }
        Some(b)
    }
}

impl std::fmt::Debug for Bits {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

pub struct BitsIter<'a> {
    bits: &'a Bits,
    block: usize,
    current: u64,
}

impl Iterator for BitsIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while self.current == 0 {
            self.block += 1;
            if self.block >= self.bits.blocks.len() {
                return None;
            }
            self.current = self.bits.blocks[self.block];
        }
        let tz = self.current.trailing_zeros() as usize;
        self.current &= self.current - 1;
        Some(self.block * 64 + tz)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_iterate_count() {
        let b = Bits::from_indices(100, &[0, 63, 64, 99]).unwrap();
        assert_eq!(b.to_vec(), vec![0, 63, 64, 99]);
        assert_eq!(b.count(), 4);
        assert!(b.contains(64));
        assert!(!b.contains(65));
    }

    #[test]
    fn subset_and_intersects() {
        let a = Bits::from_indices(10, &[1, 2]).unwrap();
        let b = Bits::from_indices(10, &[1, 2, 5]).unwrap();
        let c = Bits::from_indices(10, &[7]).unwrap();
        assert!(a.is_subset(&b));
        assert!(!b.is_subset(&a));
        assert!(a.intersects(&b));
        assert!(!a.intersects(&c));
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(Bits::from_indices(4, &[4]).is_none());
    }
}
