//! Subsets of a finite atom set.

use std::fmt;

/// A subset of `{0, .., len - 1}` stored as a little-endian bitset.
///
/// Atom `i` is bit `i % 64` of word `i / 64`. Masks of the same length
/// compare by their integer value with atom 0 least significant, which is
/// the order used to break ties between maximizing subsets.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SubsetMask {
    len: usize,
    words: Vec<u64>,
}

impl SubsetMask {
    pub fn empty(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn full(len: usize) -> Self {
        let mut m = Self::empty(len);
        for i in 0..len {
            m.insert(i);
        }
        m
    }

    /// Mask from the low `len` bits of `bits` (requires `len <= 64`).
    pub fn from_bits(len: usize, bits: u64) -> Self {
        assert!(len <= 64, "from_bits supports at most 64 atoms");
        let mask = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
        let mut m = Self::empty(len);
        if len > 0 {
            m.words[0] = bits & mask;
        }
        m
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut m = Self::empty(len);
        for i in indices {
            m.insert(i);
        }
        m
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        Self::from_indices(
            bits.len(),
            bits.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i),
        )
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.len, "atom {i} out of range for {} atoms", self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        assert!(i < self.len, "atom {i} out of range for {} atoms", self.len);
        self.words[i / 64] &= !(1 << (i % 64));
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.contains(i))
    }

    /// Low 64 bits, exact when `len <= 64`.
    pub fn bits(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn complement(&self) -> Self {
        let mut out = Self::full(self.len);
        for (o, w) in out.words.iter_mut().zip(&self.words) {
            *o &= !w;
        }
        out
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.intersection(other).is_empty()
    }

    fn zip_with(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.len, other.len, "masks over different atom sets");
        Self {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl PartialOrd for SubsetMask {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SubsetMask {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len
            .cmp(&other.len)
            .then_with(|| self.words.iter().rev().cmp(other.words.iter().rev()))
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// Every subset of `len <= 63` atoms as a bit pattern, in increasing order.
pub fn all_subsets(len: usize) -> impl Iterator<Item = u64> {
    assert!(len < 64, "exhaustive enumeration needs fewer than 64 atoms");
    0..(1u64 << len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_set_operations() {
        let a = SubsetMask::from_indices(5, [0, 2, 4]);
        let b = SubsetMask::from_indices(5, [1, 2]);
        assert_eq!(a.intersection(&b), SubsetMask::from_indices(5, [2]));
        assert_eq!(a.union(&b), SubsetMask::from_indices(5, [0, 1, 2, 4]));
        assert_eq!(a.complement(), SubsetMask::from_indices(5, [1, 3]));
        assert_eq!(a.count(), 3);
        assert!(!a.is_disjoint(&b));
        assert_eq!(a.bits(), 0b10101);
        assert_eq!(format!("{a:?}"), "{0, 2, 4}");
    }

    #[test]
    fn wide_masks() {
        let mut m = SubsetMask::empty(130);
        m.insert(129);
        m.insert(64);
        assert!(m.contains(129) && m.contains(64) && !m.contains(63));
        assert_eq!(m.iter().collect::<Vec<_>>(), vec![64, 129]);
        assert_eq!(m.complement().count(), 128);
        assert!(SubsetMask::from_indices(130, [129]) > SubsetMask::from_indices(130, [0, 64]));
    }

    #[test]
    fn order_is_integer_value() {
        let a = SubsetMask::from_bits(3, 0b001);
        let b = SubsetMask::from_bits(3, 0b010);
        assert!(a < b);
    }

    proptest! {
        #[test]
        fn de_morgan(len in 1usize..100, seed_a in any::<u128>(), seed_b in any::<u128>()) {
            let a = SubsetMask::from_indices(len, (0..len).filter(|i| seed_a >> (i % 128) & 1 == 1));
            let b = SubsetMask::from_indices(len, (0..len).filter(|i| seed_b >> (i % 128) & 1 == 1));
            prop_assert_eq!(a.union(&b).complement(), a.complement().intersection(&b.complement()));
            prop_assert_eq!(a.intersection(&b).count() + a.union(&b).count(), a.count() + b.count());
        }
    }
}
