use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::kernel::fixpoint::Lattice;

/// A binary relation on `{0, .., size-1}` stored as a row-major bit matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitRel {
    size: usize,
    bits: FixedBitSet,
}

impl std::fmt::Debug for BitRel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_set().entries(self.pairs()).finish()
    }
}

impl BitRel {
    pub fn empty(size: usize) -> Self {
        BitRel {
            size,
            bits: FixedBitSet::with_capacity(size * size),
        }
    }

    pub fn full(size: usize) -> Self {
        let mut r = Self::empty(size);
        r.bits.insert_range(..);
        r
    }

    pub fn identity(size: usize) -> Self {
        let mut r = Self::empty(size);
        for i in 0..size {
            r.insert(i, i);
        }
        r
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut r = Self::empty(size);
        for i in 0..size {
            for j in 0..size {
                if f(i, j) {
                    r.insert(i, j);
                }
            }
        }
        r
    }

    pub fn from_pairs(size: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut r = Self::empty(size);
        for (i, j) in pairs {
            r.insert(i, j);
        }
        r
    }

    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.size && j < self.size && self.bits.contains(i * self.size + j)
    }

    #[inline]
    pub fn insert(&mut self, i: usize, j: usize) {
        assert!(
            i < self.size && j < self.size,
            "pair ({i},{j}) outside carrier of size {}",
            self.size
        );
        self.bits.insert(i * self.size + j);
    }

    pub fn remove(&mut self, i: usize, j: usize) {
        if i < self.size && j < self.size {
            self.bits.set(i * self.size + j, false);
        }
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn is_subset(&self, other: &BitRel) -> bool {
        self.size == other.size && self.bits.is_subset(&other.bits)
    }

    pub fn intersection(&self, other: &BitRel) -> BitRel {
        assert_eq!(self.size, other.size, "relations over different carriers");
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        BitRel {
            size: self.size,
            bits,
        }
    }

    pub fn union(&self, other: &BitRel) -> BitRel {
        assert_eq!(self.size, other.size, "relations over different carriers");
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        BitRel {
            size: self.size,
            bits,
        }
    }

    /// Pairs in row-major order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.size;
        self.bits.ones().map(move |k| (k / n, k % n))
    }

    pub fn is_reflexive(&self) -> bool {
        (0..self.size).all(|i| self.contains(i, i))
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs().all(|(i, j)| self.contains(j, i))
    }

    pub fn is_transitive(&self) -> bool {
        self.pairs()
            .all(|(i, j)| (0..self.size).all(|k| !self.contains(j, k) || self.contains(i, k)))
    }

    pub fn is_equivalence(&self) -> bool {
        self.is_reflexive() && self.is_symmetric() && self.is_transitive()
    }

    /// Describes the first failing equivalence law, if any.
    pub fn equivalence_violation(&self) -> Option<String> {
        if let Some(i) = (0..self.size).find(|&i| !self.contains(i, i)) {
            return Some(format!("({i},{i}) missing"));
        }
        if let Some((i, j)) = self.pairs().find(|&(i, j)| !self.contains(j, i)) {
            return Some(format!("({i},{j}) present but ({j},{i}) missing"));
        }
        for (i, j) in self.pairs() {
            if let Some(k) = (0..self.size).find(|&k| self.contains(j, k) && !self.contains(i, k)) {
                return Some(format!(
                    "({i},{j}) and ({j},{k}) present but ({i},{k}) missing"
                ));
            }
        }
        None
    }

    /// Blocks of the least equivalence containing the relation, each sorted,
    /// ordered by smallest member.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.size).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for (i, j) in self.pairs() {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; self.size];
        for i in 0..self.size {
            let root = find(&mut parent, i);
            if slot[root] == usize::MAX {
                slot[root] = blocks.len();
                blocks.push(Vec::new());
            }
            blocks[slot[root]].push(i);
        }
        blocks
    }

    /// The least equivalence relation containing `self`.
    pub fn equivalence_closure(&self) -> BitRel {
        let mut r = BitRel::empty(self.size);
        for block in self.classes() {
            for &i in &block {
                for &j in &block {
                    r.insert(i, j);
                }
            }
        }
        r
    }

    /// Reindexing along `f: C -> D`: `(i,j)` is related iff `(f(i), f(j))` is.
    pub fn pullback(&self, f: &[usize]) -> Result<BitRel> {
        if let Some((position, &value)) = f.iter().enumerate().find(|(_, &v)| v >= self.size) {
            return Err(Error::MalformedFunction {
                position,
                value,
                size: self.size,
            });
        }
        Ok(BitRel::from_fn(f.len(), |i, j| self.contains(f[i], f[j])))
    }
}

impl Lattice for BitRel {
    fn meet(&self, other: &Self) -> Self {
        self.intersection(other)
    }

    fn is_below(&self, other: &Self) -> bool {
        self.is_subset(other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pullback_identity_is_noop() {
        let r = BitRel::from_pairs(3, [(0, 1), (2, 2)]);
        assert_eq!(r.pullback(&[0, 1, 2]).unwrap(), r);
    }

    #[test]
    fn pullback_of_equality_is_kernel() {
        let f = [0, 1, 0, 2];
        let k = BitRel::identity(3).pullback(&f).unwrap();
        assert_eq!(k, BitRel::from_fn(4, |i, j| f[i] == f[j]));
    }

    #[test]
    fn pullback_along_constant_is_full() {
        let r = BitRel::identity(2).pullback(&[1, 1, 1]).unwrap();
        assert_eq!(r, BitRel::full(3));
    }

    #[test]
    fn pullback_out_of_range() {
        assert_eq!(
            BitRel::identity(2).pullback(&[0, 2]),
            Err(Error::MalformedFunction {
                position: 1,
                value: 2,
                size: 2
            })
        );
    }

    #[test]
    fn classes_of_closure() {
        let r = BitRel::from_pairs(5, [(0, 3), (3, 4)]);
        assert_eq!(r.classes(), vec![vec![0, 3, 4], vec![1], vec![2]]);
        assert!(r.equivalence_closure().is_equivalence());
        assert!(!r.is_equivalence());
        assert!(r.equivalence_violation().is_some());
    }

    #[test]
    fn no_stray_bits_outside_square() {
        let r = BitRel::full(3);
        assert_eq!(r.len(), 9);
        assert!(!r.contains(3, 0));
    }

    proptest! {
        #[test]
        fn kernel_of_any_function_is_equivalence(f in proptest::collection::vec(0usize..4, 0..8)) {
            let k = BitRel::identity(4).pullback(&f).unwrap();
            prop_assert!(k.is_equivalence());
        }
    }
}
