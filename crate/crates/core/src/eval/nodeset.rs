use smallvec::SmallVec;
use std::fmt;

/// A set of states of a fixed system, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NodeSet {
    len: usize,
    words: SmallVec<[u64; 2]>,
}

impl NodeSet {
    pub fn empty(len: usize) -> NodeSet {
        NodeSet {
            len,
            words: SmallVec::from_elem(0, len.div_ceil(64)),
        }
    }

    pub fn full(len: usize) -> NodeSet {
        let mut s = NodeSet::empty(len);
        for w in s.words.iter_mut() {
            *w = !0;
        }
        s.trim();
        s
    }

    pub fn singleton(len: usize, state: usize) -> NodeSet {
        let mut s = NodeSet::empty(len);
        s.insert(state);
        s
    }

    pub fn from_states(len: usize, states: impl IntoIterator<Item = usize>) -> NodeSet {
        let mut s = NodeSet::empty(len);
        for x in states {
            s.insert(x);
        }
        s
    }

    /// The set whose members are the set bits of `mask` (requires `len ≤ 64`).
    pub fn from_mask(len: usize, mask: u64) -> NodeSet {
        assert!(len <= 64, "mask conversion needs at most 64 states");
        let mut s = NodeSet::empty(len);
        if len > 0 {
            s.words[0] = mask;
            s.trim();
        }
        s
    }

    /// Bits of the set (requires `len ≤ 64`).
    pub fn mask(&self) -> u64 {
        assert!(self.len <= 64, "mask conversion needs at most 64 states");
        self.words.first().copied().unwrap_or(0)
    }

    fn trim(&mut self) {
        let extra = self.words.len() * 64 - self.len;
        if extra > 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= !0u64 >> extra;
            }
        }
    }

    /// Size of the universe.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.len
    }

    pub fn contains(&self, s: usize) -> bool {
        s < self.len && self.words[s / 64] >> (s % 64) & 1 == 1
    }

    pub fn insert(&mut self, s: usize) {
        assert!(s < self.len, "state {s} outside a universe of {}", self.len);
        self.words[s / 64] |= 1 << (s % 64);
    }

    pub fn remove(&mut self, s: usize) {
        if s < self.len {
            self.words[s / 64] &= !(1 << (s % 64));
        }
    }

    fn zip(&self, other: &NodeSet, f: impl Fn(u64, u64) -> u64) -> NodeSet {
        debug_assert_eq!(self.len, other.len);
        NodeSet {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| f(*a, *b)).collect(),
        }
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        self.zip(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &NodeSet) -> NodeSet {
        self.zip(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> NodeSet {
        let mut s = NodeSet {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        };
        s.trim();
        s
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &NodeSet) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&s| self.contains(s))
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }
}

impl fmt::Display for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, s) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for NodeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let a = NodeSet::from_states(70, [0, 3, 69]);
        let b = NodeSet::from_states(70, [3, 5]);
        assert_eq!(a.union(&b).count(), 4);
        assert_eq!(a.intersection(&b), NodeSet::singleton(70, 3));
        assert_eq!(a.complement().count(), 67);
        assert!(NodeSet::full(70).is_full());
        assert!(a.difference(&b).is_subset(&a));
        assert_eq!(a.to_string(), "{0, 3, 69}");
        assert_eq!(NodeSet::from_mask(3, 0b101).iter().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(NodeSet::from_mask(3, 0xff).count(), 3);
    }
}
