//! Fixed-universe bitset over point keys.

use serde::{Serialize, Serializer};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointSet {
    words: Vec<u64>,
    universe: usize,
}

impl PointSet {
    pub fn new(universe: usize) -> Self {
        PointSet { words: vec![0; universe.div_ceil(64)], universe }
    }

    pub fn full(universe: usize) -> Self {
        let mut s = Self::new(universe);
        for key in 0..universe {
            s.insert(key as u32);
        }
        s
    }

    pub fn from_keys(universe: usize, keys: impl IntoIterator<Item = u32>) -> Self {
        let mut s = Self::new(universe);
        for k in keys {
            s.insert(k);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn insert(&mut self, key: u32) -> bool {
        let k = key as usize;
        assert!(k < self.universe, "key {k} outside universe {}", self.universe);
        let (w, b) = (k / 64, k % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    #[inline]
    pub fn remove(&mut self, key: u32) {
        let k = key as usize;
        if k < self.universe {
            self.words[k / 64] &= !(1 << (k % 64));
        }
    }

    #[inline]
    pub fn contains(&self, key: u32) -> bool {
        let k = key as usize;
        k < self.universe && self.words[k / 64] & (1 << (k % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Keys in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let b = word.trailing_zeros();
                word &= word - 1;
                Some(wi as u32 * 64 + b)
            })
        })
    }

    pub fn union_with(&mut self, other: &PointSet) {
        assert_eq!(self.universe, other.universe);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.universe == other.universe
            && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }
}

impl Serialize for PointSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}
