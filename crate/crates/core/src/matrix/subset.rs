use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A subset `v` of `{0, .., n-1}` stored as a bitset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<usize>")]
pub struct SubsetState {
    n: usize,
    words: Vec<u64>,
}

impl From<SubsetState> for Vec<usize> {
    fn from(s: SubsetState) -> Self {
        s.iter().collect()
    }
}

impl SubsetState {
    pub fn empty(n: usize) -> Self {
        SubsetState { n, words: vec![0; n.div_ceil(64)] }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Result<Self> {
        let mut s = Self::empty(n);
        for &i in indices {
            if i >= n {
                return Err(Error::InvalidParameter(format!("index {i} out of range for n = {n}")));
            }
            s.insert(i);
        }
        Ok(s)
    }

    /// Subset encoded by the low `n` bits of `mask` (`n <= 64`).
    pub fn from_mask(n: usize, mask: u64) -> Self {
        assert!(n <= 64, "mask encoding requires n <= 64");
        let mut s = Self::empty(n);
        if n > 0 {
            s.words[0] = if n == 64 { mask } else { mask & ((1u64 << n) - 1) };
        }
        s
    }

    /// Bitmask encoding, available when `n <= 64`.
    pub fn mask(&self) -> Option<u64> {
        (self.n <= 64).then(|| self.words.first().copied().unwrap_or(0))
    }

    /// Parses a comma separated index list such as `"0,2,5"`; empty string is
    /// the empty set.
    pub fn parse(n: usize, text: &str) -> Result<Self> {
        let text = text.trim().trim_start_matches('{').trim_end_matches('}');
        let mut idx = Vec::new();
        for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let i: usize = tok
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad subset index `{tok}`")))?;
            idx.push(i);
        }
        Self::from_indices(n, &idx)
    }

    pub fn ambient(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Inserts `i`; returns `true` if it was not already present.
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.n, "index {i} out of range for n = {}", self.n);
        let bit = 1u64 << (i % 64);
        let fresh = self.words[i / 64] & bit == 0;
        self.words[i / 64] |= bit;
        fresh
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_full(&self) -> bool {
        self.len() == self.n
    }

    pub fn is_subset_of(&self, other: &SubsetState) -> bool {
        self.n == other.n && self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(w, &bits)| {
            let mut rest = bits;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(w * 64 + tz)
            })
        })
    }

    /// Indicator vector `1_v` of length `n`.
    pub fn indicator(&self) -> Vec<f64> {
        (0..self.n).map(|i| if self.contains(i) { 1.0 } else { 0.0 }).collect()
    }
}

impl fmt::Display for SubsetState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}
