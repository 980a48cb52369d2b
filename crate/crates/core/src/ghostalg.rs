//! Increasing multi-indices over the ghost generators `1..=m` and the sign
//! calculus of anticommuting products.
//!
//! A [`MultiIndex`] is stored as a bitset (bit `a-1` set iff index `a` is
//! present). All signs come from counting adjacent transpositions; nothing is
//! tabulated.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported number of ghost generators.
pub const MAX_GHOSTS: usize = 16;

/// A sign in `{-1, 0, +1}`; zero marks a vanishing product.
pub type Sign = i8;

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    bits: u32,
    m: u8,
}

impl MultiIndex {
    pub fn empty(m: usize) -> Self {
        assert!(m <= MAX_GHOSTS, "ghost count {m} exceeds {MAX_GHOSTS}");
        MultiIndex { bits: 0, m: m as u8 }
    }

    /// The full index `(1, 2, ..., m)`.
    pub fn full(m: usize) -> Self {
        let mut idx = Self::empty(m);
        idx.bits = if m == 0 { 0 } else { (1u32 << m) - 1 };
        idx
    }

    /// Build from an already strictly increasing list of indices.
    pub fn from_increasing(indices: &[usize], m: usize) -> Result<Self> {
        if m > MAX_GHOSTS {
            return Err(Error::Domain(format!("ghost count {m} exceeds {MAX_GHOSTS}")));
        }
        let mut bits = 0u32;
        let mut prev = 0usize;
        for &a in indices {
            if a < 1 || a > m {
                return Err(Error::Domain(format!("index {a} outside 1..={m}")));
            }
            if a <= prev {
                return Err(Error::Domain(format!("indices {indices:?} not strictly increasing")));
            }
            prev = a;
            bits |= 1 << (a - 1);
        }
        Ok(MultiIndex { bits, m: m as u8 })
    }

    pub fn singleton(a: usize, m: usize) -> Result<Self> {
        Self::from_increasing(&[a], m)
    }

    pub(crate) fn from_bits(bits: u32, m: usize) -> Self {
        debug_assert!(m <= MAX_GHOSTS && (m == 32 || bits >> m == 0));
        MultiIndex { bits, m: m as u8 }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn m(&self) -> usize {
        self.m as usize
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn contains(&self, a: usize) -> bool {
        a >= 1 && a <= self.m() && self.bits & (1 << (a - 1)) != 0
    }

    /// Indices in increasing order.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        let bits = self.bits;
        (1..=self.m()).filter(move |a| bits & (1 << (a - 1)) != 0)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.indices().collect()
    }

    /// Number of elements strictly smaller than `a`.
    pub fn count_below(&self, a: usize) -> usize {
        debug_assert!(a >= 1);
        (self.bits & ((1u32 << (a - 1)) - 1)).count_ones() as usize
    }

    pub fn without(&self, a: usize) -> Self {
        MultiIndex { bits: self.bits & !(1 << (a - 1)), m: self.m }
    }

    pub fn with(&self, a: usize) -> Self {
        MultiIndex { bits: self.bits | (1 << (a - 1)), m: self.m }
    }

    pub fn is_disjoint(&self, other: &MultiIndex) -> bool {
        self.bits & other.bits == 0
    }

    /// All multi-indices of length `r` in lexicographic order.
    pub fn all_of_len(m: usize, r: usize) -> Vec<MultiIndex> {
        let mut out: Vec<MultiIndex> = (0u32..(1u32 << m))
            .filter(|b| b.count_ones() as usize == r)
            .map(|b| MultiIndex::from_bits(b, m))
            .collect();
        out.sort();
        out
    }

    /// All `2^m` multi-indices ordered by (length, lexicographic).
    pub fn all(m: usize) -> Vec<MultiIndex> {
        (0..=m).flat_map(|r| Self::all_of_len(m, r)).collect()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.m
            .cmp(&other.m)
            .then(self.len().cmp(&other.len()))
            .then_with(|| {
                let diff = self.bits ^ other.bits;
                if diff == 0 {
                    Ordering::Equal
                } else if self.bits & (diff & diff.wrapping_neg()) != 0 {
                    // the lowest differing index belongs to self
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            })
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.to_vec())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Sort a raw product `eta^{a_1} ... eta^{a_r}` into increasing order.
///
/// Returns the sorted index and the sign of the sorting permutation, or
/// `(empty, 0)` when an index repeats.
pub fn normalize(raw: &[usize], m: usize) -> Result<(MultiIndex, Sign)> {
    if m > MAX_GHOSTS {
        return Err(Error::Domain(format!("ghost count {m} exceeds {MAX_GHOSTS}")));
    }
    if let Some(&bad) = raw.iter().find(|&&a| a < 1 || a > m) {
        return Err(Error::Domain(format!("index {bad} outside 1..={m}")));
    }
    let mut seq = raw.to_vec();
    let mut sign: Sign = 1;
    // bubble sort: every adjacent transposition flips the sign
    for pass in 0..seq.len() {
        for k in 0..seq.len().saturating_sub(pass + 1) {
            match seq[k].cmp(&seq[k + 1]) {
                Ordering::Greater => {
                    seq.swap(k, k + 1);
                    sign = -sign;
                }
                Ordering::Equal => return Ok((MultiIndex::empty(m), 0)),
                Ordering::Less => {}
            }
        }
    }
    if seq.windows(2).any(|w| w[0] == w[1]) {
        return Ok((MultiIndex::empty(m), 0));
    }
    Ok((MultiIndex::from_increasing(&seq, m)?, sign))
}

/// `eta^I eta^J = sign * eta^{I u J}`.
pub fn merge_sign(i: &MultiIndex, j: &MultiIndex) -> (MultiIndex, Sign) {
    debug_assert_eq!(i.m, j.m);
    if !i.is_disjoint(j) {
        return (MultiIndex::empty(i.m()), 0);
    }
    // each pair (a in I, b in J) with a > b costs one transposition
    let inversions: u32 = j
        .indices()
        .map(|b| (i.bits >> b).count_ones())
        .sum();
    let sign = if inversions % 2 == 0 { 1 } else { -1 };
    (MultiIndex { bits: i.bits | j.bits, m: i.m }, sign)
}

/// Sign relating `eta^{a_r} ... eta^{a_1}` to `eta^{a_1} ... eta^{a_r}`.
pub fn reversal_sign(i: &MultiIndex) -> Sign {
    reversal_sign_len(i.len())
}

pub fn reversal_sign_len(r: usize) -> Sign {
    if (r * r.saturating_sub(1) / 2) % 2 == 0 {
        1
    } else {
        -1
    }
}

/// The increasing complement of `I` in `(1, ..., m)`.
pub fn complement(i: &MultiIndex) -> MultiIndex {
    MultiIndex { bits: MultiIndex::full(i.m()).bits & !i.bits, m: i.m }
}

/// Left derivative `d/d eta^a` applied to `eta^I`.
pub fn left_derivative(a: usize, i: &MultiIndex) -> (MultiIndex, Sign) {
    if !i.contains(a) {
        return (MultiIndex::empty(i.m()), 0);
    }
    let sign = if i.count_below(a) % 2 == 0 { 1 } else { -1 };
    (i.without(a), sign)
}
