//! Packed 0/1 rows over the training sample. Bit `i` set means the row's
//! hypothesis misclassifies example `i`.

use std::fmt;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dichotomy {
    words: Vec<u64>,
    len: usize,
}

impl Dichotomy {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut row = Self::zeros(len);
        for i in 0..len {
            if f(i) {
                row.set(i, true);
            }
        }
        row
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        Self::from_fn(bits.len(), |i| bits[i])
    }

    /// Parses a row of `0`/`1` values.
    pub fn from_u8(bits: &[u8]) -> Self {
        Self::from_fn(bits.len(), |i| bits[i] != 0)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, value: bool) {
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_all_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_all_ones(&self) -> bool {
        self.count_ones() == self.len
    }

    /// Every bit flipped: the row of the opposite-polarity hypothesis.
    pub fn complement(&self) -> Self {
        Self::from_fn(self.len, |i| !self.get(i))
    }

    /// True when the set of ones of `self` strictly contains that of `other`.
    pub fn is_strict_superset_of(&self, other: &Self) -> bool {
        debug_assert_eq!(self.len, other.len);
        let contains = self
            .words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| b & !a == 0);
        contains && self.words != other.words
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    /// The row restricted to the bits set in `mask` (same length).
    pub(crate) fn masked_words(&self, mask: &[u64]) -> Vec<u64> {
        self.words.iter().zip(mask).map(|(a, b)| a & b).collect()
    }
}

impl fmt::Debug for Dichotomy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Dichotomy(")?;
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        write!(f, ")")
    }
}

/// Lane-split sum of `w[i]` over indices where `pick(i)` holds.
///
/// All weighted errors in the crate go through this accumulation pattern so
/// that scalar and matrix evaluations of the same row agree bit for bit.
#[inline]
pub(crate) fn lane_sum(w: &[f64], mut pick: impl FnMut(usize) -> bool) -> f64 {
    let mut acc = [0.0f64; 4];
    for (i, &x) in w.iter().enumerate() {
        if pick(i) {
            acc[i & 3] += x;
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

/// Same accumulation as [`lane_sum`] with a dense 0/1 mask.
#[inline]
pub(crate) fn masked_dot(mask: &[f64], w: &[f64]) -> f64 {
    debug_assert_eq!(mask.len(), w.len());
    let mut acc = [0.0f64; 4];
    let mut chunks_m = mask.chunks_exact(4);
    let mut chunks_w = w.chunks_exact(4);
    for (cm, cw) in (&mut chunks_m).zip(&mut chunks_w) {
        acc[0] += cm[0] * cw[0];
        acc[1] += cm[1] * cw[1];
        acc[2] += cm[2] * cw[2];
        acc[3] += cm[3] * cw[3];
    }
    for (k, (a, b)) in chunks_m
        .remainder()
        .iter()
        .zip(chunks_w.remainder())
        .enumerate()
    {
        acc[k] += a * b;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}
