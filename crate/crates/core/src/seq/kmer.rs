use std::fmt;

use super::Base;
use crate::{Error, Result};

pub const MAX_K: usize = 32;

const LOW_BITS: u64 = 0x5555_5555_5555_5555;

#[inline]
pub(crate) fn mask(k: usize) -> u64 {
    if k >= 32 {
        u64::MAX
    } else {
        (1u64 << (2 * k)) - 1
    }
}

/// A length-`k` base string packed 2 bits per base, first base in the most significant position.
///
/// Ordering is by `(k, bits)`, which for equal `k` coincides with lexicographic order of the string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Kmer {
    k: u8,
    bits: u64,
}

impl Kmer {
    pub fn encode(window: &[Base]) -> Result<Kmer> {
        let k = window.len();
        if k == 0 || k > MAX_K {
            return Err(Error::InvalidKmer(format!("length {k} outside 1..={MAX_K}")));
        }
        let mut bits = 0u64;
        for (i, b) in window.iter().enumerate() {
            let c = b
                .code()
                .ok_or_else(|| Error::InvalidKmer(format!("N at offset {i}")))?;
            bits = (bits << 2) | c as u64;
        }
        Ok(Kmer { k: k as u8, bits })
    }

    pub fn parse(s: &str) -> Result<Kmer> {
        let bases = super::bases_from_str(s)?;
        Kmer::encode(&bases)
    }

    /// Build from raw bits; high bits beyond `2k` are discarded.
    pub fn from_bits(bits: u64, k: usize) -> Kmer {
        assert!((1..=MAX_K).contains(&k), "k must be in 1..=32");
        Kmer { k: k as u8, bits: bits & mask(k) }
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn k(self) -> usize {
        self.k as usize
    }

    pub fn decode(self) -> Vec<Base> {
        let k = self.k();
        (0..k)
            .map(|i| Base::from_code(((self.bits >> (2 * (k - 1 - i))) & 3) as u8))
            .collect()
    }

    #[inline]
    pub fn last_base(self) -> Base {
        Base::from_code((self.bits & 3) as u8)
    }

    #[inline]
    pub fn first_base(self) -> Base {
        Base::from_code((self.bits >> (2 * (self.k() - 1))) as u8 & 3)
    }

    /// Drop the first base and append `next`.
    #[inline]
    pub fn successor(self, next: u8) -> Kmer {
        Kmer { k: self.k, bits: ((self.bits << 2) | next as u64) & mask(self.k()) }
    }

    /// Prepend `prev` and drop the last base.
    #[inline]
    pub fn predecessor(self, prev: u8) -> Kmer {
        let k = self.k();
        Kmer { k: self.k, bits: (self.bits >> 2) | ((prev as u64) << (2 * (k - 1))) }
    }
}

impl fmt::Display for Kmer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.decode() {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Hamming distance between two packed kmers of the same length.
#[inline]
pub fn hamming_packed(a: u64, b: u64) -> u32 {
    let x = a ^ b;
    ((x | (x >> 1)) & LOW_BITS).count_ones()
}

/// Number of positions at which `a` and `b` differ. Panics if the lengths differ.
pub fn hamming_distance(a: Kmer, b: Kmer) -> u32 {
    assert_eq!(a.k, b.k, "hamming_distance on kmers of different length");
    hamming_packed(a.bits, b.bits)
}
