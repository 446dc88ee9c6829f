//! Nucleotides, packed kmers, reads and their FASTQ/FASTA encodings.

mod base;
mod fastx;
mod kmer;

pub use base::Base;
pub use fastx::{parse_fasta, parse_fastq, write_fasta, write_fastq, DEFAULT_PHRED_OFFSET, MAX_QUAL};
pub use kmer::{hamming_distance, hamming_packed, Kmer, MAX_K};

/// One sequencer output: called bases and their quality scores.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Read {
    pub id: String,
    pub bases: Vec<Base>,
    pub quals: Vec<u8>,
}

impl Read {
    pub fn new(id: impl Into<String>, bases: Vec<Base>, quals: Vec<u8>) -> Self {
        debug_assert_eq!(bases.len(), quals.len());
        Read { id: id.into(), bases, quals }
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn has_n(&self) -> bool {
        self.bases.contains(&Base::N)
    }

    pub fn max_qual(&self) -> u8 {
        self.quals.iter().copied().max().unwrap_or(0)
    }

    /// Same read with every `N` replaced by `A`.
    pub fn with_n_as_a(&self) -> Read {
        let bases = self
            .bases
            .iter()
            .map(|b| if *b == Base::N { Base::A } else { *b })
            .collect();
        Read { id: self.id.clone(), bases, quals: self.quals.clone() }
    }

    /// Packed kmer ending at each position `k-1..len` (`None` where the window holds an `N`).
    pub fn kmers(&self, k: usize) -> Vec<Option<u64>> {
        packed_windows(&self.bases, k)
    }
}

/// Rolling 2-bit packing of every length-`k` window of `bases`.
pub fn packed_windows(bases: &[Base], k: usize) -> Vec<Option<u64>> {
    if k == 0 || bases.len() < k {
        return Vec::new();
    }
    let mask = kmer::mask(k);
    let mut out = Vec::with_capacity(bases.len() - k + 1);
    let mut bits = 0u64;
    let mut since_n = 0usize;
    for (i, b) in bases.iter().enumerate() {
        match b.code() {
            Some(c) => {
                bits = ((bits << 2) | c as u64) & mask;
                since_n += 1;
            }
            None => {
                bits = (bits << 2) & mask;
                since_n = 0;
            }
        }
        if i + 1 >= k {
            out.push(if since_n >= k { Some(bits) } else { None });
        }
    }
    out
}

pub fn bases_from_str(s: &str) -> Result<Vec<Base>, crate::Error> {
    s.bytes()
        .map(|c| Base::from_ascii(c).ok_or_else(|| crate::Error::InvalidKmer(format!("illegal base {:?}", c as char))))
        .collect()
}

pub fn bases_to_string(bases: &[Base]) -> String {
    bases.iter().map(|b| b.to_char()).collect()
}
