//! The restricted state space: every kmer observed in the reads, with dense ids, succession
//! counts, and Hamming-radius neighborhood queries.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use crate::seq::{hamming_packed, Kmer, Read};
use crate::{Error, Result};

/// Dense identifier of an HMM state. Ids follow ascending kmer order.
pub type StateId = u32;

#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    k: usize,
    kmers: Vec<u64>,
    ids: HashMap<u64, StateId>,
    occurrences: Vec<u64>,
    succ_counts: Vec<[u64; 4]>,
}

#[derive(Default)]
struct Tally {
    occ: u64,
    succ: [u64; 4],
}

fn merge_tallies(mut a: HashMap<u64, Tally>, b: HashMap<u64, Tally>) -> HashMap<u64, Tally> {
    if a.len() < b.len() {
        return merge_tallies(b, a);
    }
    for (km, t) in b {
        let e = a.entry(km).or_default();
        e.occ += t.occ;
        for i in 0..4 {
            e.succ[i] += t.succ[i];
        }
    }
    a
}

/// Collect every N-free kmer in `reads` and count `n(kmer, next base)` adjacencies.
pub fn build_state_space(reads: &[Read], k: usize) -> Result<StateSpace> {
    if k == 0 || k > crate::seq::MAX_K {
        return Err(Error::Config(format!("k = {k} outside 1..=32")));
    }
    if let Some(r) = reads.iter().find(|r| r.len() < k) {
        return Err(Error::Config(format!("k = {k} exceeds length {} of read {}", r.len(), r.id)));
    }
    let tallies = reads
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<u64, Tally>, read| {
            let windows = read.kmers(k);
            for (i, w) in windows.iter().enumerate() {
                let Some(bits) = *w else { continue };
                let t = acc.entry(bits).or_default();
                t.occ += 1;
                if let Some(next) = read.bases.get(i + k).and_then(|b| b.code()) {
                    t.succ[next as usize] += 1;
                }
            }
            acc
        })
        .reduce(HashMap::new, merge_tallies);

    let mut entries: Vec<(u64, Tally)> = tallies.into_iter().collect();
    entries.sort_unstable_by_key(|(km, _)| *km);
    let mut space = StateSpace {
        k,
        kmers: Vec::with_capacity(entries.len()),
        ids: HashMap::with_capacity(entries.len()),
        occurrences: Vec::with_capacity(entries.len()),
        succ_counts: Vec::with_capacity(entries.len()),
    };
    for (i, (km, t)) in entries.into_iter().enumerate() {
        space.kmers.push(km);
        space.ids.insert(km, i as StateId);
        space.occurrences.push(t.occ);
        space.succ_counts.push(t.succ);
    }
    Ok(space)
}

impl StateSpace {
    /// State space with the given kmers and no recorded counts (used when loading a model).
    pub fn from_kmers(k: usize, mut kmers: Vec<u64>) -> StateSpace {
        kmers.sort_unstable();
        kmers.dedup();
        let ids = kmers.iter().enumerate().map(|(i, km)| (*km, i as StateId)).collect();
        let n = kmers.len();
        StateSpace { k, kmers, ids, occurrences: vec![0; n], succ_counts: vec![[0; 4]; n] }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.kmers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kmers.is_empty()
    }

    #[inline]
    pub fn id(&self, bits: u64) -> Option<StateId> {
        self.ids.get(&bits).copied()
    }

    pub fn id_of(&self, kmer: Kmer) -> Option<StateId> {
        if kmer.k() != self.k {
            return None;
        }
        self.id(kmer.bits())
    }

    #[inline]
    pub fn bits(&self, id: StateId) -> u64 {
        self.kmers[id as usize]
    }

    pub fn kmer(&self, id: StateId) -> Kmer {
        Kmer::from_bits(self.kmers[id as usize], self.k)
    }

    pub fn kmers(&self) -> &[u64] {
        &self.kmers
    }

    /// Id of the state reached from `id` by appending `base` (2-bit code), if it is in the space.
    #[inline]
    pub fn successor(&self, id: StateId, base: u8) -> Option<StateId> {
        let mask = if self.k >= 32 { u64::MAX } else { (1u64 << (2 * self.k)) - 1 };
        self.id(((self.kmers[id as usize] << 2) | base as u64) & mask)
    }

    pub fn succ_counts(&self, id: StateId) -> [u64; 4] {
        self.succ_counts[id as usize]
    }

    pub fn occurrences(&self, id: StateId) -> u64 {
        self.occurrences[id as usize]
    }

    pub fn total_successions(&self) -> u64 {
        self.succ_counts.iter().flat_map(|c| c.iter()).sum()
    }

    /// Keep only the states flagged in `keep`. Returns the new space and the old→new id map.
    pub fn restrict(&self, keep: &[bool]) -> (StateSpace, Vec<Option<StateId>>) {
        assert_eq!(keep.len(), self.len());
        let mut remap = vec![None; self.len()];
        let mut out = StateSpace {
            k: self.k,
            kmers: Vec::new(),
            ids: HashMap::new(),
            occurrences: Vec::new(),
            succ_counts: Vec::new(),
        };
        for (old, &kept) in keep.iter().enumerate() {
            if kept {
                let new = out.kmers.len() as StateId;
                remap[old] = Some(new);
                out.kmers.push(self.kmers[old]);
                out.ids.insert(self.kmers[old], new);
                out.occurrences.push(self.occurrences[old]);
                out.succ_counts.push(self.succ_counts[old]);
            }
        }
        (out, remap)
    }

    /// Tab-separated dump: kmer, occurrence count, successor counts for A, C, G, T.
    pub fn write_dump<W: Write>(&self, mut out: W) -> Result<()> {
        for id in 0..self.len() {
            let c = self.succ_counts[id];
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                self.kmer(id as StateId),
                self.occurrences[id],
                c[0],
                c[1],
                c[2],
                c[3]
            )?;
        }
        Ok(())
    }
}

/// States of a space lying within Hamming radius `d` of a center kmer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhood {
    pub center: Kmer,
    pub d: usize,
    pub members: Vec<StateId>,
}

/// One-shot neighborhood query. Enumerates substitutions for small radii, scans otherwise.
pub fn neighborhood(center: Kmer, d: usize, space: &StateSpace) -> Neighborhood {
    assert_eq!(center.k(), space.k(), "neighborhood center has the wrong k");
    let members = if d <= 2 {
        let mut m = Vec::new();
        enumerate_mutations(center.bits(), space.k(), d, &mut |bits| {
            if let Some(id) = space.id(bits) {
                m.push(id);
            }
        });
        m.sort_unstable();
        m
    } else {
        linear_scan(center.bits(), d, space)
    };
    Neighborhood { center, d, members }
}

fn linear_scan(center: u64, d: usize, space: &StateSpace) -> Vec<StateId> {
    space
        .kmers
        .iter()
        .enumerate()
        .filter(|(_, km)| hamming_packed(**km, center) as usize <= d)
        .map(|(i, _)| i as StateId)
        .collect()
}

/// Visit every kmer within Hamming distance `d` of `center` (each exactly once).
fn enumerate_mutations(center: u64, k: usize, d: usize, f: &mut dyn FnMut(u64)) {
    fn rec(bits: u64, k: usize, from: usize, left: usize, f: &mut dyn FnMut(u64)) {
        f(bits);
        if left == 0 {
            return;
        }
        for pos in from..k {
            let shift = 2 * (k - 1 - pos);
            let orig = (bits >> shift) & 3;
            for alt in 1..4u64 {
                let nb = (bits & !(3 << shift)) | (((orig + alt) & 3) << shift);
                rec(nb, k, pos + 1, left - 1, f);
            }
        }
    }
    rec(center, k, 0, d, f);
}

/// Repeated neighborhood queries at a fixed radius, memoized per center.
///
/// For radii above 2 the kmer is cut into `d + 1` contiguous chunks; any kmer within distance
/// `d` agrees with the center exactly on at least one chunk, so candidates come from per-chunk
/// posting lists and are then filtered by the true distance.
pub struct NeighborhoodIndex<'a> {
    space: &'a StateSpace,
    d: usize,
    chunks: Vec<(u32, u64)>,
    postings: Vec<HashMap<u64, Vec<StateId>>>,
    cache: RwLock<HashMap<u64, Arc<[StateId]>>>,
}

impl<'a> NeighborhoodIndex<'a> {
    pub fn new(space: &'a StateSpace, d: usize) -> Self {
        let k = space.k();
        let mut chunks = Vec::new();
        let mut postings = Vec::new();
        if d > 2 && d < k {
            let parts = d + 1;
            let mut start = 0;
            for p in 0..parts {
                let len = k / parts + usize::from(p < k % parts);
                let shift = 2 * (k - start - len) as u32;
                let mask = (1u64 << (2 * len)) - 1;
                chunks.push((shift, mask));
                start += len;
            }
            postings = chunks
                .par_iter()
                .map(|&(shift, mask)| {
                    let mut m: HashMap<u64, Vec<StateId>> = HashMap::new();
                    for (i, km) in space.kmers.iter().enumerate() {
                        m.entry((km >> shift) & mask).or_default().push(i as StateId);
                    }
                    m
                })
                .collect();
        }
        NeighborhoodIndex { space, d, chunks, postings, cache: RwLock::new(HashMap::new()) }
    }

    pub fn radius(&self) -> usize {
        self.d
    }

    pub fn space(&self) -> &StateSpace {
        self.space
    }

    /// Members of the space within radius `d` of `center`, ascending by id.
    pub fn query(&self, center: u64) -> Arc<[StateId]> {
        if let Some(hit) = self.cache.read().expect("neighborhood cache poisoned").get(&center) {
            return hit.clone();
        }
        let members: Arc<[StateId]> = self.compute(center).into();
        let mut cache = self.cache.write().expect("neighborhood cache poisoned");
        cache.entry(center).or_insert(members).clone()
    }

    fn compute(&self, center: u64) -> Vec<StateId> {
        let k = self.space.k();
        if self.d >= k {
            return (0..self.space.len() as StateId).collect();
        }
        if self.d <= 2 {
            let mut m = Vec::new();
            enumerate_mutations(center, k, self.d, &mut |bits| {
                if let Some(id) = self.space.id(bits) {
                    m.push(id);
                }
            });
            m.sort_unstable();
            return m;
        }
        let mut cand: Vec<StateId> = Vec::new();
        for (&(shift, mask), post) in self.chunks.iter().zip(&self.postings) {
            if let Some(ids) = post.get(&((center >> shift) & mask)) {
                cand.extend(ids.iter().copied().filter(|&id| {
                    hamming_packed(self.space.kmers[id as usize], center) as usize <= self.d
                }));
            }
        }
        cand.sort_unstable();
        cand.dedup();
        cand
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::{bases_from_str, Base};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn read(s: &str) -> Read {
        let b = bases_from_str(s).unwrap();
        let q = vec![30; b.len()];
        Read::new("r", b, q)
    }

    fn random_reads(n: usize, len: usize, seed: u64) -> Vec<Read> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                let s: String = (0..len)
                    .map(|_| if rng.gen_bool(0.02) { 'N' } else { b"ACGT"[rng.gen_range(0..4)] as char })
                    .collect();
                let mut r = read(&s);
                r.id = format!("r{i}");
                r
            })
            .collect()
    }

    #[test]
    fn single_read_acgt() {
        let space = build_state_space(&[read("ACGT")], 3).unwrap();
        assert_eq!(space.len(), 2);
        let acg = space.id_of(Kmer::parse("ACG").unwrap()).unwrap();
        let cgt = space.id_of(Kmer::parse("CGT").unwrap()).unwrap();
        assert_eq!(space.succ_counts(acg), [0, 0, 0, 1]);
        assert_eq!(space.succ_counts(cgt), [0, 0, 0, 0]);
    }

    #[test]
    fn homopolymer_counts() {
        let space = build_state_space(&[read("AAAA"), read("AAAA")], 2).unwrap();
        assert_eq!(space.len(), 1);
        assert_eq!(space.succ_counts(0), [4, 0, 0, 0]);
        assert_eq!(space.occurrences(0), 6);
    }

    #[test]
    fn n_windows_are_skipped() {
        let space = build_state_space(&[read("ACNGTA")], 2).unwrap();
        let names: Vec<String> = (0..space.len()).map(|i| space.kmer(i as StateId).to_string()).collect();
        assert_eq!(names, vec!["AC", "GT", "TA"]);
        let ac = space.id_of(Kmer::parse("AC").unwrap()).unwrap();
        assert_eq!(space.succ_counts(ac), [0; 4]);
    }

    #[test]
    fn k_longer_than_read_is_an_error() {
        assert!(build_state_space(&[read("ACG")], 4).is_err());
    }

    #[test]
    fn counts_match_nested_loop_recount() {
        let reads = random_reads(1000, 30, 9);
        let k = 5;
        let space = build_state_space(&reads, k).unwrap();
        let mut naive: HashMap<String, [u64; 4]> = HashMap::new();
        let mut adj = 0u64;
        for r in &reads {
            let s: String = r.bases.iter().map(|b| b.to_char()).collect();
            for i in 0..=s.len() - k {
                let w = &s[i..i + k];
                if w.contains('N') {
                    continue;
                }
                let e = naive.entry(w.to_string()).or_default();
                if let Some(c) = s.as_bytes().get(i + k) {
                    if let Some(b) = Base::from_ascii(*c).and_then(|b| b.code()) {
                        e[b as usize] += 1;
                        adj += 1;
                    }
                }
            }
        }
        assert_eq!(naive.len(), space.len());
        for (w, c) in &naive {
            let id = space.id_of(Kmer::parse(w).unwrap()).unwrap();
            assert_eq!(space.succ_counts(id), *c, "{w}");
        }
        assert_eq!(space.total_successions(), adj);
    }

    #[test]
    fn neighborhood_edges() {
        let reads = random_reads(50, 20, 1);
        let space = build_state_space(&reads, 6).unwrap();
        let c = space.kmer(3);
        assert_eq!(neighborhood(c, 0, &space).members, vec![3]);
        assert_eq!(neighborhood(c, 6, &space).members.len(), space.len());
        let idx = NeighborhoodIndex::new(&space, 6);
        assert_eq!(idx.query(c.bits()).len(), space.len());
    }

    #[test]
    fn indexed_queries_match_linear_scan() {
        let reads = random_reads(400, 25, 5);
        let space = build_state_space(&reads, 6).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for d in 0..=4 {
            let idx = NeighborhoodIndex::new(&space, d);
            for _ in 0..200 {
                let center = rng.gen_range(0..(1u64 << 12));
                let want = linear_scan(center, d, &space);
                assert_eq!(&*idx.query(center), &want[..], "d={d}");
                assert_eq!(neighborhood(Kmer::from_bits(center, 6), d, &space).members, want);
            }
        }
    }

    #[test]
    fn dump_is_sorted_tsv() {
        let space = build_state_space(&[read("ACGTA")], 3).unwrap();
        let mut out = Vec::new();
        space.write_dump(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "ACG\t1\t0\t0\t0\t1\nCGT\t1\t1\t0\t0\t0\nGTA\t1\t0\t0\t0\t0\n");
    }

    proptest! {
        #[test]
        fn neighborhoods_are_nested(seed in 0u64..1000, d1 in 0usize..5, extra in 0usize..3) {
            let reads = random_reads(60, 15, seed);
            let space = build_state_space(&reads, 7).unwrap();
            let c = space.kmer(0);
            let small = neighborhood(c, d1, &space).members;
            let big = neighborhood(c, d1 + extra, &space).members;
            prop_assert!(small.iter().all(|m| big.contains(m)));
            prop_assert!(small.contains(&0));
        }

        #[test]
        fn build_is_order_independent(seed in 0u64..1000) {
            let mut reads = random_reads(40, 12, seed);
            let a = build_state_space(&reads, 4).unwrap();
            reads.reverse();
            let b = build_state_space(&reads, 4).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
