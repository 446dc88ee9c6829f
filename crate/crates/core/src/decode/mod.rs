//! Read correction given a fitted model.

mod aviterbi;
mod fano;

pub use aviterbi::aviterbi_decode;
pub use fano::{fano_decode, fano_metric_update, tighten, FanoConfig};

use thiserror::Error;

use crate::index::{NeighborhoodIndex, StateId, StateSpace};
use crate::model::{EmissionTable, HmmParams};
use crate::seq::{hamming_packed, Base, Kmer, Read};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecodeStats {
    /// Trellis states (A-Viterbi) or decoder steps (Fano) examined.
    pub visited: usize,
    pub backtracks: usize,
    pub threshold_lowerings: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub corrected: Vec<Base>,
    /// One state per stage, `L - k + 1` in total.
    pub path: Vec<StateId>,
    /// Natural-log path likelihood for A-Viterbi; final Fano metric (bits, bias included) for Fano.
    pub score: f64,
    pub stats: DecodeStats,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeFailure {
    #[error("no surviving path at stage {stage}")]
    DeadTrellis { stage: usize },
    #[error("node budget of {budget} exhausted")]
    BudgetExceeded { budget: usize },
    #[error("no usable initial state")]
    NoInitialState,
    #[error("read length {found} differs from model length {expected}")]
    LengthMismatch { expected: usize, found: usize },
}

impl DecodeFailure {
    pub fn label(&self) -> &'static str {
        match self {
            DecodeFailure::DeadTrellis { .. } => "dead_trellis",
            DecodeFailure::BudgetExceeded { .. } => "budget_exceeded",
            DecodeFailure::NoInitialState => "no_initial_state",
            DecodeFailure::LengthMismatch { .. } => "length_mismatch",
        }
    }
}

/// Rebuild a base sequence from overlapping kmers: the first kmer, then the last base of each
/// following one.
pub fn reconstruct_read(path: &[Kmer]) -> Result<Vec<Base>> {
    let Some(first) = path.first() else { return Ok(Vec::new()) };
    let k = first.k();
    let keep = if k == 1 { 0 } else { (1u64 << (2 * (k - 1))) - 1 };
    let mut out = first.decode();
    for (i, w) in path.windows(2).enumerate() {
        if w[1].k() != k || (w[0].bits() & keep) != (w[1].bits() >> 2) {
            return Err(Error::BrokenPath(i + 1));
        }
        out.push(w[1].last_base());
    }
    Ok(out)
}

/// Initial state for a read whose first kmer is `first`: the kmer itself when it is a state,
/// otherwise the nearest member of its neighborhood, preferring larger incoming transition
/// mass and then the smaller id.
pub fn pick_initial_state(
    first: u64,
    space: &StateSpace,
    params: &HmmParams,
    nbhd: &NeighborhoodIndex<'_>,
) -> Option<StateId> {
    if let Some(id) = space.id(first) {
        return Some(id);
    }
    let members = nbhd.query(first);
    let mut best: Option<(u32, f64, StateId)> = None;
    for &m in members.iter() {
        let dist = hamming_packed(space.bits(m), first);
        let mass = params.incoming_mass(space, m);
        let better = match best {
            None => true,
            Some((bd, bm, _)) => dist < bd || (dist == bd && mass > bm),
        };
        if better {
            best = Some((dist, mass, m));
        }
    }
    best.map(|(_, _, id)| id)
}

/// Decoders bound to one model, with emission logs precomputed once.
pub struct Corrector<'a> {
    pub(crate) params: &'a HmmParams,
    pub(crate) space: &'a StateSpace,
    pub(crate) table: EmissionTable,
}

impl<'a> Corrector<'a> {
    pub fn new(params: &'a HmmParams, space: &'a StateSpace) -> Self {
        assert_eq!(params.k, space.k(), "model and state space disagree on k");
        assert_eq!(params.trans.len(), space.len(), "one transition row per state");
        Corrector { params, space, table: params.emission_table() }
    }

    pub fn params(&self) -> &HmmParams {
        self.params
    }

    pub fn space(&self) -> &StateSpace {
        self.space
    }

    pub(crate) fn check_len(&self, read: &Read) -> Result<(), DecodeFailure> {
        if read.len() != self.params.read_len {
            return Err(DecodeFailure::LengthMismatch { expected: self.params.read_len, found: read.len() });
        }
        Ok(())
    }

    pub(crate) fn finish(&self, path: Vec<StateId>, score: f64, stats: DecodeStats) -> DecodeResult {
        let kmers: Vec<Kmer> = path.iter().map(|&s| self.space.kmer(s)).collect();
        let corrected = reconstruct_read(&kmers).expect("decoders only follow overlapping transitions");
        DecodeResult { corrected, path, score, stats }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::{bases_from_str, bases_to_string};
    use proptest::prelude::*;

    fn kmers_of(s: &str, k: usize) -> Vec<Kmer> {
        let b = bases_from_str(s).unwrap();
        b.windows(k).map(|w| Kmer::encode(w).unwrap()).collect()
    }

    #[test]
    fn reconstruct_small_paths() {
        assert_eq!(bases_to_string(&reconstruct_read(&kmers_of("ACGT", 3)).unwrap()), "ACGT");
        assert_eq!(bases_to_string(&reconstruct_read(&kmers_of("ACG", 3)).unwrap()), "ACG");
        let bad = vec![Kmer::parse("ACG").unwrap(), Kmer::parse("GTA").unwrap()];
        assert!(matches!(reconstruct_read(&bad), Err(Error::BrokenPath(1))));
    }

    use crate::index::build_state_space;
    use crate::model::init_params;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Model on a random genome covered by every read start; emissions favor the called base,
    /// with high qualities likely on correct calls and low ones on errors.
    fn genome_model(len: usize, k: usize, read_len: usize) -> (Vec<Base>, StateSpace, HmmParams) {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let genome: Vec<Base> = (0..len).map(|_| Base::from_code(rng.gen_range(0..4))).collect();
        let reads: Vec<Read> =
            genome.windows(read_len).map(|w| Read::new("g", w.to_vec(), vec![40; read_len])).collect();
        let space = build_state_space(&reads, k).unwrap();
        let mut params = init_params(&space, read_len, 40, 2, 1e-4, 0.0);
        for m in params.confusion.iter_mut() {
            for (t, row) in m.iter_mut().enumerate() {
                *row = [0.002; 4];
                row[t] = 0.994;
            }
        }
        let ramp: Vec<f64> = (1..=40).map(|q| 0.1f64.powi(40 - q)).collect();
        let rs: f64 = ramp.iter().sum();
        for pair in params.qual.iter_mut() {
            pair[0] = ramp.iter().map(|x| x / rs).collect();
            pair[1] = ramp.iter().rev().map(|x| x / rs).collect();
        }
        (genome, space, params)
    }

    fn read_at(genome: &[Base], start: usize, len: usize) -> Read {
        Read::new("r", genome[start..start + len].to_vec(), vec![40; len])
    }

    #[test]
    fn noiseless_reads_are_left_alone() {
        let (genome, space, params) = genome_model(400, 7, 24);
        let corr = Corrector::new(&params, &space);
        for start in (0..genome.len() - 24).step_by(13) {
            let read = read_at(&genome, start, 24);
            let init = space.id(read.kmers(7)[0].unwrap()).unwrap();
            let a = corr.aviterbi(&read, 2, init).unwrap();
            assert_eq!(a.corrected, read.bases);
            let f = corr.fano(&read, &FanoConfig::default(), init).unwrap();
            assert_eq!(f.corrected, read.bases);
            assert_eq!((f.stats.backtracks, f.stats.threshold_lowerings), (0, 0));
            assert!(f.score.is_finite() && a.score.is_finite());
            assert_eq!(f.path.len(), 24 - 7 + 1);
        }
    }

    #[test]
    fn single_substitution_is_restored() {
        let (genome, space, params) = genome_model(400, 7, 24);
        let corr = Corrector::new(&params, &space);
        let truth = read_at(&genome, 101, 24);
        let mut read = truth.clone();
        read.bases[15] = Base::from_code((read.bases[15].code().unwrap() + 1) % 4);
        read.quals[15] = 8;
        let init = space.id(truth.kmers(7)[0].unwrap()).unwrap();
        assert_eq!(corr.aviterbi(&read, 2, init).unwrap().corrected, truth.bases);
        assert_eq!(corr.fano(&read, &FanoConfig::default(), init).unwrap().corrected, truth.bases);
    }

    #[test]
    fn n_calls() {
        let (genome, space, params) = genome_model(400, 7, 24);
        let corr = Corrector::new(&params, &space);
        let truth = read_at(&genome, 57, 24);
        let mut read = truth.clone();
        read.bases[12] = Base::N;
        read.quals[12] = 2;
        let init = space.id(truth.kmers(7)[0].unwrap()).unwrap();
        assert_eq!(corr.fano(&read, &FanoConfig::default(), init).unwrap().corrected, truth.bases);
        assert_eq!(corr.aviterbi(&read, 2, init).unwrap().corrected, truth.bases);
    }

    #[test]
    fn failures_are_reported() {
        let (genome, space, params) = genome_model(300, 7, 24);
        let corr = Corrector::new(&params, &space);
        let short = read_at(&genome, 0, 20);
        let init = space.id(short.kmers(7)[0].unwrap()).unwrap();
        assert_eq!(
            corr.aviterbi(&short, 2, init).unwrap_err(),
            DecodeFailure::LengthMismatch { expected: 24, found: 20 }
        );
        // a read from elsewhere cannot be explained within radius 0
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let junk = Read::new("j", (0..24).map(|_| Base::from_code(rng.gen_range(0..4))).collect(), vec![40; 24]);
        assert!(matches!(corr.aviterbi(&junk, 0, init), Err(DecodeFailure::DeadTrellis { .. })));
        let tiny = FanoConfig::default().with_budget(5);
        assert!(matches!(corr.fano(&junk, &tiny, init), Err(DecodeFailure::BudgetExceeded { budget: 5 })));
    }

    #[test]
    fn initial_state_prefers_observed_then_nearest() {
        let (genome, space, params) = genome_model(300, 7, 24);
        let nbhd = NeighborhoodIndex::new(&space, 2);
        let first = read_at(&genome, 40, 24).kmers(7)[0].unwrap();
        let id = space.id(first).unwrap();
        assert_eq!(pick_initial_state(first, &space, &params, &nbhd), Some(id));
        let moved = first ^ 0b01; // change the last base
        if space.id(moved).is_none() {
            let got = pick_initial_state(moved, &space, &params, &nbhd).unwrap();
            assert_eq!(hamming_packed(space.bits(got), moved), 1);
        }
        let far = !first & ((1 << 14) - 1);
        let got = pick_initial_state(far, &space, &params, &nbhd);
        assert!(got.is_none_or(|g| hamming_packed(space.bits(g), far) <= 2));
    }

    proptest! {
        #[test]
        fn reconstruct_inverts_windows(s in "[ACGT]{8,60}", k in 1usize..8) {
            let back = reconstruct_read(&kmers_of(&s, k)).unwrap();
            prop_assert_eq!(bases_to_string(&back), s);
        }
    }
}
