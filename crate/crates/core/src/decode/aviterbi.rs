use crate::decode::{Corrector, DecodeFailure, DecodeResult, DecodeStats};
use crate::index::{StateId, StateSpace};
use crate::model::{HmmParams, Trellis};
use crate::seq::Read;

impl Corrector<'_> {
    /// Viterbi restricted to survivor paths whose kmers stay within Hamming radius `d` of the
    /// observed kmers. `N` calls are read as `A`.
    pub fn aviterbi(&self, read: &Read, d: usize, initial: StateId) -> Result<DecodeResult, DecodeFailure> {
        self.check_len(read)?;
        let read = if read.has_n() { read.with_n_as_a() } else { read.clone() };
        let radius = (d < self.space.k()).then_some(d);
        let trellis = Trellis::build(&read.bases, &read.quals, self.space, self.params, &self.table, initial, radius)
            .map_err(|stage| DecodeFailure::DeadTrellis { stage })?;
        let visited = trellis.stages.iter().map(|s| s.states.len()).sum();
        let (slots, score) = trellis
            .viterbi()
            .ok_or(DecodeFailure::DeadTrellis { stage: trellis.len() - 1 })?;
        let path = slots.iter().enumerate().map(|(j, &i)| trellis.stages[j].states[i as usize]).collect();
        Ok(self.finish(path, score, DecodeStats { visited, ..DecodeStats::default() }))
    }
}

pub fn aviterbi_decode(
    read: &Read,
    params: &HmmParams,
    space: &StateSpace,
    d: usize,
    initial: StateId,
) -> Result<DecodeResult, DecodeFailure> {
    Corrector::new(params, space).aviterbi(read, d, initial)
}
