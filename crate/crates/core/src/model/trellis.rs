//! Read-specific trellis over the restricted state space.
//!
//! Stage `j` (0-based) holds the candidate true kmers ending at read position `k + j`
//! (1-based). Stage 0 is the fixed initial state. A state enters stage `j >= 1` only if it is
//! reached from a stage `j - 1` state by a positive-probability transition, lies within the
//! Hamming radius of the observed kmer at that stage, and has a non-zero emission. States of
//! the neighborhood that are not reachable this way carry zero forward mass, so leaving them
//! out changes neither likelihoods nor posteriors.

use std::collections::HashMap;

use crate::index::{StateId, StateSpace};
use crate::model::{EmissionTable, HmmParams};
use crate::seq::{hamming_packed, packed_windows, Base};

#[derive(Debug, Clone, Copy)]
pub struct Edge {
    pub from: u32,
    pub to: u32,
    pub base: u8,
    pub log_trans: f64,
}

#[derive(Debug, Clone, Default)]
pub struct Stage {
    pub states: Vec<StateId>,
    pub log_emit: Vec<f64>,
    /// Edges from the previous stage into this one (empty for stage 0).
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone)]
pub struct Trellis {
    pub stages: Vec<Stage>,
}

impl Trellis {
    /// Build the pruned trellis for one read. `radius = None` disables the Hamming constraint.
    /// On failure returns the first stage with no live state.
    pub fn build(
        bases: &[Base],
        quals: &[u8],
        space: &StateSpace,
        params: &HmmParams,
        table: &EmissionTable,
        initial: StateId,
        radius: Option<usize>,
    ) -> Result<Trellis, usize> {
        let k = space.k();
        let n_stages = bases.len() - k + 1;
        let observed: Vec<u64> = if radius.is_some() {
            let no_n: Vec<Base> = bases.iter().map(|b| if *b == Base::N { Base::A } else { *b }).collect();
            packed_windows(&no_n, k).into_iter().map(|w| w.unwrap()).collect()
        } else {
            Vec::new()
        };

        let mut stages = Vec::with_capacity(n_stages);
        stages.push(Stage { states: vec![initial], log_emit: vec![0.0], edges: Vec::new() });
        let mut slot: HashMap<StateId, u32> = HashMap::new();
        for j in 1..n_stages {
            let pos = k + j - 1;
            let e = j - 1;
            let called = bases[pos];
            let qual = quals[pos];
            let prev = &stages[j - 1];
            let mut cur = Stage::default();
            slot.clear();
            for (fi, &from) in prev.states.iter().enumerate() {
                let row = &params.trans[from as usize];
                for b in 0..4u8 {
                    let p = row[b as usize];
                    if p <= 0.0 {
                        continue;
                    }
                    let Some(to) = space.successor(from, b) else { continue };
                    if let Some(d) = radius {
                        if hamming_packed(space.bits(to), observed[j]) as usize > d {
                            continue;
                        }
                    }
                    let ti = match slot.get(&to) {
                        Some(&ti) => ti,
                        None => {
                            let le = table.log_emit(e, called, qual, b);
                            if le == f64::NEG_INFINITY {
                                continue;
                            }
                            let ti = cur.states.len() as u32;
                            cur.states.push(to);
                            cur.log_emit.push(le);
                            slot.insert(to, ti);
                            ti
                        }
                    };
                    cur.edges.push(Edge { from: fi as u32, to: ti, base: b, log_trans: p.ln() });
                }
            }
            if cur.states.is_empty() {
                return Err(j);
            }
            stages.push(cur);
        }
        Ok(Trellis { stages })
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    /// Log forward values; `alpha[j][i]` covers emissions of stages `1..=j`.
    pub fn forward(&self) -> Vec<Vec<f64>> {
        let mut alpha: Vec<Vec<f64>> = Vec::with_capacity(self.stages.len());
        alpha.push(vec![0.0]);
        for st in &self.stages[1..] {
            let prev = alpha.last().unwrap();
            let mut cur = vec![f64::NEG_INFINITY; st.states.len()];
            log_sum_edges(&st.edges, &mut cur, |e| prev[e.from as usize] + e.log_trans, |e| e.to);
            for (c, le) in cur.iter_mut().zip(&st.log_emit) {
                *c += le;
            }
            alpha.push(cur);
        }
        alpha
    }

    /// Log backward values; `beta[last][i] = 0`.
    pub fn backward(&self) -> Vec<Vec<f64>> {
        let n = self.stages.len();
        let mut beta: Vec<Vec<f64>> = vec![Vec::new(); n];
        beta[n - 1] = vec![0.0; self.stages[n - 1].states.len()];
        for j in (1..n).rev() {
            let st = &self.stages[j];
            let next = &beta[j];
            let mut cur = vec![f64::NEG_INFINITY; self.stages[j - 1].states.len()];
            log_sum_edges(
                &st.edges,
                &mut cur,
                |e| e.log_trans + st.log_emit[e.to as usize] + next[e.to as usize],
                |e| e.from,
            );
            beta[j - 1] = cur;
        }
        beta
    }

    /// Best path as per-stage slot indices plus its log score. Among equal-scoring
    /// predecessors (and final states) the smallest state id wins.
    pub fn viterbi(&self) -> Option<(Vec<u32>, f64)> {
        let n = self.stages.len();
        let mut score: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut back: Vec<Vec<u32>> = Vec::with_capacity(n);
        score.push(vec![0.0]);
        back.push(vec![0]);
        for j in 1..n {
            let st = &self.stages[j];
            let prev_states = &self.stages[j - 1].states;
            let prev = &score[j - 1];
            let mut best = vec![f64::NEG_INFINITY; st.states.len()];
            let mut arg = vec![u32::MAX; st.states.len()];
            for e in &st.edges {
                let v = prev[e.from as usize] + e.log_trans;
                let t = e.to as usize;
                let better = v > best[t]
                    || (v == best[t]
                        && v > f64::NEG_INFINITY
                        && prev_states[e.from as usize] < prev_states[arg[t] as usize]);
                if better {
                    best[t] = v;
                    arg[t] = e.from;
                }
            }
            for (b, le) in best.iter_mut().zip(&st.log_emit) {
                *b += le;
            }
            score.push(best);
            back.push(arg);
        }
        let last = &self.stages[n - 1].states;
        let mut end: Option<usize> = None;
        for (i, &s) in score[n - 1].iter().enumerate() {
            if s == f64::NEG_INFINITY {
                continue;
            }
            end = match end {
                None => Some(i),
                Some(b) if s > score[n - 1][b] || (s == score[n - 1][b] && last[i] < last[b]) => Some(i),
                keep => keep,
            };
        }
        let end = end?;
        let total = score[n - 1][end];
        let mut slots = vec![0u32; n];
        slots[n - 1] = end as u32;
        for j in (1..n).rev() {
            slots[j - 1] = back[j][slots[j] as usize];
        }
        Some((slots, total))
    }
}

/// `out[key(e)] = log Σ exp(val(e))` over edges, with a max shift per target.
fn log_sum_edges(edges: &[Edge], out: &mut [f64], val: impl Fn(&Edge) -> f64, key: impl Fn(&Edge) -> u32) {
    let mut max = vec![f64::NEG_INFINITY; out.len()];
    for e in edges {
        let v = val(e);
        let m = &mut max[key(e) as usize];
        if v > *m {
            *m = v;
        }
    }
    let mut acc = vec![0.0f64; out.len()];
    for e in edges {
        let i = key(e) as usize;
        if max[i] > f64::NEG_INFINITY {
            acc[i] += (val(e) - max[i]).exp();
        }
    }
    for i in 0..out.len() {
        out[i] = if max[i] == f64::NEG_INFINITY { f64::NEG_INFINITY } else { max[i] + acc[i].ln() };
    }
}

pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
