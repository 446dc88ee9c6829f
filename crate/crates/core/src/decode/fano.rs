//! Sequential decoding over the kmer HMM with the Fano metric.
//!
//! One path is extended at a time. Each extension adds `log2 p(transition) + log2 ξ + B` to the
//! running metric; a running threshold `T`, kept at a multiple of `Δ`, decides whether the
//! decoder may move forward, must look back for an unexplored sibling, or has to lower `T`.

use std::f64::consts::LN_2;

use crate::decode::{Corrector, DecodeFailure, DecodeResult, DecodeStats};
use crate::index::{StateId, StateSpace};
use crate::model::HmmParams;
use crate::seq::Read;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoConfig {
    pub delta: f64,
    pub bias: f64,
    /// Decoder-step budget per read; `None` means `64 * (L - k)`.
    pub max_visits: Option<usize>,
}

impl FanoConfig {
    pub fn new(delta: f64, bias: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) || !bias.is_finite() {
            return Err(Error::Config(format!("fano needs delta > 0 and finite bias (delta={delta}, bias={bias})")));
        }
        Ok(FanoConfig { delta, bias, max_visits: None })
    }

    pub fn with_budget(mut self, max_visits: usize) -> Self {
        self.max_visits = Some(max_visits.max(1));
        self
    }

    fn budget(&self, moves: usize) -> usize {
        self.max_visits.unwrap_or(64 * moves.max(1))
    }
}

impl Default for FanoConfig {
    fn default() -> Self {
        FanoConfig { delta: 0.5, bias: 2.0, max_visits: None }
    }
}

/// `M_s = M_c + log2 a + log2 ξ + B`.
#[inline]
pub fn fano_metric_update(m_c: f64, log2_trans: f64, log2_emit: f64, bias: f64) -> f64 {
    m_c + log2_trans + log2_emit + bias
}

/// Largest `j` with `j * delta <= m`; the tightened threshold is `j * delta`, so
/// `T <= m < T + delta`.
pub fn tighten(m: f64, delta: f64) -> i64 {
    let mut j = (m / delta).floor() as i64;
    while (j as f64) * delta > m {
        j -= 1;
    }
    while ((j + 1) as f64) * delta <= m {
        j += 1;
    }
    j
}

impl Corrector<'_> {
    /// Successors of `state` at depth `depth`, best metric first; equal metrics in base order.
    fn fano_successors(&self, read: &Read, depth: usize, state: StateId, m_c: f64, bias: f64) -> Vec<(f64, StateId)> {
        let pos = self.space.k() + depth;
        let row = &self.params.trans[state as usize];
        let mut out: Vec<(f64, u8, StateId)> = Vec::with_capacity(4);
        for b in 0..4u8 {
            let p = row[b as usize];
            if p <= 0.0 {
                continue;
            }
            let Some(next) = self.space.successor(state, b) else { continue };
            let le = self.table.log_emit(depth, read.bases[pos], read.quals[pos], b);
            if le == f64::NEG_INFINITY {
                continue;
            }
            out.push((fano_metric_update(m_c, p.log2(), le / LN_2, bias), b, next));
        }
        out.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
        out.into_iter().map(|(m, _, s)| (m, s)).collect()
    }

    pub fn fano(&self, read: &Read, cfg: &FanoConfig, initial: StateId) -> Result<DecodeResult, DecodeFailure> {
        self.check_len(read)?;
        let moves = read.len() - self.space.k();
        let budget = cfg.budget(moves);
        let delta = cfg.delta;

        let mut path: Vec<StateId> = vec![initial];
        let mut metric: Vec<f64> = vec![0.0];
        // rank, among its siblings, of the node chosen at each depth
        let mut ranks: Vec<usize> = Vec::with_capacity(moves);
        let mut succ: Vec<Option<Vec<(f64, StateId)>>> = vec![None; moves + 1];
        let mut threshold: i64 = 0;
        let mut stats = DecodeStats::default();
        let mut rank = 0usize;

        'forward: loop {
            stats.visited += 1;
            if stats.visited > budget {
                return Err(DecodeFailure::BudgetExceeded { budget });
            }
            let depth = path.len() - 1;
            let list = succ[depth]
                .get_or_insert_with(|| self.fano_successors(read, depth, path[depth], metric[depth], cfg.bias));
            let t = threshold as f64 * delta;
            match list.get(rank) {
                Some(&(m_s, next)) if m_s >= t => {
                    let m_p = metric[depth];
                    ranks.push(rank);
                    path.push(next);
                    metric.push(m_s);
                    succ[depth + 1] = None;
                    if depth + 1 == moves {
                        return Ok(self.finish(path, m_s, stats));
                    }
                    if m_p < t + delta {
                        threshold = tighten(m_s, delta);
                    }
                    rank = 0;
                }
                _ => loop {
                    let depth = path.len() - 1;
                    let m_p = if depth == 0 { f64::NEG_INFINITY } else { metric[depth - 1] };
                    if m_p >= threshold as f64 * delta {
                        path.pop();
                        metric.pop();
                        let came_from = ranks.pop().expect("depth > 0");
                        stats.backtracks += 1;
                        let siblings = succ[depth - 1].as_ref().map_or(0, Vec::len);
                        if came_from + 1 < siblings {
                            rank = came_from + 1;
                            continue 'forward;
                        }
                        stats.visited += 1;
                        if stats.visited > budget {
                            return Err(DecodeFailure::BudgetExceeded { budget });
                        }
                    } else {
                        threshold -= 1;
                        stats.threshold_lowerings += 1;
                        rank = 0;
                        continue 'forward;
                    }
                },
            }
        }
    }
}

pub fn fano_decode(
    read: &Read,
    params: &HmmParams,
    space: &StateSpace,
    cfg: &FanoConfig,
    initial: StateId,
) -> Result<DecodeResult, DecodeFailure> {
    Corrector::new(params, space).fano(read, cfg, initial)
}
