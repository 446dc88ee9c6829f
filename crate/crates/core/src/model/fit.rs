use std::sync::OnceLock;

use rayon::prelude::*;

use crate::decode::pick_initial_state;
use crate::index::{NeighborhoodIndex, StateSpace};
use crate::model::estep::{accumulate_read, SuffStats};
use crate::model::mstep::{m_step_emissions, m_step_transitions, row_objective};
use crate::model::params::{init_params, HmmParams};
use crate::model::Model;
use crate::seq::{Read, MAX_QUAL};
use crate::{Error, Result};

/// Probabilities below `ZERO_SNAP * gamma` are set to exactly zero after each M-step.
const ZERO_SNAP: f64 = 1e-8;

/// Reads per work unit. Stats are merged in unit order, so results do not depend on threads.
const CHUNK: usize = 256;

#[derive(Debug, Clone)]
pub struct FitConfig {
    pub d: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub max_iters: usize,
    /// Relative change of the penalized objective below which EM stops.
    pub tol: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig { d: 4, gamma: 1e-4, lambda: 250.0, max_iters: 30, tol: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub loglik: f64,
    pub penalty: f64,
    pub objective: f64,
    pub nonzero: usize,
    pub states: usize,
    pub reads_used: usize,
    pub reads_dead: usize,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: Model,
    pub trace: Vec<TraceRow>,
    /// Reads excluded up front (contain N or have a different length).
    pub reads_excluded: usize,
}

/// Penalized Baum-Welch. Read length is taken from the first read; the quality ceiling is the
/// largest observed score, capped at [`MAX_QUAL`].
pub fn fit(reads: &[Read], space: StateSpace, cfg: &FitConfig) -> Result<FitResult> {
    if cfg.gamma <= 0.0 || cfg.lambda < 0.0 || cfg.tol < 0.0 || cfg.max_iters == 0 {
        return Err(Error::Config("fit needs gamma > 0, lambda >= 0, tol >= 0, max_iters >= 1".into()));
    }
    let k = space.k();
    let read_len = reads.first().map(|r| r.len()).ok_or(Error::NoTrainableReads)?;
    if read_len <= k {
        return Err(Error::Config(format!("read length {read_len} must exceed k = {k}")));
    }
    let train: Vec<&Read> = reads.iter().filter(|r| r.len() == read_len && !r.has_n()).collect();
    if train.is_empty() {
        return Err(Error::NoTrainableReads);
    }
    let qmax = train.iter().map(|r| r.max_qual()).max().unwrap_or(1).clamp(1, MAX_QUAL);

    let mut space = space;
    let mut params = init_params(&space, read_len, qmax, cfg.d, cfg.gamma, cfg.lambda);
    let mut trace: Vec<TraceRow> = Vec::new();

    for iteration in 0..cfg.max_iters {
        let stats = e_step_all(&train, &space, &params);
        if stats.reads_used == 0 {
            return Err(Error::NoTrainableReads);
        }
        let pen = params.penalty();
        let objective = stats.loglik - cfg.lambda * pen;
        let converged = trace
            .last()
            .is_some_and(|prev| (objective - prev.objective) < cfg.tol * prev.objective.abs());
        trace.push(TraceRow {
            iteration,
            loglik: stats.loglik,
            penalty: pen,
            objective,
            nonzero: params.nonzero_transitions(),
            states: space.len(),
            reads_used: stats.reads_used,
            reads_dead: stats.reads_dead,
        });
        if converged || iteration + 1 == cfg.max_iters {
            break;
        }
        m_step(&mut params, &stats);
        (space, params) = prune_states(&space, &params);
    }
    Ok(FitResult { model: Model { space, params }, trace, reads_excluded: reads.len() - train.len() })
}

fn e_step_all(train: &[&Read], space: &StateSpace, params: &HmmParams) -> SuffStats {
    let table = params.emission_table();
    let nbhd: OnceLock<NeighborhoodIndex<'_>> = OnceLock::new();
    let k = space.k();
    let parts: Vec<SuffStats> = train
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut s = SuffStats::for_params(params);
            for read in chunk {
                let first = read.kmers(k)[0].expect("training reads are N-free");
                let init = match space.id(first) {
                    Some(id) => Some(id),
                    None => pick_initial_state(first, space, params, nbhd.get_or_init(|| NeighborhoodIndex::new(space, params.d))),
                };
                match init {
                    Some(id) => {
                        let _ = accumulate_read(params, &table, space, read, id, &mut s);
                    }
                    None => s.reads_dead += 1,
                }
            }
            s
        })
        .collect();
    let mut total = SuffStats::for_params(params);
    for p in &parts {
        total.merge(p);
    }
    total
}

fn m_step(params: &mut HmmParams, stats: &SuffStats) {
    let (lambda, gamma) = (params.lambda, params.gamma);
    params.trans.par_iter_mut().enumerate().for_each(|(s, row)| {
        let Some(c) = stats.exp_trans.get(&(s as u32)) else { return };
        if c.iter().sum::<f64>() <= 0.0 {
            return;
        }
        let new = m_step_transitions(c, lambda, gamma);
        // generalized EM: never accept a row that scores worse than the current one
        if row_objective(&new, c, lambda, gamma) >= row_objective(row, c, lambda, gamma) {
            *row = new;
        }
        snap_small(row, gamma);
    });
    let em = m_step_emissions(stats);
    params.confusion = em.confusion;
    params.qual = em.qual;
}

fn snap_small(row: &mut [f64; 4], gamma: f64) {
    let floor = ZERO_SNAP * gamma;
    if row.iter().all(|p| *p == 0.0 || *p >= floor) {
        return;
    }
    for p in row.iter_mut() {
        if *p < floor {
            *p = 0.0;
        }
    }
    let s: f64 = row.iter().sum();
    for p in row.iter_mut() {
        *p /= s;
    }
}

/// Drop states that are isolated under the current transitions: no positive-probability edge
/// enters them from another state and none leaves them towards another state of the space.
pub fn prune_states(space: &StateSpace, params: &HmmParams) -> (StateSpace, HmmParams) {
    let n = space.len();
    let mut linked = vec![false; n];
    for s in 0..n as u32 {
        for b in 0..4u8 {
            if params.trans[s as usize][b as usize] > 0.0 {
                if let Some(t) = space.successor(s, b) {
                    if t != s {
                        linked[s as usize] = true;
                        linked[t as usize] = true;
                    }
                }
            }
        }
    }
    if linked.iter().all(|x| *x) {
        return (space.clone(), params.clone());
    }
    let (pruned, _) = space.restrict(&linked);
    let mut p = params.clone();
    p.trans = params.trans.iter().zip(&linked).filter(|(_, k)| **k).map(|(r, _)| *r).collect();
    (pruned, p)
}
