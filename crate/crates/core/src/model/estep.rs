use std::collections::HashMap;

use crate::index::{StateId, StateSpace};
use crate::model::{EmissionTable, HmmParams, Trellis};
use crate::seq::Read;

/// Expected counts accumulated by the E-step. Addition is associative and commutative up to
/// floating-point reassociation.
#[derive(Debug, Clone, PartialEq)]
pub struct SuffStats {
    /// Expected number of `s -> s + b` transitions, keyed by source state.
    pub exp_trans: HashMap<StateId, [f64; 4]>,
    /// `exp_confusion[e][true][called]`.
    pub exp_confusion: Vec<[[f64; 4]; 4]>,
    /// `exp_qual[e][j][q - 1]`, `j = 1` when the call disagrees with the true base.
    pub exp_qual: Vec<[Vec<f64>; 2]>,
    pub loglik: f64,
    pub reads_used: usize,
    pub reads_dead: usize,
}

impl SuffStats {
    pub fn new(n_emit: usize, qmax: u8) -> Self {
        let z = vec![0.0; qmax as usize];
        SuffStats {
            exp_trans: HashMap::new(),
            exp_confusion: vec![[[0.0; 4]; 4]; n_emit],
            exp_qual: vec![[z.clone(), z]; n_emit],
            loglik: 0.0,
            reads_used: 0,
            reads_dead: 0,
        }
    }

    pub fn for_params(p: &HmmParams) -> Self {
        Self::new(p.n_emissions(), p.qmax)
    }

    pub fn merge(&mut self, other: &SuffStats) {
        for (s, c) in &other.exp_trans {
            let e = self.exp_trans.entry(*s).or_insert([0.0; 4]);
            for b in 0..4 {
                e[b] += c[b];
            }
        }
        for (a, b) in self.exp_confusion.iter_mut().zip(&other.exp_confusion) {
            for t in 0..4 {
                for c in 0..4 {
                    a[t][c] += b[t][c];
                }
            }
        }
        for (a, b) in self.exp_qual.iter_mut().zip(&other.exp_qual) {
            for j in 0..2 {
                for (x, y) in a[j].iter_mut().zip(&b[j]) {
                    *x += y;
                }
            }
        }
        self.loglik += other.loglik;
        self.reads_used += other.reads_used;
        self.reads_dead += other.reads_dead;
    }

    /// Total expected transitions (one unit per trellis stage per contributing read).
    pub fn total_transitions(&self) -> f64 {
        self.exp_trans.values().flat_map(|c| c.iter()).sum()
    }
}

/// Per-read diagnostics from one forward-backward pass.
#[derive(Debug, Clone)]
pub struct ReadStats {
    pub loglik: f64,
    pub backward_loglik: f64,
    /// Posterior mass summed over the live states of each stage `1..`.
    pub stage_mass: Vec<f64>,
}

/// Forward-backward for one N-free read starting from `initial`; adds its expected counts to
/// `stats`. Returns `Err(stage)` when the trellis dies, in which case nothing is added except
/// the dead-read tally.
pub fn accumulate_read(
    params: &HmmParams,
    table: &EmissionTable,
    space: &StateSpace,
    read: &Read,
    initial: StateId,
    stats: &mut SuffStats,
) -> Result<ReadStats, usize> {
    let trellis = match Trellis::build(&read.bases, &read.quals, space, params, table, initial, Some(params.d)) {
        Ok(t) => t,
        Err(stage) => {
            stats.reads_dead += 1;
            return Err(stage);
        }
    };
    let alpha = trellis.forward();
    let beta = trellis.backward();
    let n = trellis.len();
    let ll = crate::model::trellis::log_sum_exp(&alpha[n - 1]);
    if !ll.is_finite() {
        stats.reads_dead += 1;
        return Err(n - 1);
    }
    let k = space.k();
    let mut stage_mass = Vec::with_capacity(n - 1);
    for j in 1..n {
        let st = &trellis.stages[j];
        let prev_states = &trellis.stages[j - 1].states;
        for e in &st.edges {
            let lp = alpha[j - 1][e.from as usize] + e.log_trans + st.log_emit[e.to as usize] + beta[j][e.to as usize] - ll;
            if lp == f64::NEG_INFINITY {
                continue;
            }
            let row = stats.exp_trans.entry(prev_states[e.from as usize]).or_insert([0.0; 4]);
            row[e.base as usize] += lp.exp();
        }
        let pos = k + j - 1;
        let called = read.bases[pos].code().expect("training reads must be N-free") as usize;
        let q = (read.quals[pos].clamp(1, params.qmax) - 1) as usize;
        let e = j - 1;
        let mut mass = 0.0;
        for (i, &s) in st.states.iter().enumerate() {
            let g = (alpha[j][i] + beta[j][i] - ll).exp();
            if g == 0.0 {
                continue;
            }
            mass += g;
            let tb = (space.bits(s) & 3) as usize;
            stats.exp_confusion[e][tb][called] += g;
            stats.exp_qual[e][usize::from(tb != called)][q] += g;
        }
        stage_mass.push(mass);
    }
    stats.loglik += ll;
    stats.reads_used += 1;
    Ok(ReadStats { loglik: ll, backward_loglik: beta[0][0], stage_mass })
}

/// Expected counts and log-likelihood `log P(x_{k+1..L}, y_{k+1..L} | s_k = initial)` for one read.
pub fn e_step_read(
    params: &HmmParams,
    space: &StateSpace,
    read: &Read,
    initial: StateId,
) -> Result<(SuffStats, ReadStats), usize> {
    let table = params.emission_table();
    let mut stats = SuffStats::for_params(params);
    let rs = accumulate_read(params, &table, space, read, initial, &mut stats)?;
    Ok((stats, rs))
}
