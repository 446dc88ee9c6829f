use crate::index::StateSpace;
use crate::seq::Base;

/// All model parameters. Transition rows are indexed by state id of the accompanying
/// [`StateSpace`]; emission tables by emission index `e = t - k - 1` for 1-based read
/// position `t` in `k+1..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct HmmParams {
    pub k: usize,
    pub d: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub read_len: usize,
    pub qmax: u8,
    /// `trans[s][b]` = p(b | s).
    pub trans: Vec<[f64; 4]>,
    /// `confusion[e][true][called]` = g_t(called | true); each `[true]` row sums to one.
    pub confusion: Vec<[[f64; 4]; 4]>,
    /// `qual[e][j][q - 1]`, `j = 0` for a correct call and `1` for an erroneous one.
    pub qual: Vec<[Vec<f64>; 2]>,
}

/// Starting point for EM: transition rows from succession counts, flat emissions.
pub fn init_params(space: &StateSpace, read_len: usize, qmax: u8, d: usize, gamma: f64, lambda: f64) -> HmmParams {
    let k = space.k();
    assert!(read_len > k, "read length must exceed k");
    assert!(qmax >= 1);
    let trans = (0..space.len() as u32)
        .map(|id| {
            let c = space.succ_counts(id);
            let tot: u64 = c.iter().sum();
            if tot == 0 {
                [0.25; 4]
            } else {
                c.map(|x| x as f64 / tot as f64)
            }
        })
        .collect();
    let n_emit = read_len - k;
    let flat_q = vec![1.0 / qmax as f64; qmax as usize];
    HmmParams {
        k,
        d,
        gamma,
        lambda,
        read_len,
        qmax,
        trans,
        confusion: vec![[[0.25; 4]; 4]; n_emit],
        qual: vec![[flat_q.clone(), flat_q]; n_emit],
    }
}

/// One term of the approximate-l0 penalty: 0 at p = 0, 1 at p = 1.
#[inline]
pub fn penalty_term(p: f64, gamma: f64) -> f64 {
    (p / gamma).ln_1p() / (1.0 / gamma).ln_1p()
}

impl HmmParams {
    pub fn n_emissions(&self) -> usize {
        self.read_len - self.k
    }

    /// `log[q_{t,j}(qual) g_t(called | true_base)]` at 1-based position `t`.
    pub fn emission_log_prob(&self, t: usize, called: Base, qual: u8, true_base: Base) -> f64 {
        assert!(t > self.k && t <= self.read_len, "position {t} outside k+1..=L");
        let e = t - self.k - 1;
        let tb = true_base.code().expect("true base must not be N") as usize;
        let q = self.qual_index(qual);
        match called.code() {
            Some(c) => {
                let j = usize::from(c as usize != tb);
                (self.qual[e][j][q] * self.confusion[e][tb][c as usize]).ln()
            }
            None => (self.qual[e][1][q] * 0.25).ln(),
        }
    }

    #[inline]
    fn qual_index(&self, qual: u8) -> usize {
        (qual.clamp(1, self.qmax) - 1) as usize
    }

    /// J(θ): the penalty summed over every (state, base) pair.
    pub fn penalty(&self) -> f64 {
        self.trans
            .iter()
            .flat_map(|row| row.iter())
            .map(|&p| penalty_term(p, self.gamma))
            .sum()
    }

    pub fn nonzero_transitions(&self) -> usize {
        self.trans.iter().flat_map(|r| r.iter()).filter(|p| **p > 0.0).count()
    }

    /// Sum of `p(last base of s | predecessor)` over predecessors of `s` present in `space`.
    pub fn incoming_mass(&self, space: &StateSpace, s: u32) -> f64 {
        let km = space.kmer(s);
        let last = km.last_base().code().unwrap() as usize;
        (0..4u8)
            .filter_map(|b| space.id_of(km.predecessor(b)))
            .map(|pred| self.trans[pred as usize][last])
            .sum()
    }

    pub fn emission_table(&self) -> EmissionTable {
        EmissionTable::new(self)
    }
}

/// Natural-log emission factors, precomputed per position.
#[derive(Debug, Clone)]
pub struct EmissionTable {
    qmax: u8,
    log_conf: Vec<[[f64; 4]; 4]>,
    log_qual: Vec<[Vec<f64>; 2]>,
}

const LN_QUARTER: f64 = -std::f64::consts::LN_2 * 2.0;

impl EmissionTable {
    pub fn new(p: &HmmParams) -> Self {
        let log_conf = p.confusion.iter().map(|m| m.map(|row| row.map(f64::ln))).collect();
        let log_qual = p
            .qual
            .iter()
            .map(|[a, b]| [a.iter().map(|x| x.ln()).collect(), b.iter().map(|x| x.ln()).collect()])
            .collect();
        EmissionTable { qmax: p.qmax, log_conf, log_qual }
    }

    /// Log emission at emission index `e` for a state whose last base has code `true_code`.
    #[inline]
    pub fn log_emit(&self, e: usize, called: Base, qual: u8, true_code: u8) -> f64 {
        let q = (qual.clamp(1, self.qmax) - 1) as usize;
        match called.code() {
            Some(c) => {
                let j = usize::from(c != true_code);
                self.log_qual[e][j][q] + self.log_conf[e][true_code as usize][c as usize]
            }
            None => self.log_qual[e][1][q] + LN_QUARTER,
        }
    }
}
