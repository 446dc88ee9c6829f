#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use readhmm::index::{StateId, StateSpace};
use readhmm::model::{init_params, HmmParams};
use readhmm::seq::{packed_windows, Base, Kmer, Read};

pub const TOY_QMAX: u8 = 6;

pub struct Toy {
    pub space: StateSpace,
    pub params: HmmParams,
    pub read: Read,
    pub initial: StateId,
}

fn random_bases(rng: &mut ChaCha8Rng, n: usize) -> Vec<Base> {
    (0..n).map(|_| Base::from_code(rng.gen_range(0..4))).collect()
}

fn weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Small random model (k in 3..=5, L <= 12, at most 30 states) with a read sampled from it.
pub fn toy(rng: &mut ChaCha8Rng) -> Toy {
    let k = rng.gen_range(3..=5);
    let len = rng.gen_range(k + 2..=12);
    let backbone = random_bases(rng, k + 10);
    let mut kmers: Vec<u64> = Vec::new();
    let push = |bases: &[Base], kmers: &mut Vec<u64>| {
        for w in packed_windows(bases, k).into_iter().flatten() {
            if !kmers.contains(&w) && kmers.len() < 30 {
                kmers.push(w);
            }
        }
    };
    push(&backbone, &mut kmers);
    for _ in 0..3 {
        let mut v = backbone.clone();
        for _ in 0..2 {
            let i = rng.gen_range(0..v.len());
            v[i] = Base::from_code(rng.gen_range(0..4));
        }
        push(&v, &mut kmers);
    }
    // grow branches off existing states
    let mask = (1u64 << (2 * k)) - 1;
    while kmers.len() < 30 {
        let from = kmers[rng.gen_range(0..kmers.len())];
        let next = ((from << 2) | rng.gen_range(0..4u64)) & mask;
        if !kmers.contains(&next) {
            kmers.push(next);
        }
    }
    let first = kmers[0];
    let space = StateSpace::from_kmers(k, kmers);
    let initial = space.id(first).unwrap();

    let mut params = init_params(&space, len, TOY_QMAX, k, 1e-4, 0.0);
    for s in 0..space.len() as StateId {
        let mut row = [0.0; 4];
        for b in 0..4u8 {
            let in_k = space.successor(s, b).is_some();
            if (in_k && rng.gen_bool(0.8)) || (!in_k && rng.gen_bool(0.3)) {
                row[b as usize] = rng.gen_range(0.05..1.0);
            }
        }
        if row.iter().all(|p| *p == 0.0) {
            row[rng.gen_range(0..4)] = 1.0;
        }
        let sum: f64 = row.iter().sum();
        params.trans[s as usize] = row.map(|p| p / sum);
    }
    for m in params.confusion.iter_mut() {
        for row in m.iter_mut() {
            let w = weights(rng, 4);
            row.copy_from_slice(&w);
        }
    }
    for pair in params.qual.iter_mut() {
        for pmf in pair.iter_mut() {
            *pmf = weights(rng, TOY_QMAX as usize);
        }
    }

    // true sequence: a walk through positive transitions, then noisy calls
    let mut truth = Kmer::from_bits(first, k).decode();
    let mut state = Some(initial);
    while truth.len() < len {
        let options: Vec<u8> = match state {
            Some(s) => (0..4u8)
                .filter(|&b| params.trans[s as usize][b as usize] > 0.0 && space.successor(s, b).is_some())
                .collect(),
            None => Vec::new(),
        };
        let b = options.choose(rng).copied().unwrap_or_else(|| rng.gen_range(0..4));
        state = state.and_then(|s| space.successor(s, b));
        truth.push(Base::from_code(b));
    }
    let bases: Vec<Base> = truth
        .iter()
        .map(|&b| if rng.gen_bool(0.25) { Base::from_code(rng.gen_range(0..4)) } else { b })
        .collect();
    let quals = (0..len).map(|_| rng.gen_range(1..=TOY_QMAX)).collect();
    Toy { space, params, read: Read::new("toy", bases, quals), initial }
}

/// Every positive-probability path from the initial state, with its natural-log joint score.
pub fn enumerate_paths(t: &Toy) -> Vec<(Vec<StateId>, f64)> {
    let k = t.space.k();
    let n = t.read.len() - k;
    let mut out = Vec::new();
    let mut path = vec![t.initial];
    fn rec(t: &Toy, k: usize, n: usize, path: &mut Vec<StateId>, score: f64, out: &mut Vec<(Vec<StateId>, f64)>) {
        let j = path.len();
        if j == n + 1 {
            out.push((path.clone(), score));
            return;
        }
        let s = *path.last().unwrap();
        let pos = k + j - 1;
        for b in 0..4u8 {
            let p = t.params.trans[s as usize][b as usize];
            let Some(next) = t.space.successor(s, b) else { continue };
            if p <= 0.0 {
                continue;
            }
            let le = t.params.emission_log_prob(pos + 1, t.read.bases[pos], t.read.quals[pos], Base::from_code(b));
            if le == f64::NEG_INFINITY {
                continue;
            }
            path.push(next);
            rec(t, k, n, path, score + p.ln() + le, out);
            path.pop();
        }
    }
    rec(t, k, n, &mut path, 0.0, &mut out);
    out
}

pub fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}
