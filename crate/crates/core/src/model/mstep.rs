//! M-step updates.
//!
//! Each transition row solves
//!
//! ```text
//! maximize   Σ_b c_b ln p_b  -  λ' Σ_b ln(1 + p_b / γ)      λ' = λ / ln(1 + 1/γ)
//! subject to p on the probability simplex
//! ```
//!
//! Components with `c_b = 0` sit at exactly zero. On the remaining support the optimum is a
//! stationary point of the Lagrangian, where every component satisfies
//! `c/p - λ'/(p + γ) = μ` for a shared multiplier `μ`, i.e. the quadratic
//! `μ p² + (μγ - c + λ') p - cγ = 0`. For `μ > 0` each quadratic has one positive root and the
//! row sum is strictly decreasing in `μ`, so bisection finds the unique solution. When
//! `Σc < mλ'` the multiplier may be negative, each component can sit on either of two roots,
//! and the objective is no longer concave; every root assignment is then solved separately and
//! the best stationary point wins.

use crate::model::estep::SuffStats;

/// Penalized objective of one row. `-inf` when a component with positive count is zero.
pub fn row_objective(p: &[f64; 4], c: &[f64; 4], lambda: f64, gamma: f64) -> f64 {
    let lp = lambda / (1.0 / gamma).ln_1p();
    let mut f = 0.0;
    for b in 0..4 {
        if c[b] > 0.0 {
            f += c[b] * p[b].ln();
        }
        f -= lp * (p[b] / gamma).ln_1p();
    }
    f
}

/// Solve one transition row. `Σc = 0` yields the uniform row.
pub fn m_step_transitions(c: &[f64; 4], lambda: f64, gamma: f64) -> [f64; 4] {
    assert!(c.iter().all(|x| *x >= 0.0 && x.is_finite()), "counts must be finite and non-negative");
    assert!(lambda >= 0.0 && gamma > 0.0);
    let total: f64 = c.iter().sum();
    if total <= 0.0 {
        return [0.25; 4];
    }
    if lambda == 0.0 {
        return c.map(|x| x / total);
    }
    let support: Vec<usize> = (0..4).filter(|&b| c[b] > 0.0).collect();
    if support.len() == 1 {
        let mut p = [0.0; 4];
        p[support[0]] = 1.0;
        return p;
    }
    let lp = lambda / (1.0 / gamma).ln_1p();
    let comps: Vec<Comp> = support.iter().map(|&b| Comp::new(c[b], lp, gamma)).collect();
    let m = comps.len() as f64;
    let mu_lo = total - m * lp;
    let mu_hi = total;

    let mut best: Option<([f64; 4], f64)> = None;
    let mut consider = |vals: &[f64]| {
        let s: f64 = vals.iter().sum();
        let mut p = [0.0; 4];
        for (i, &b) in support.iter().enumerate() {
            p[b] = vals[i] / s;
        }
        let f = row_objective(&p, c, lambda, gamma);
        if f.is_finite() && best.is_none_or(|(_, bf)| f > bf) {
            best = Some((p, f));
        }
    };

    // the unpenalized point is always feasible
    consider(&support.iter().map(|&b| c[b]).collect::<Vec<_>>());

    if mu_lo > 0.0 {
        let assign = vec![false; comps.len()];
        if let Some(mu) = bisect(&comps, &assign, mu_lo, mu_hi) {
            consider(&roots_at(&comps, &assign, mu));
        }
    } else {
        for mask in 0..(1u32 << comps.len()) {
            let assign: Vec<bool> = (0..comps.len()).map(|i| mask & (1 << i) != 0).collect();
            for mu in scan_roots(&comps, &assign, mu_lo, mu_hi) {
                consider(&roots_at(&comps, &assign, mu));
            }
        }
    }
    best.expect("at least the ratio point is finite").0
}

#[derive(Clone, Copy)]
struct Comp {
    c: f64,
    lp: f64,
    gamma: f64,
    /// Smallest multiplier at which a root exists (`-inf`-free only when λ' > c).
    mu_min: f64,
    p_turn: f64,
}

impl Comp {
    fn new(c: f64, lp: f64, gamma: f64) -> Self {
        if lp > c {
            let p_turn = gamma / ((lp / c).sqrt() - 1.0);
            let mu_min = c / p_turn - lp / (p_turn + gamma);
            Comp { c, lp, gamma, mu_min, p_turn }
        } else {
            Comp { c, lp, gamma, mu_min: 0.0, p_turn: f64::INFINITY }
        }
    }

    /// Small (`large = false`) or large root of the stationarity quadratic at multiplier `mu`.
    fn root(&self, mu: f64, large: bool) -> Option<f64> {
        let Comp { c, lp, gamma, .. } = *self;
        let b = mu * gamma - c + lp;
        if mu > 0.0 {
            if large {
                return None;
            }
            let disc = b * b + 4.0 * mu * c * gamma;
            return Some(if b >= 0.0 { 2.0 * c * gamma / (b + disc.sqrt()) } else { (-b + disc.sqrt()) / (2.0 * mu) });
        }
        if mu == 0.0 {
            return if !large && b > 0.0 { Some(c * gamma / b) } else { None };
        }
        if b <= 0.0 || mu < self.mu_min {
            return None;
        }
        if mu == self.mu_min {
            return Some(self.p_turn);
        }
        let disc = (b * b + 4.0 * mu * c * gamma).max(0.0);
        let sq = disc.sqrt();
        Some(if large { (b + sq) / (-2.0 * mu) } else { 2.0 * c * gamma / (b + sq) })
    }
}

fn roots_at(comps: &[Comp], assign: &[bool], mu: f64) -> Vec<f64> {
    comps.iter().zip(assign).map(|(c, &l)| c.root(mu, l).unwrap()).collect()
}

fn excess(comps: &[Comp], assign: &[bool], mu: f64) -> Option<f64> {
    let mut s = -1.0;
    for (c, &l) in comps.iter().zip(assign) {
        s += c.root(mu, l)?;
    }
    Some(s)
}

fn domain(comps: &[Comp], assign: &[bool], lo: f64, hi: f64) -> Option<(f64, f64)> {
    let mut a = lo;
    let mut b = hi;
    for (c, &l) in comps.iter().zip(assign) {
        a = a.max(c.mu_min);
        if l {
            b = b.min(-f64::MIN_POSITIVE);
        }
    }
    (a <= b).then_some((a, b))
}

/// Bisection for the single root of a monotone (all-small) assignment on `[lo, hi]`.
fn bisect(comps: &[Comp], assign: &[bool], lo: f64, hi: f64) -> Option<f64> {
    let (mut a, mut b) = domain(comps, assign, lo, hi)?;
    let mut fa = excess(comps, assign, a)?;
    let fb = excess(comps, assign, b)?;
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = excess(comps, assign, mid)?;
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}

const SCAN_POINTS: usize = 512;

fn scan_roots(comps: &[Comp], assign: &[bool], lo: f64, hi: f64) -> Vec<f64> {
    let Some((a, b)) = domain(comps, assign, lo, hi) else { return Vec::new() };
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..=SCAN_POINTS {
        let mu = if i == SCAN_POINTS { b } else { a + (b - a) * i as f64 / SCAN_POINTS as f64 };
        let Some(h) = excess(comps, assign, mu) else {
            prev = None;
            continue;
        };
        if h == 0.0 {
            out.push(mu);
        } else if let Some((pm, ph)) = prev {
            if ph != 0.0 && ph.signum() != h.signum() {
                if let Some(r) = bisect(comps, assign, pm, mu) {
                    out.push(r);
                }
            }
        }
        prev = Some((mu, h));
    }
    out
}

/// Position-specific confusion matrices and quality PMFs.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionParams {
    pub confusion: Vec<[[f64; 4]; 4]>,
    pub qual: Vec<[Vec<f64>; 2]>,
}

/// Weighted relative frequencies; empty rows fall back to uniform.
pub fn m_step_emissions(stats: &SuffStats) -> EmissionParams {
    let confusion = stats
        .exp_confusion
        .iter()
        .map(|m| {
            m.map(|row| {
                let s: f64 = row.iter().sum();
                if s > 0.0 {
                    row.map(|x| x / s)
                } else {
                    [0.25; 4]
                }
            })
        })
        .collect();
    let qual = stats
        .exp_qual
        .iter()
        .map(|pair| {
            pair.clone().map(|v| {
                let s: f64 = v.iter().sum();
                if s > 0.0 {
                    v.iter().map(|x| x / s).collect()
                } else {
                    vec![1.0 / v.len() as f64; v.len()]
                }
            })
        })
        .collect();
    EmissionParams { confusion, qual }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sums_to_one(p: &[f64; 4]) -> bool {
        (p.iter().sum::<f64>() - 1.0).abs() < 1e-10 && p.iter().all(|x| *x >= 0.0)
    }

    #[test]
    fn lambda_zero_is_count_ratio() {
        let c = [3.0, 0.0, 1.0, 0.0];
        assert_eq!(m_step_transitions(&c, 0.0, 1e-4), [0.75, 0.0, 0.25, 0.0]);
    }

    #[test]
    fn empty_row_is_uniform() {
        assert_eq!(m_step_transitions(&[0.0; 4], 250.0, 1e-4), [0.25; 4]);
    }

    #[test]
    fn symmetric_pair() {
        for lambda in [0.0, 10.0, 100.0, 250.0] {
            let p = m_step_transitions(&[100.0, 100.0, 0.0, 0.0], lambda, 1e-4);
            assert_eq!(p, [0.5, 0.5, 0.0, 0.0], "lambda={lambda}");
        }
    }

    #[test]
    fn symmetric_pair_breaks_under_heavy_penalty() {
        // once the count mass drops below twice the scaled penalty, one branch wins outright
        let c = [100.0, 100.0, 0.0, 0.0];
        let lambda = 2000.0;
        let p = m_step_transitions(&c, lambda, 1e-4);
        assert!(p[0] > 0.99 || p[1] > 0.99, "{p:?}");
        let half = row_objective(&[0.5, 0.5, 0.0, 0.0], &c, lambda, 1e-4);
        assert!(row_objective(&p, &c, lambda, 1e-4) > half);
    }

    #[test]
    fn penalty_collapses_small_components() {
        let c = [950.0, 40.0, 9.0, 1.0];
        let p0 = m_step_transitions(&c, 0.0, 1e-4);
        let p100 = m_step_transitions(&c, 100.0, 1e-4);
        let p250 = m_step_transitions(&c, 250.0, 1e-4);
        assert!(sums_to_one(&p100) && sums_to_one(&p250));
        assert!(p100[3] < 1e-4 && p250[3] < p100[3] && p250[3] < 1e-4 * p0[3] * 100.0);
        assert!(p250[2] < 1e-4);
        assert!(p250[0] > p0[0]);
        assert!(row_objective(&p250, &c, 250.0, 1e-4) >= row_objective(&p0, &c, 250.0, 1e-4));
    }

    #[test]
    fn sparse_data_rows_pick_the_best_stationary_point() {
        // Σc < mλ': the objective is not concave; compare against a fine 1-D scan.
        let c = [2.0, 1.0, 0.0, 0.0];
        let (lambda, gamma) = (250.0, 1e-4);
        let p = m_step_transitions(&c, lambda, gamma);
        let f = row_objective(&p, &c, lambda, gamma);
        let mut best = f64::NEG_INFINITY;
        for i in 1..200_000 {
            let x = (i as f64 / 200_000.0).powi(4);
            for q in [x, 1.0 - x] {
                best = best.max(row_objective(&[q, 1.0 - q, 0.0, 0.0], &c, lambda, gamma));
            }
        }
        assert!(f >= best - 1e-9, "{f} < {best}");
        assert!(sums_to_one(&p));
    }

    #[test]
    fn emission_normalization() {
        let mut s = SuffStats::new(2, 3);
        s.exp_confusion[0][1] = [1.0, 3.0, 0.0, 0.0];
        s.exp_qual[1][0] = vec![2.0, 2.0, 4.0];
        let e = m_step_emissions(&s);
        assert_eq!(e.confusion[0][1], [0.25, 0.75, 0.0, 0.0]);
        assert_eq!(e.confusion[0][0], [0.25; 4]);
        assert_eq!(e.qual[1][0], vec![0.25, 0.25, 0.5]);
        assert_eq!(e.qual[1][1], vec![1.0 / 3.0; 3]);
    }

    proptest! {
        #[test]
        fn transitions_form_a_distribution_that_beats_random_rows(
            c in prop::array::uniform4(prop_oneof![Just(0.0), 0.0..500.0f64]),
            lambda in 0.0..400.0f64,
            w in prop::array::uniform4(0.001..1.0f64),
        ) {
            prop_assume!(c.iter().sum::<f64>() > 0.0);
            let p = m_step_transitions(&c, lambda, 1e-4);
            prop_assert!(p.iter().all(|x| (0.0..=1.0).contains(x)));
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for b in 0..4 {
                if c[b] == 0.0 {
                    prop_assert_eq!(p[b], 0.0);
                }
            }
            // any other row on the support of c scores no better
            let s: f64 = (0..4).filter(|&b| c[b] > 0.0).map(|b| w[b]).sum();
            let q: [f64; 4] = std::array::from_fn(|b| if c[b] > 0.0 { w[b] / s } else { 0.0 });
            let (fp, fq) = (row_objective(&p, &c, lambda, 1e-4), row_objective(&q, &c, lambda, 1e-4));
            prop_assert!(fp >= fq - 1e-9 * fq.abs().max(1.0), "{p:?} {fp} vs {q:?} {fq}");
        }
    }
}
