//! Per-position distributions of Phred quality scores.

use rand::Rng;

use crate::seq::MAX_QUAL;
use crate::{Error, Result};

/// Ratio between consecutive weights of the high-quality mode, counting down from `Qmax`.
const HIGH_RATIO: f64 = 0.1;
/// Number of quality values in the high-quality mode.
const HIGH_SPAN: u8 = 8;
/// Low-quality tail, uniform over these scores.
const TAIL: std::ops::RangeInclusive<u8> = 2..=12;

#[derive(Debug, Clone, PartialEq)]
pub struct QualityModel {
    /// `pmf[t][q - 1]` for read position `t` (0-based), `q` in `1..=qmax`.
    pmf: Vec<Vec<f64>>,
    cdf: Vec<Vec<f64>>,
}

/// `10^(-q/10)`.
pub fn phred_error(q: u8) -> f64 {
    10f64.powf(-f64::from(q) / 10.0)
}

impl QualityModel {
    pub fn new(pmf: Vec<Vec<f64>>) -> Result<Self> {
        if pmf.is_empty() {
            return Err(Error::Config("quality model needs at least one position".into()));
        }
        let qmax = pmf[0].len();
        if qmax == 0 || qmax > MAX_QUAL as usize {
            return Err(Error::Config(format!("quality model range 1..={qmax} outside 1..={MAX_QUAL}")));
        }
        for (t, row) in pmf.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if row.len() != qmax || row.iter().any(|p| !(*p >= 0.0 && p.is_finite())) || (sum - 1.0).abs() > 1e-10 {
                return Err(Error::Config(format!("quality distribution at position {} is not a probability vector", t + 1)));
            }
        }
        let cdf = pmf
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                row.iter().map(|p| {
                    acc += p;
                    acc
                }).collect()
            })
            .collect();
        Ok(QualityModel { pmf, cdf })
    }

    /// Every base gets quality `q`.
    pub fn constant(read_len: usize, q: u8) -> Result<Self> {
        if q == 0 || q > MAX_QUAL {
            return Err(Error::Config(format!("quality {q} outside 1..={MAX_QUAL}")));
        }
        let mut row = vec![0.0; q as usize];
        row[q as usize - 1] = 1.0;
        QualityModel::new(vec![row; read_len])
    }

    pub fn read_len(&self) -> usize {
        self.pmf.len()
    }

    pub fn qmax(&self) -> u8 {
        self.pmf[0].len() as u8
    }

    pub fn pmf(&self, t: usize) -> &[f64] {
        &self.pmf[t]
    }

    /// Mean over positions of `E[10^(-q/10)]`.
    pub fn implied_error_rate(&self) -> f64 {
        let total: f64 = self
            .pmf
            .iter()
            .map(|row| row.iter().enumerate().map(|(i, p)| p * phred_error(i as u8 + 1)).sum::<f64>())
            .sum();
        total / self.pmf.len() as f64
    }

    pub fn sample<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> u8 {
        let u: f64 = rng.gen();
        let cdf = &self.cdf[t];
        let i = cdf.partition_point(|c| *c <= u).min(cdf.len() - 1);
        // skip zero-mass scores that share a cumulative value with their predecessor
        let i = (i..cdf.len()).find(|&j| self.pmf[t][j] > 0.0).unwrap_or(i);
        i as u8 + 1
    }
}

/// Mixture of a sharp high-quality mode just below `qmax` and a uniform low-quality tail whose
/// weight grows linearly along the read. The tail weight is solved so that the implied mean
/// error rate equals `target_error_rate`.
pub fn default_quality_model(read_len: usize, qmax: u8, target_error_rate: f64) -> Result<QualityModel> {
    if read_len == 0 {
        return Err(Error::Config("read length must be positive".into()));
    }
    if !(target_error_rate > 0.0 && target_error_rate < 0.75) {
        return Err(Error::Config(format!("target error rate {target_error_rate} outside (0, 0.75)")));
    }
    if qmax < *TAIL.end() + HIGH_SPAN || qmax > MAX_QUAL {
        return Err(Error::Config(format!(
            "qmax {qmax} must lie in {}..={MAX_QUAL} for the default quality model",
            TAIL.end() + HIGH_SPAN
        )));
    }
    let q = qmax as usize;
    let mut high = vec![0.0; q];
    let mut w = 1.0;
    for i in 0..HIGH_SPAN as usize {
        high[q - 1 - i] = w;
        w *= HIGH_RATIO;
    }
    let hs: f64 = high.iter().sum();
    high.iter_mut().for_each(|p| *p /= hs);
    let mut tail = vec![0.0; q];
    let tail_n = (TAIL.end() - TAIL.start() + 1) as f64;
    for s in TAIL {
        tail[s as usize - 1] = 1.0 / tail_n;
    }
    let rate = |row: &[f64]| row.iter().enumerate().map(|(i, p)| p * phred_error(i as u8 + 1)).sum::<f64>();
    let (e_high, e_tail) = (rate(&high), rate(&tail));

    // tail weight at position t is w0 * g(t), with g ramping from 0.5 to 1.5
    let g: Vec<f64> = (0..read_len)
        .map(|t| if read_len == 1 { 1.0 } else { 0.5 + t as f64 / (read_len - 1) as f64 })
        .collect();
    let g_mean = g.iter().sum::<f64>() / read_len as f64;
    let w0 = (target_error_rate - e_high) / (g_mean * (e_tail - e_high));
    let g_max = g.iter().cloned().fold(0.0, f64::max);
    if w0 < 0.0 || w0 * g_max > 1.0 {
        return Err(Error::Config(format!(
            "target error rate {target_error_rate} not reachable with qmax {qmax} (feasible range {e_high:.3e}..{:.3e})",
            e_high + (e_tail - e_high) * g_mean / g_max
        )));
    }
    let pmf = g
        .iter()
        .map(|gt| {
            let wt = w0 * gt;
            high.iter().zip(&tail).map(|(h, l)| (1.0 - wt) * h + wt * l).collect::<Vec<f64>>()
        })
        .map(|mut row: Vec<f64>| {
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|p| *p /= s);
            row
        })
        .collect();
    QualityModel::new(pmf)
}
