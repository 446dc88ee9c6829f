//! Run configuration shared by the pipeline commands.

use std::fmt;
use std::str::FromStr;

use crate::decode::FanoConfig;
use crate::model::FitConfig;
use crate::seq::MAX_K;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoder {
    AViterbi,
    Fano,
}

impl FromStr for Decoder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aviterbi" | "a-viterbi" => Ok(Decoder::AViterbi),
            "fano" => Ok(Decoder::Fano),
            _ => Err(Error::Config(format!("unknown decoder {s:?} (expected aviterbi or fano)"))),
        }
    }
}

impl fmt::Display for Decoder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Decoder::AViterbi => "aviterbi",
            Decoder::Fano => "fano",
        })
    }
}

/// Where the decoder's initial state comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FirstKmerPolicy {
    /// The read's own first kmer, or its nearest state when that kmer was never observed.
    Observed,
    /// The true first kmer from a truth file (simulation studies).
    Truth,
}

impl FromStr for FirstKmerPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "observed" => Ok(FirstKmerPolicy::Observed),
            "truth" => Ok(FirstKmerPolicy::Truth),
            _ => Err(Error::Config(format!("unknown first-kmer policy {s:?} (expected observed or truth)"))),
        }
    }
}

impl fmt::Display for FirstKmerPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FirstKmerPolicy::Observed => "observed",
            FirstKmerPolicy::Truth => "truth",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub k: usize,
    pub d: usize,
    pub gamma: f64,
    pub lambda: f64,
    pub delta: f64,
    pub bias: f64,
    pub max_iters: usize,
    pub tol: f64,
    pub threads: usize,
    pub seed: u64,
    pub phred_offset: u8,
    pub decoder: Decoder,
    pub first_kmer: FirstKmerPolicy,
    /// Fano step budget per read; `None` uses the decoder default.
    pub max_visits: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k: 13,
            d: 4,
            gamma: 1e-4,
            lambda: 250.0,
            delta: 0.5,
            bias: 2.0,
            max_iters: 30,
            tol: 1e-5,
            threads: std::thread::available_parallelism().map_or(1, |n| n.get()),
            seed: 0,
            phred_offset: 33,
            decoder: Decoder::Fano,
            first_kmer: FirstKmerPolicy::Observed,
            max_visits: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.k == 0 || self.k > MAX_K {
            return fail(format!("k = {} outside 1..={MAX_K}", self.k));
        }
        if self.d > self.k {
            return fail(format!("d = {} exceeds k = {}", self.d, self.k));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return fail(format!("gamma = {} must be positive", self.gamma));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda = {} must be non-negative", self.lambda));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return fail(format!("delta = {} must be positive", self.delta));
        }
        if !self.bias.is_finite() {
            return fail(format!("bias = {} must be finite", self.bias));
        }
        if self.max_iters == 0 || self.tol.is_nan() || self.tol < 0.0 {
            return fail("max_iters must be >= 1 and tol >= 0".into());
        }
        if self.threads == 0 {
            return fail("threads must be >= 1".into());
        }
        if self.phred_offset != 33 && self.phred_offset != 64 {
            return fail(format!("phred offset {} must be 33 or 64", self.phred_offset));
        }
        if self.max_visits == Some(0) {
            return fail("max_visits must be >= 1".into());
        }
        Ok(())
    }

    pub fn fit_config(&self) -> FitConfig {
        FitConfig { d: self.d, gamma: self.gamma, lambda: self.lambda, max_iters: self.max_iters, tol: self.tol }
    }

    pub fn fano_config(&self) -> Result<FanoConfig> {
        let f = FanoConfig::new(self.delta, self.bias)?;
        Ok(match self.max_visits {
            Some(n) => f.with_budget(n),
            None => f,
        })
    }

    /// `key=value` lines describing the run, for output headers.
    pub fn echo(&self) -> Vec<String> {
        vec![
            format!("k={}", self.k),
            format!("d={}", self.d),
            format!("gamma={}", self.gamma),
            format!("lambda={}", self.lambda),
            format!("delta={}", self.delta),
            format!("bias={}", self.bias),
            format!("max_iters={}", self.max_iters),
            format!("tol={}", self.tol),
            format!("seed={}", self.seed),
            format!("phred_offset={}", self.phred_offset),
            format!("decoder={}", self.decoder),
            format!("first_kmer={}", self.first_kmer),
            format!("max_visits={}", self.max_visits.map_or("default".to_string(), |n| n.to_string())),
        ]
    }
}
