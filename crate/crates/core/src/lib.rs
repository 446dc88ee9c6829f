//! Reference-free correction of substitution errors in fixed-length short reads.
//!
//! Reads are modelled as walks through a hidden Markov chain whose states are the kmers seen in
//! the data. Transition probabilities are fitted with a penalized Baum-Welch that drives most of
//! the spurious transitions to zero, and reads are then decoded back to a path through the
//! chain with either a Hamming-constrained Viterbi or a sequential (Fano) decoder.

#![cfg_attr(test, allow(clippy::needless_range_loop))]

pub mod config;
pub mod decode;
mod error;
pub mod eval;
pub mod index;
pub mod model;
pub mod pipeline;
pub mod seq;

pub use error::{Error, Result};
