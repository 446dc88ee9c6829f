//! Kmer-state HMM: parameters, the pruned forward-backward E-step, the penalized M-step and
//! the EM driver.

mod estep;
mod fit;
mod io;
mod mstep;
mod params;
pub(crate) mod trellis;

pub use estep::{e_step_read, ReadStats, SuffStats};
pub use fit::{fit, prune_states, FitConfig, FitResult, TraceRow};
pub use io::{read_model, write_model};
pub use mstep::{m_step_emissions, m_step_transitions, row_objective, EmissionParams};
pub use params::{init_params, penalty_term, EmissionTable, HmmParams};
pub use trellis::Trellis;

use crate::index::StateSpace;

/// A fitted model: the state space together with parameters indexed by its state ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub space: StateSpace,
    pub params: HmmParams,
}
