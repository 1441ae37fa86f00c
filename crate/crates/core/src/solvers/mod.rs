//! Reference algorithms for the upper bounds: Simon rounds with GF(2) recovery, the serial
//! solvers, the shuffled-Simon solver and the two collision-to-Simon solvers.

mod dispatch;
mod gf2;
mod scs;
mod serial;
mod simon;
mod ss;

pub use dispatch::{default_budget, expected_answer, problem_name, solve, solver_program};
pub use gf2::{dot, gf2_nullspace, Gf2Error, LinearSystemGF2};
pub use scs::{scs_cq_program, scs_qc4_program, solve_scs_cq, solve_scs_qc4, ScsTrack};
pub use serial::{serial_cq1_program, serial_qc_program, solve_serial_cq1, solve_serial_qc};
pub use simon::{alloc_tracks, simon_qnc_program, simon_query, simon_round, solve_simon_qnc, SimonTrack};
pub use ss::{solve_ss_cq, ss_cq_program, ss_round_program};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{Model, ModelError, RunOutcome};

/// Rows collected per batch, as a multiple of `n`.
pub const ROWS_PER_N: usize = 3;
/// Batches a CQ solver may run before giving up on a rank-deficient system.
pub const MAX_BATCHES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("unsupported instance: {0}")]
    Unsupported(String),
}

/// Outcome of one solver run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolverReport {
    pub solver: String,
    pub model: Model,
    pub budget: usize,
    pub answer: Option<u64>,
    pub failure: Option<String>,
    /// Quantum circuits run: executed rounds for CQ, one for QNC and QC.
    pub rounds: usize,
    pub depth: usize,
    pub oracle_layers: usize,
    pub quantum_queries: usize,
    pub classical_queries: usize,
    pub stochastic_queries: usize,
    /// Measured rows, one list per linear system.
    pub rows: Vec<Vec<u64>>,
}

impl SolverReport {
    pub(crate) fn from_run(solver: &str, model: Model, budget: usize, systems: usize, out: &RunOutcome) -> Self {
        let rounds = match model {
            Model::Cq => out.transcript.rounds.iter().filter(|r| !r.measured.is_empty()).count(),
            Model::Qnc | Model::Qc => 1,
        };
        Self {
            solver: solver.to_string(),
            model,
            budget,
            answer: out.output,
            failure: out.memory.failure.clone(),
            rounds,
            depth: out.depth.depth,
            oracle_layers: out.ledger.quantum_layers,
            quantum_queries: out.ledger.quantum_slots,
            classical_queries: out.ledger.classical.len(),
            stochastic_queries: out.ledger.stochastic_classical + out.ledger.stochastic_quantum,
            rows: (0..systems).map(|i| out.memory.list(&rows_key(i)).to_vec()).collect(),
        }
    }

    pub fn succeeded(&self, expected: u64) -> bool {
        self.answer == Some(expected)
    }
}

pub(crate) fn rows_key(system: usize) -> String {
    format!("rows{system}")
}

pub(crate) fn period_key(level: usize) -> String {
    format!("s{level}")
}

pub(crate) fn tracks_for(n: u32) -> usize {
    ROWS_PER_N * n as usize
}
