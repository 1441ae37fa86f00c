//! Hybrid quantum-classical programs in three shapes: a single depth-limited circuit (QNC),
//! depth-limited quantum blocks with classical steps between them (QC), and classical
//! algorithms that call fully measured depth-limited circuits (CQ).

mod estimate;
mod executor;
mod fixtures;
mod memory;
mod program;
mod validate;

pub use estimate::{success_probability, trial_rng, wilson, Estimate};
pub use executor::{run, Executor, OracleSet, RunOutcome};
pub use fixtures::{flagged_control, malformed_programs, MalformedFixture};
pub use memory::{ClassicalMemory, ClassicalPort, RoundRecord, Transcript};
pub use program::{
    ClassicalFn, GuardFn, HybridProgram, Load, Model, OracleTarget, ProgramSlot, Stage, UnitaryStage, FLAG_REGISTER,
};
pub use validate::{validate, DepthReport, Violation};

use thiserror::Error;

use crate::oracle::OracleError;
use crate::problems::ProblemError;
use crate::statevec::StateError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("program violates its model: {0}")]
    Violation(#[from] Violation),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("classical cell `{0}` was never written")]
    MissingCell(String),
    #[error("qubit {0} read before it was measured")]
    Unmeasured(usize),
    #[error("no stochastic oracle with index {0}")]
    NoSuchStochastic(usize),
    #[error("classical step failed: {0}")]
    Classical(String),
}
