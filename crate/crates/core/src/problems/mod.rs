//! Random instance generators: Simon functions, the c-Serial construction, d-Shufflers with
//! the shuffled-Simon problem, and the shuffled collision-to-Simon problem.

mod record;
mod scs;
mod serial;
mod shuffler;
mod simon;
mod ss;

pub use record::{InstanceFile, ProblemInstance, INSTANCE_SCHEMA, INSTANCE_VERSION};
pub use scs::{cs_map, sample_scs, ScsInstance};
pub use serial::{sample_serial, SerialInstance, SerialLevel};
pub use shuffler::Shuffler;
pub use simon::{sample_one_to_one, sample_simon, sample_two_to_one, simon_period, SimonInstance, SimonProblem};
pub use ss::{sample_ss, SsInstance};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::oracle::{FunctionTable, OracleError};

/// Largest `n` accepted for problems whose oracles take `2n`-bit inputs.
pub const MAX_PAIRED_N: u32 = 12;
/// Largest `n` accepted for plain `n`-bit problems.
pub const MAX_PLAIN_N: u32 = 20;
/// Largest `n` accepted for the collision-to-Simon problem.
pub const MAX_SCS_N: u32 = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("n = {n} outside the supported range 1..={max}")]
    SizeOutOfRange { n: u32, max: u32 },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("instance check failed: {0}")]
    Invalid(String),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

pub(crate) fn check_n(n: u32, max: u32) -> Result<(), ProblemError> {
    if n == 0 || n > max {
        return Err(ProblemError::SizeOutOfRange { n, max });
    }
    Ok(())
}

/// Packs the pair `(hi, lo)` of `n`-bit strings as `hi * 2^n + lo`.
pub fn pack_pair(hi: u64, lo: u64, n: u32) -> u64 {
    (hi << n) | lo
}

/// Inverse of [`pack_pair`].
pub fn unpack_pair(v: u64, n: u32) -> (u64, u64) {
    (v >> n, v & ((1 << n) - 1))
}

/// Whether an instance asks for the hidden answer or for a one-bit label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Search,
    Decision,
}

/// A generic search problem together with its decoy distribution for the decision variant.
pub trait GenericProblem: Send + Sync {
    fn name(&self) -> &str;

    /// Samples a search instance and its answer.
    fn sample_search(&self, n: u32, rng: &mut dyn RngCore) -> Result<(FunctionTable, u64), ProblemError>;

    /// Samples from the decoy distribution.
    fn sample_decoy(&self, n: u32, rng: &mut dyn RngCore) -> Result<FunctionTable, ProblemError>;
}
