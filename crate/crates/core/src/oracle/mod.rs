//! Function tables with `⊥`, parallel quantum oracle layers, shadow and flagged oracles,
//! stochastic oracles and the query ledger.

mod bundle;
mod ledger;
mod stochastic;
mod table;

pub use bundle::{OracleBundle, ShadowMask, Slot};
pub use ledger::{ClassicalQuery, QueryLedger};
pub use stochastic::{StochasticOracle, StochasticOutcome};
pub use table::{decode, encode, FunctionTable, MAX_IN_BITS};

use thiserror::Error;

use crate::statevec::StateError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("input {x} outside a {in_bits}-bit domain")]
    InputOutOfRange { x: u64, in_bits: u32 },
    #[error("output {value} does not fit in {out_bits} bits")]
    OutputOutOfRange { value: u64, out_bits: u32 },
    #[error("table widths {in_bits}->{out_bits} are unsupported")]
    TooWide { in_bits: u32, out_bits: u32 },
    #[error("table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("no sub-oracle with index {0}")]
    NoSuchSubOracle(usize),
    #[error("slot for sub-oracle {sub} has query width {query} and response width {response}")]
    WidthMismatch { sub: usize, query: usize, response: usize },
    #[error("qubit {0} used by two registers in one oracle layer")]
    RegisterOverlap(usize),
    #[error("mask covers {mask} sub-oracles, bundle has {subs}")]
    MaskArity { mask: usize, subs: usize },
    #[error("stochastic branch is not a total function of matching shape")]
    NotTotal,
    #[error("stochastic weights sum to {0}")]
    BadDistribution(f64),
    #[error(transparent)]
    State(#[from] StateError),
}
