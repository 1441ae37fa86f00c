//! Pure-state simulation: dense amplitude vectors, a factored sparse representation for wide
//! registers, and distance measures between states and ensembles.

mod dense;
mod distance;
mod factored;
mod gate;
mod registers;

pub use dense::QuantumState;
pub use distance::{bures, fidelity, trace_distance, Ensemble, StateRef};
pub use factored::FactoredState;
pub use gate::{Gate, GateLayer};
pub use registers::{deposit, extract, Register, RegisterMap};

use rand::RngCore;
use thiserror::Error;

use crate::scalar::Scalar;

/// Largest register a dense vector will hold.
pub const MAX_DENSE_QUBITS: usize = 24;
/// Largest state for which density matrices are formed.
pub const MAX_DENSITY_QUBITS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("qubit {qubit} outside a {width}-qubit state")]
    QubitOutOfRange { qubit: usize, width: usize },
    #[error("qubit {0} targeted twice in one layer")]
    LayerOverlap(usize),
    #[error("amplitude vector of length {0} is not a power of two")]
    BadLength(usize),
    #[error("state norm {0} differs from 1")]
    NotNormalized(f64),
    #[error("{0} qubits exceed the dense simulation limit")]
    TooManyQubits(usize),
    #[error("qubit widths differ: {0} vs {1}")]
    WidthMismatch(usize, usize),
    #[error("measurement outcome has zero probability")]
    ImpossibleOutcome,
    #[error("register {0} already exists")]
    DuplicateRegister(String),
    #[error("ensemble weights sum to {0}")]
    BadEnsemble(f64),
    #[error("sparse block exceeded {0} amplitudes")]
    SupportTooLarge(usize),
    #[error("register value map is not a permutation")]
    NotPermutation,
}

/// Operations shared by the dense and factored simulators.
pub trait Backend {
    type Real: Scalar;

    fn num_qubits(&self) -> usize;

    fn apply_gate(&mut self, gate: &Gate<Self::Real>) -> Result<(), StateError>;

    /// Applies the basis permutation `v -> map(v)` to the register formed by `qubits`
    /// (bit `j` of `v` is `qubits[j]`). `map` must be a bijection on `0..2^qubits.len()`.
    fn permute(&mut self, qubits: &[usize], map: &dyn Fn(u64) -> u64) -> Result<(), StateError>;

    /// Measures `qubits` in the computational basis, collapsing the state.
    fn measure_qubits(&mut self, qubits: &[usize], rng: &mut dyn RngCore) -> Result<Vec<bool>, StateError>;

    fn prob_one(&self, qubit: usize) -> Result<Self::Real, StateError>;

    fn apply_layer(&mut self, layer: &GateLayer<Self::Real>) -> Result<(), StateError> {
        layer.gates().iter().try_for_each(|g| self.apply_gate(g))
    }
}

pub(crate) fn check_qubits(qubits: &[usize], width: usize) -> Result<(), StateError> {
    let mut seen = std::collections::BTreeSet::new();
    for &q in qubits {
        if q >= width {
            return Err(StateError::QubitOutOfRange { qubit: q, width });
        }
        if !seen.insert(q) {
            return Err(StateError::LayerOverlap(q));
        }
    }
    Ok(())
}
