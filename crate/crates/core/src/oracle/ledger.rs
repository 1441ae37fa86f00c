use serde::{Deserialize, Serialize};

/// One classical evaluation of a sub-oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalQuery {
    pub sub: usize,
    pub x: u64,
    pub answer: Option<u64>,
}

/// Counts of oracle use during a run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryLedger {
    /// Quantum slots applied, summed over layers (the parallel query count q̄).
    pub quantum_slots: usize,
    /// Oracle layers applied.
    pub quantum_layers: usize,
    pub classical: Vec<ClassicalQuery>,
    /// Stochastic draws made by classical callers.
    pub stochastic_classical: usize,
    /// Stochastic draws made inside quantum layers.
    pub stochastic_quantum: usize,
}

impl QueryLedger {
    pub fn qbar(&self) -> usize {
        self.quantum_slots
    }

    /// Classical queries answered `⊥`.
    pub fn bottoms(&self) -> impl Iterator<Item = &ClassicalQuery> {
        self.classical.iter().filter(|q| q.answer.is_none())
    }
}
