use std::collections::BTreeMap;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{ModelError, OracleSet};
use crate::oracle::{ClassicalQuery, QueryLedger};

/// Classical state visible to classical steps: measurement results, named integer cells,
/// named lists and the program output.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalMemory {
    bits: BTreeMap<usize, bool>,
    cells: BTreeMap<String, u64>,
    lists: BTreeMap<String, Vec<u64>>,
    pub output: Option<u64>,
    /// Reason reported by a classical step that gave up.
    pub failure: Option<String>,
}

impl ClassicalMemory {
    pub(crate) fn record(&mut self, qubits: &[usize], bits: &[bool]) {
        for (&q, &b) in qubits.iter().zip(bits) {
            self.bits.insert(q, b);
        }
    }

    pub fn bit(&self, qubit: usize) -> Option<bool> {
        self.bits.get(&qubit).copied()
    }

    /// Last measured value of the register `qubits` (bit `j` is `qubits[j]`).
    pub fn read(&self, qubits: &[usize]) -> Result<u64, ModelError> {
        qubits.iter().enumerate().try_fold(0u64, |acc, (j, &q)| {
            let b = self.bit(q).ok_or(ModelError::Unmeasured(q))?;
            Ok(acc | (u64::from(b) << j))
        })
    }

    pub fn cell(&self, name: &str) -> Option<u64> {
        self.cells.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<u64, ModelError> {
        self.cell(name).ok_or_else(|| ModelError::MissingCell(name.to_string()))
    }

    pub fn set(&mut self, name: &str, value: u64) {
        self.cells.insert(name.to_string(), value);
    }

    pub fn push(&mut self, list: &str, value: u64) {
        self.lists.entry(list.to_string()).or_default().push(value);
    }

    pub fn list(&self, name: &str) -> &[u64] {
        self.lists.get(name).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn clear_list(&mut self, name: &str) {
        self.lists.remove(name);
    }
}

/// Everything observed during one round: the classical queries made before its circuit and
/// the outcome of the circuit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub classical: Vec<ClassicalQuery>,
    /// `(input, y)` for classical stochastic calls.
    pub stochastic: Vec<(u64, u64)>,
    pub measured: Vec<(usize, bool)>,
    /// Shuffler paths the classical side walked completely.
    pub revealed_paths: Vec<Vec<u64>>,
    /// Set if a classical step ran while quantum state was live.
    pub classical_saw_live_state: bool,
}

impl RoundRecord {
    /// Classical queries answered `⊥`.
    pub fn bottoms(&self) -> Vec<(usize, u64)> {
        self.classical.iter().filter(|q| q.answer.is_none()).map(|q| (q.sub, q.x)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub rounds: Vec<RoundRecord>,
}

impl Default for Transcript {
    fn default() -> Self {
        Self { rounds: vec![RoundRecord::default()] }
    }
}

impl Transcript {
    pub fn current(&mut self) -> &mut RoundRecord {
        self.rounds.last_mut().expect("at least one round")
    }

    pub(crate) fn close_round(&mut self) {
        self.rounds.push(RoundRecord::default());
    }

    /// Rounds that saw any activity.
    pub fn completed(&self) -> impl Iterator<Item = &RoundRecord> {
        self.rounds.iter().filter(|r| *r != &RoundRecord::default())
    }
}

/// Oracle access for classical steps. All calls are recorded in the ledger and transcript.
pub struct ClassicalPort<'a> {
    pub(crate) oracles: &'a OracleSet,
    pub(crate) ledger: &'a mut QueryLedger,
    pub(crate) transcript: &'a mut Transcript,
    pub(crate) rng: &'a mut dyn RngCore,
}

impl ClassicalPort<'_> {
    pub fn query(&mut self, sub: usize, x: u64) -> Result<Option<u64>, ModelError> {
        let answer = self.oracles.bundle.classical_query(sub, x, self.ledger)?;
        self.transcript.current().classical.push(ClassicalQuery { sub, x, answer });
        Ok(answer)
    }

    /// Classical call to stochastic oracle `k`: returns `(y, g_y(x))`.
    pub fn stochastic(&mut self, k: usize, x: u64) -> Result<(u64, u64), ModelError> {
        let oracle = self.oracles.stochastic.get(k).ok_or(ModelError::NoSuchStochastic(k))?;
        let (y, v) = oracle.classical(x, self.rng, self.ledger)?;
        self.transcript.current().stochastic.push((x, y));
        Ok((y, v))
    }

    pub fn reveal_path(&mut self, path: Vec<u64>) {
        self.transcript.current().revealed_paths.push(path);
    }

    pub fn rng(&mut self) -> &mut dyn RngCore {
        self.rng
    }
}
