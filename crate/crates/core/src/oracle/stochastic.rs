use rand::distributions::{Distribution, WeightedIndex};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use super::{FunctionTable, OracleError, QueryLedger};
use crate::statevec::Backend;

/// One branch of a stochastic oracle: with probability `weight` the call uses `table`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticOutcome {
    pub y: u64,
    pub weight: f64,
    pub table: FunctionTable,
}

/// Oracle that draws a fresh `y` on every call and then acts as the total function `g_y`.
///
/// The same `y` is used for every branch of a superposed query. Responses are XORed into
/// `out_bits` qubits with no `⊥` flag, since each `g_y` is total.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StochasticOracle {
    pub label: String,
    in_bits: u32,
    out_bits: u32,
    outcomes: Vec<StochasticOutcome>,
}

impl StochasticOracle {
    pub fn new(label: impl Into<String>, outcomes: Vec<StochasticOutcome>) -> Result<Self, OracleError> {
        let first = outcomes.first().ok_or(OracleError::BadDistribution(0.0))?;
        let (in_bits, out_bits) = (first.table.in_bits(), first.table.out_bits());
        let total: f64 = outcomes.iter().map(|o| o.weight).sum();
        if (total - 1.0).abs() > 1e-9 || outcomes.iter().any(|o| o.weight < 0.0) {
            return Err(OracleError::BadDistribution(total));
        }
        for o in &outcomes {
            if o.table.in_bits() != in_bits || o.table.out_bits() != out_bits || !o.table.is_total() {
                return Err(OracleError::NotTotal);
            }
        }
        Ok(Self { label: label.into(), in_bits, out_bits, outcomes })
    }

    pub fn in_bits(&self) -> u32 {
        self.in_bits
    }

    pub fn out_bits(&self) -> u32 {
        self.out_bits
    }

    pub fn outcomes(&self) -> &[StochasticOutcome] {
        &self.outcomes
    }

    fn draw(&self, rng: &mut dyn RngCore) -> &StochasticOutcome {
        let dist = WeightedIndex::new(self.outcomes.iter().map(|o| o.weight)).expect("validated weights");
        &self.outcomes[dist.sample(rng)]
    }

    /// Quantum call on `query`/`response`; returns the hidden `y` that was drawn.
    pub fn quantum_apply<B: Backend>(
        &self,
        state: &mut B,
        query: &[usize],
        response: &[usize],
        rng: &mut dyn RngCore,
        ledger: &mut QueryLedger,
    ) -> Result<u64, OracleError> {
        if query.len() != self.in_bits as usize || response.len() != self.out_bits as usize {
            return Err(OracleError::WidthMismatch { sub: 0, query: query.len(), response: response.len() });
        }
        let outcome = self.draw(rng);
        let qlen = query.len();
        let qubits: Vec<usize> = query.iter().chain(response).copied().collect();
        let map = |v: u64| {
            let x = v & ((1u64 << qlen) - 1);
            v ^ (outcome.table.get(x).ok().flatten().unwrap_or(0) << qlen)
        };
        state.permute(&qubits, &map)?;
        ledger.stochastic_quantum += 1;
        ledger.quantum_slots += 1;
        Ok(outcome.y)
    }

    /// Classical call: returns `(y, g_y(x))`.
    pub fn classical(&self, x: u64, rng: &mut dyn RngCore, ledger: &mut QueryLedger) -> Result<(u64, u64), OracleError> {
        let outcome = self.draw(rng);
        let v = outcome.table.get(x)?.ok_or(OracleError::NotTotal)?;
        ledger.stochastic_classical += 1;
        Ok((outcome.y, v))
    }
}
