use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::table::{encode, FunctionTable};
use super::{ClassicalQuery, OracleError, QueryLedger};
use crate::statevec::Backend;

/// One sub-oracle call inside a parallel oracle layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub sub: usize,
    /// Query qubits; bit `j` of the input is `query[j]`.
    pub query: Vec<usize>,
    /// Response qubits: payload bits then the `⊥` flag.
    pub response: Vec<usize>,
}

impl Slot {
    pub fn new(sub: usize, query: Vec<usize>, response: Vec<usize>) -> Self {
        Self { sub, query, response }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.query.iter().chain(&self.response).copied()
    }
}

/// Per-sub-oracle sets of masked inputs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadowMask {
    sets: Vec<BTreeSet<u64>>,
}

impl ShadowMask {
    /// Mask with `subs` empty sets.
    pub fn empty(subs: usize) -> Self {
        Self { sets: vec![BTreeSet::new(); subs] }
    }

    pub fn from_sets(sets: Vec<BTreeSet<u64>>) -> Self {
        Self { sets }
    }

    pub fn set(&mut self, sub: usize, inputs: BTreeSet<u64>) {
        self.sets[sub] = inputs;
    }

    pub fn get(&self, sub: usize) -> &BTreeSet<u64> {
        &self.sets[sub]
    }

    pub fn contains(&self, sub: usize, x: u64) -> bool {
        self.sets.get(sub).is_some_and(|s| s.contains(&x))
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.iter().all(BTreeSet::is_empty)
    }
}

/// An ordered collection of sub-oracles addressed by index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBundle {
    pub label: String,
    subs: Vec<FunctionTable>,
}

impl OracleBundle {
    pub fn new(label: impl Into<String>, subs: Vec<FunctionTable>) -> Self {
        Self { label: label.into(), subs }
    }

    pub fn subs(&self) -> &[FunctionTable] {
        &self.subs
    }

    pub fn sub(&self, i: usize) -> Result<&FunctionTable, OracleError> {
        self.subs.get(i).ok_or(OracleError::NoSuchSubOracle(i))
    }

    pub fn len(&self) -> usize {
        self.subs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subs.is_empty()
    }

    /// Checks widths and pairwise disjointness of a layer of slots.
    pub fn check_slots(&self, slots: &[Slot]) -> Result<(), OracleError> {
        let mut seen = BTreeSet::new();
        for slot in slots {
            let t = self.sub(slot.sub)?;
            if slot.query.len() != t.in_bits() as usize || slot.response.len() != t.out_bits() as usize + 1 {
                return Err(OracleError::WidthMismatch {
                    sub: slot.sub,
                    query: slot.query.len(),
                    response: slot.response.len(),
                });
            }
            for q in slot.qubits() {
                if !seen.insert(q) {
                    return Err(OracleError::RegisterOverlap(q));
                }
            }
        }
        Ok(())
    }

    /// Applies `|x>|r> -> |x>|r xor enc(L_i(x))>` for every slot.
    pub fn quantum_apply<B: Backend>(
        &self,
        state: &mut B,
        slots: &[Slot],
        ledger: &mut QueryLedger,
    ) -> Result<(), OracleError> {
        self.check_slots(slots)?;
        for slot in slots {
            let t = self.sub(slot.sub)?;
            let qlen = slot.query.len();
            let qmask = (1u64 << qlen) - 1;
            let qubits: Vec<usize> = slot.qubits().collect();
            // Inputs are in range by construction of the register width.
            let map = |v: u64| {
                let x = v & qmask;
                v ^ (encode(t.get(x).unwrap_or(None), t.out_bits()) << qlen)
            };
            state.permute(&qubits, &map)?;
        }
        ledger.quantum_slots += slots.len();
        ledger.quantum_layers += 1;
        Ok(())
    }

    /// Classical evaluation, recorded in the ledger.
    pub fn classical_query(&self, sub: usize, x: u64, ledger: &mut QueryLedger) -> Result<Option<u64>, OracleError> {
        let answer = self.sub(sub)?.get(x)?;
        ledger.classical.push(ClassicalQuery { sub, x, answer });
        Ok(answer)
    }

    /// The shadow oracle: identical except masked inputs answer `⊥`.
    pub fn make_shadow(&self, mask: &ShadowMask) -> Result<Self, OracleError> {
        if mask.len() != self.subs.len() {
            return Err(OracleError::MaskArity { mask: mask.len(), subs: self.subs.len() });
        }
        let subs = self
            .subs
            .iter()
            .enumerate()
            .map(|(i, t)| t.masked(mask.get(i)))
            .collect::<Result<_, _>>()?;
        Ok(Self { label: format!("{}|shadow", self.label), subs })
    }

    /// The flagged oracle: flips `flag` when any slot's query lies in its masked set, then
    /// applies the oracle. The flag-one probability afterwards is the find probability.
    pub fn flagged_apply<B: Backend>(
        &self,
        mask: &ShadowMask,
        state: &mut B,
        slots: &[Slot],
        flag: usize,
        ledger: &mut QueryLedger,
    ) -> Result<(), OracleError> {
        self.check_slots(slots)?;
        if mask.len() != self.subs.len() {
            return Err(OracleError::MaskArity { mask: mask.len(), subs: self.subs.len() });
        }
        if slots.iter().any(|s| s.qubits().any(|q| q == flag)) {
            return Err(OracleError::RegisterOverlap(flag));
        }
        let mut qubits: Vec<usize> = slots.iter().flat_map(|s| s.query.iter().copied()).collect();
        if qubits.len() >= 63 {
            return Err(OracleError::TooWide { in_bits: qubits.len() as u32, out_bits: 0 });
        }
        let flag_bit = qubits.len();
        qubits.push(flag);
        let spans: Vec<(usize, usize, usize)> = slots
            .iter()
            .scan(0usize, |off, s| {
                let span = (s.sub, *off, s.query.len());
                *off += s.query.len();
                Some(span)
            })
            .collect();
        let map = |v: u64| {
            let hit = spans
                .iter()
                .any(|&(sub, off, len)| mask.contains(sub, v >> off & ((1u64 << len) - 1)));
            if hit {
                v ^ (1 << flag_bit)
            } else {
                v
            }
        };
        state.permute(&qubits, &map)?;
        self.quantum_apply(state, slots, ledger)
    }
}
