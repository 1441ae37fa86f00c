use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ClassicalMemory, ClassicalPort, ModelError};
use crate::oracle::{ShadowMask, Slot};
use crate::statevec::{GateLayer, RegisterMap, StateError};

/// Name of the register that must hold the flag qubit of a flagged oracle layer.
pub const FLAG_REGISTER: &str = "flag";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Qnc,
    Qc,
    Cq,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Qnc => "qnc",
            Model::Qc => "qc",
            Model::Cq => "cq",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleTarget {
    Sub(usize),
    Stochastic(usize),
}

/// A slot addressed either to a sub-oracle of the bundle or to a stochastic oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgramSlot {
    pub target: OracleTarget,
    pub query: Vec<usize>,
    pub response: Vec<usize>,
}

impl ProgramSlot {
    pub fn sub(sub: usize, query: Vec<usize>, response: Vec<usize>) -> Self {
        Self { target: OracleTarget::Sub(sub), query, response }
    }

    pub fn stochastic(k: usize, query: Vec<usize>, response: Vec<usize>) -> Self {
        Self { target: OracleTarget::Stochastic(k), query, response }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.query.iter().chain(&self.response).copied()
    }
}

/// X gates on `qubits[j]` wherever bit `j` of the classical cell is set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Load {
    pub qubits: Vec<usize>,
    pub cell: String,
}

/// One circuit layer: fixed gates plus classically controlled bit loads on other qubits.
#[derive(Clone, Debug, Default)]
pub struct UnitaryStage {
    pub layer: GateLayer<f64>,
    pub loads: Vec<Load>,
}

impl UnitaryStage {
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.layer.targets().into_iter().chain(self.loads.iter().flat_map(|l| l.qubits.iter().copied()))
    }
}

pub type ClassicalFn = Arc<dyn Fn(&mut ClassicalMemory, &mut ClassicalPort<'_>) -> Result<(), ModelError> + Send + Sync>;
pub type GuardFn = Arc<dyn Fn(&ClassicalMemory) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum Stage {
    Unitary(UnitaryStage),
    Oracle(Vec<ProgramSlot>),
    /// Oracle layer that also flips `flag` whenever a query lands in the mask.
    Flagged { slots: Vec<Slot>, mask: ShadowMask, flag: usize },
    Measure(Vec<usize>),
    MeasureAll,
    Classical { name: String, run: ClassicalFn },
    /// Skips the next round (through its full measurement) unless the predicate holds.
    Guard(GuardFn),
}

impl Stage {
    pub fn kind(&self) -> &'static str {
        match self {
            Stage::Unitary(_) => "unitary",
            Stage::Oracle(_) => "oracle",
            Stage::Flagged { .. } => "flagged-oracle",
            Stage::Measure(_) => "measure",
            Stage::MeasureAll => "measure-all",
            Stage::Classical { .. } => "classical",
            Stage::Guard(_) => "guard",
        }
    }
}

impl fmt::Debug for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Unitary(u) => write!(f, "Unitary({} gates, {} loads)", u.layer.gates().len(), u.loads.len()),
            Stage::Oracle(s) => write!(f, "Oracle({} slots)", s.len()),
            Stage::Flagged { slots, flag, .. } => write!(f, "Flagged({} slots, flag {flag})", slots.len()),
            Stage::Measure(q) => write!(f, "Measure({q:?})"),
            Stage::MeasureAll => f.write_str("MeasureAll"),
            Stage::Classical { name, .. } => write!(f, "Classical({name})"),
            Stage::Guard(_) => f.write_str("Guard"),
        }
    }
}

/// A program in one of the three hybrid shapes, with its declared depth budget.
#[derive(Clone, Debug)]
pub struct HybridProgram {
    pub model: Model,
    pub depth_budget: usize,
    pub registers: RegisterMap,
    pub stages: Vec<Stage>,
}

impl HybridProgram {
    pub fn new(model: Model, depth_budget: usize) -> Self {
        Self { model, depth_budget, registers: RegisterMap::new(), stages: Vec::new() }
    }

    pub fn alloc(&mut self, name: &str, len: usize) -> Result<Vec<usize>, StateError> {
        self.registers.alloc(name, len)
    }

    pub fn num_qubits(&self) -> usize {
        self.registers.num_qubits()
    }

    pub fn push(&mut self, stage: Stage) -> &mut Self {
        self.stages.push(stage);
        self
    }

    pub fn layer(&mut self, layer: GateLayer<f64>) -> &mut Self {
        self.push(Stage::Unitary(UnitaryStage { layer, loads: Vec::new() }))
    }

    pub fn layer_with_loads(&mut self, layer: GateLayer<f64>, loads: Vec<Load>) -> &mut Self {
        self.push(Stage::Unitary(UnitaryStage { layer, loads }))
    }

    pub fn oracle(&mut self, slots: Vec<ProgramSlot>) -> &mut Self {
        self.push(Stage::Oracle(slots))
    }

    pub fn measure(&mut self, qubits: Vec<usize>) -> &mut Self {
        self.push(Stage::Measure(qubits))
    }

    pub fn measure_all(&mut self) -> &mut Self {
        self.push(Stage::MeasureAll)
    }

    pub fn classical<F>(&mut self, name: &str, f: F) -> &mut Self
    where
        F: Fn(&mut ClassicalMemory, &mut ClassicalPort<'_>) -> Result<(), ModelError> + Send + Sync + 'static,
    {
        self.push(Stage::Classical { name: name.to_string(), run: Arc::new(f) })
    }

    pub fn guard<F>(&mut self, f: F) -> &mut Self
    where
        F: Fn(&ClassicalMemory) -> bool + Send + Sync + 'static,
    {
        self.push(Stage::Guard(Arc::new(f)))
    }
}
