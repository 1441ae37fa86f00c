use rand::RngCore;

use super::{
    validate, ClassicalMemory, ClassicalPort, DepthReport, HybridProgram, Model, ModelError, OracleTarget, Stage,
    Transcript,
};
use crate::oracle::{OracleBundle, QueryLedger, Slot, StochasticOracle};
use crate::statevec::{Backend, FactoredState, Gate};

/// The oracles a program may call.
#[derive(Clone, Debug)]
pub struct OracleSet {
    pub bundle: OracleBundle,
    pub stochastic: Vec<StochasticOracle>,
}

impl OracleSet {
    pub fn new(bundle: OracleBundle) -> Self {
        Self { bundle, stochastic: Vec::new() }
    }

    pub fn with_stochastic(bundle: OracleBundle, stochastic: Vec<StochasticOracle>) -> Self {
        Self { bundle, stochastic }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub output: Option<u64>,
    pub memory: ClassicalMemory,
    pub ledger: QueryLedger,
    pub transcript: Transcript,
    pub depth: DepthReport,
    /// Largest number of amplitudes held in one entangled block.
    pub peak_support: usize,
    /// Outcomes `y` drawn by stochastic oracles inside quantum layers, hidden from the program.
    pub hidden_draws: Vec<u64>,
}

/// Runs a validated program stage by stage.
pub struct Executor<'a> {
    program: &'a HybridProgram,
    oracles: &'a OracleSet,
    depth: DepthReport,
    state: FactoredState<f64>,
    memory: ClassicalMemory,
    ledger: QueryLedger,
    transcript: Transcript,
    pc: usize,
    peak_support: usize,
    hidden_draws: Vec<u64>,
}

impl<'a> Executor<'a> {
    pub fn new(program: &'a HybridProgram, oracles: &'a OracleSet) -> Result<Self, ModelError> {
        let depth = validate(program)?;
        Ok(Self {
            program,
            oracles,
            depth,
            state: FactoredState::new(program.num_qubits()),
            memory: ClassicalMemory::default(),
            ledger: QueryLedger::default(),
            transcript: Transcript::default(),
            pc: 0,
            peak_support: 0,
            hidden_draws: Vec::new(),
        })
    }

    pub fn pc(&self) -> usize {
        self.pc
    }

    pub fn is_done(&self) -> bool {
        self.pc >= self.program.stages.len()
    }

    pub fn state(&self) -> &FactoredState<f64> {
        &self.state
    }

    pub fn memory(&self) -> &ClassicalMemory {
        &self.memory
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn depth(&self) -> DepthReport {
        self.depth
    }

    /// Executes one stage. Returns `false` once the program has finished.
    pub fn step(&mut self, rng: &mut dyn RngCore) -> Result<bool, ModelError> {
        let Some(stage) = self.program.stages.get(self.pc) else {
            return Ok(false);
        };
        self.pc += 1;
        match stage {
            Stage::Unitary(u) => {
                self.state.apply_layer(&u.layer)?;
                for load in &u.loads {
                    let value = self.memory.require(&load.cell)?;
                    for (j, &q) in load.qubits.iter().enumerate() {
                        if j < 64 && value >> j & 1 == 1 {
                            self.state.apply_gate(&Gate::x(q))?;
                        }
                    }
                }
            }
            Stage::Oracle(slots) => self.oracle_layer(slots, rng)?,
            Stage::Flagged { slots, mask, flag } => {
                self.oracles.bundle.flagged_apply(mask, &mut self.state, slots, *flag, &mut self.ledger)?;
            }
            Stage::Measure(qubits) => {
                self.measure(qubits, rng)?;
                self.transcript.close_round();
            }
            Stage::MeasureAll => {
                let all: Vec<usize> = (0..self.program.num_qubits()).collect();
                self.measure(&all, rng)?;
                if self.program.model == Model::Cq {
                    self.state.reset();
                }
                self.transcript.close_round();
            }
            Stage::Classical { run, .. } => {
                if self.state.live_qubits() > 0 {
                    self.transcript.current().classical_saw_live_state = true;
                }
                let mut port = ClassicalPort {
                    oracles: self.oracles,
                    ledger: &mut self.ledger,
                    transcript: &mut self.transcript,
                    rng,
                };
                run(&mut self.memory, &mut port)?;
            }
            Stage::Guard(pred) => {
                if !pred(&self.memory) {
                    while let Some(s) = self.program.stages.get(self.pc) {
                        self.pc += 1;
                        if matches!(s, Stage::MeasureAll) {
                            break;
                        }
                    }
                }
            }
        }
        self.peak_support = self.peak_support.max(self.state.peak_support());
        Ok(!self.is_done())
    }

    fn oracle_layer(&mut self, slots: &[super::ProgramSlot], rng: &mut dyn RngCore) -> Result<(), ModelError> {
        let subs: Vec<Slot> = slots
            .iter()
            .filter_map(|s| match s.target {
                OracleTarget::Sub(i) => Some(Slot::new(i, s.query.clone(), s.response.clone())),
                OracleTarget::Stochastic(_) => None,
            })
            .collect();
        if subs.is_empty() {
            self.ledger.quantum_layers += 1;
        } else {
            self.oracles.bundle.quantum_apply(&mut self.state, &subs, &mut self.ledger)?;
        }
        for s in slots {
            if let OracleTarget::Stochastic(k) = s.target {
                let oracle = self.oracles.stochastic.get(k).ok_or(ModelError::NoSuchStochastic(k))?;
                let y = oracle.quantum_apply(&mut self.state, &s.query, &s.response, rng, &mut self.ledger)?;
                self.hidden_draws.push(y);
            }
        }
        Ok(())
    }

    fn measure(&mut self, qubits: &[usize], rng: &mut dyn RngCore) -> Result<(), ModelError> {
        let bits = self.state.measure_qubits(qubits, rng)?;
        self.memory.record(qubits, &bits);
        self.transcript.current().measured.extend(qubits.iter().copied().zip(bits));
        Ok(())
    }

    pub fn finish(mut self, rng: &mut dyn RngCore) -> Result<RunOutcome, ModelError> {
        while self.step(rng)? {}
        Ok(RunOutcome {
            output: self.memory.output,
            memory: self.memory,
            ledger: self.ledger,
            transcript: self.transcript,
            depth: self.depth,
            peak_support: self.peak_support,
            hidden_draws: self.hidden_draws,
        })
    }
}

/// Validates and runs `program` to completion.
pub fn run(program: &HybridProgram, oracles: &OracleSet, rng: &mut dyn RngCore) -> Result<RunOutcome, ModelError> {
    Executor::new(program, oracles)?.finish(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Load, ProgramSlot};
    use crate::oracle::FunctionTable;
    use crate::statevec::GateLayer;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn xor_bundle() -> OracleBundle {
        // f(x) = x xor 0b101 on 3 bits
        OracleBundle::new("xor", vec![FunctionTable::from_fn(3, 3, |x| Some(x ^ 0b101)).unwrap()])
    }

    #[test]
    fn qnc_phase_kickback_reads_inputs() {
        let mut p = HybridProgram::new(Model::Qnc, 1);
        let x = p.alloc("x", 3).unwrap();
        let r = p.alloc("r", 4).unwrap();
        p.layer(GateLayer::empty()).oracle(vec![ProgramSlot::sub(0, x.clone(), r.clone())]).measure_all();
        let set = OracleSet::new(xor_bundle());
        let out = run(&p, &set, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(out.memory.read(&r).unwrap(), 0b101);
        assert_eq!(out.ledger.quantum_layers, 1);
        assert_eq!(out.depth.depth, 1);
    }

    #[test]
    fn cq_loads_guard_and_transcript() {
        let mut p = HybridProgram::new(Model::Cq, 1);
        let x = p.alloc("x", 3).unwrap();
        let r = p.alloc("r", 4).unwrap();
        let (xc, rc) = (x.clone(), r.clone());
        p.classical("init", |m, port| {
            let a = port.query(0, 3)?;
            m.set("x", a.unwrap());
            Ok(())
        });
        for _ in 0..2 {
            p.guard(|m| m.cell("done").is_none());
            p.layer_with_loads(GateLayer::empty(), vec![Load { qubits: x.clone(), cell: "x".into() }]);
            p.oracle(vec![ProgramSlot::sub(0, x.clone(), r.clone())]).measure_all();
            let (xc, rc) = (xc.clone(), rc.clone());
            p.classical("read", move |m, _| {
                if m.cell("done").is_some() {
                    return Ok(());
                }
                m.push("seen", m.read(&rc)?);
                m.set("x", m.read(&xc)?);
                m.set("done", 1);
                Ok(())
            });
        }
        let out = run(&p, &OracleSet::new(xor_bundle()), &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_eq!(out.memory.list("seen"), &[0b011 ^ 0b101 ^ 0b101]);
        assert_eq!(out.ledger.quantum_layers, 1);
        assert_eq!(out.ledger.classical.len(), 1);
        let rounds: Vec<_> = out.transcript.completed().collect();
        assert_eq!(rounds.len(), 1);
        assert_eq!(rounds[0].classical.len(), 1);
        assert!(!rounds[0].classical_saw_live_state);
    }

    #[test]
    fn invalid_programs_never_run() {
        let mut p = HybridProgram::new(Model::Qc, 1);
        let x = p.alloc("x", 3).unwrap();
        p.layer(GateLayer::hadamards(&x).unwrap()).classical("peek", |_, _| Ok(())).measure_all();
        let err = run(&p, &OracleSet::new(xor_bundle()), &mut ChaCha8Rng::seed_from_u64(0)).unwrap_err();
        assert!(matches!(err, ModelError::Violation(Violation::CoherentClassicalCall { stage: 1 })));
    }

    use crate::models::Violation;
}
