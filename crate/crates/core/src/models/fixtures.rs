use super::{HybridProgram, Load, Model, ProgramSlot, Stage, FLAG_REGISTER};
use crate::oracle::{ShadowMask, Slot};
use crate::statevec::GateLayer;

/// A program that breaks its model's grammar in one known way.
pub struct MalformedFixture {
    pub name: &'static str,
    pub program: HybridProgram,
    /// `Violation::kind` that validation must report.
    pub expected: &'static str,
}

fn h(qs: &[usize]) -> GateLayer<f64> {
    GateLayer::hadamards(qs).expect("distinct qubits")
}

fn slot() -> Vec<ProgramSlot> {
    vec![ProgramSlot::sub(0, vec![0], vec![1, 2])]
}

fn base(model: Model, budget: usize) -> HybridProgram {
    let mut p = HybridProgram::new(model, budget);
    p.alloc("q", 3).expect("fresh register map");
    p
}

fn fixture(name: &'static str, expected: &'static str, program: HybridProgram) -> MalformedFixture {
    MalformedFixture { name, program, expected }
}

/// Small programs over a 3-qubit register `q` (query qubit 0, response qubits 1 and 2).
pub fn malformed_programs() -> Vec<MalformedFixture> {
    let mut coherent = base(Model::Qnc, 2);
    coherent.layer(h(&[0])).classical("peek", |_, _| Ok(())).oracle(slot()).measure_all();

    let mut trailing = base(Model::Qc, 2);
    trailing.layer(h(&[0])).oracle(slot()).layer(h(&[0])).measure_all();

    let mut partial = base(Model::Cq, 1);
    partial.layer(h(&[0])).oracle(slot()).measure(vec![0]);

    let mut overrun = base(Model::Qnc, 1);
    overrun.layer(h(&[0])).oracle(slot()).layer(h(&[0])).oracle(slot()).measure_all();

    let mut overlap = base(Model::Qnc, 1);
    overlap.layer_with_loads(h(&[0]), vec![Load { qubits: vec![0], cell: "c".into() }]).measure_all();

    let mut unflagged = base(Model::Qnc, 1);
    let flagged = Stage::Flagged { slots: vec![Slot::new(0, vec![0], vec![1])], mask: ShadowMask::empty(1), flag: 2 };
    unflagged.layer(h(&[0])).push(flagged).measure_all();

    let mut outside = base(Model::Qnc, 1);
    outside.layer(h(&[5])).measure_all();

    let mut guard = base(Model::Cq, 1);
    guard.layer(h(&[0])).guard(|_| true).measure_all();

    let mut open = base(Model::Cq, 1);
    open.layer(h(&[0])).oracle(slot());

    vec![
        fixture("coherent-classical-call", "coherent-classical-call", coherent),
        fixture("qc-trailing-unitary", "trailing-unitary", trailing),
        fixture("cq-partial-measurement", "partial-measurement", partial),
        fixture("depth-overrun", "depth-exceeded", overrun),
        fixture("register-overlap", "register-overlap", overlap),
        fixture("missing-flag", "missing-flag", unflagged),
        fixture("qubit-out-of-range", "qubit-out-of-range", outside),
        fixture("guard-inside-round", "misplaced-guard", guard),
        fixture("unmeasured-round", "unmeasured-round", open),
    ]
}

/// The missing-flag fixture with its flag qubit moved into a `flag` register; it validates.
pub fn flagged_control() -> HybridProgram {
    let mut p = HybridProgram::new(Model::Qnc, 1);
    p.alloc("q", 2).expect("fresh register map");
    p.alloc(FLAG_REGISTER, 1).expect("fresh register map");
    let flagged = Stage::Flagged { slots: vec![Slot::new(0, vec![0], vec![1])], mask: ShadowMask::empty(1), flag: 2 };
    p.layer(h(&[0])).push(flagged).measure_all();
    p
}
