use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{HybridProgram, Model, Stage, FLAG_REGISTER};

/// A way in which a program breaks the grammar of its declared model.
#[derive(Debug, Error, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    #[error("stage {stage}: classical step while quantum state is live")]
    CoherentClassicalCall { stage: usize },
    #[error("stage {stage}: unitary after the oracle inside a QC block")]
    TrailingUnitary { stage: usize },
    #[error("stage {stage}: partial measurement inside a CQ round")]
    PartialMeasurement { stage: usize },
    #[error("depth {used} exceeds budget {budget}")]
    DepthExceeded { used: usize, budget: usize },
    #[error("stage {stage}: qubit {qubit} used twice")]
    RegisterOverlap { stage: usize, qubit: usize },
    #[error("stage {stage}: flag qubit {qubit} is not in a `flag` register")]
    MissingFlag { stage: usize, qubit: usize },
    #[error("stage {stage}: qubit {qubit} outside the register map")]
    QubitOutOfRange { stage: usize, qubit: usize },
    #[error("stage {stage}: oracle layer not preceded by a unitary layer")]
    OracleWithoutLayer { stage: usize },
    #[error("stage {stage}: guard outside a CQ round boundary")]
    MisplacedGuard { stage: usize },
    #[error("stage {stage}: {reason}")]
    Structure { stage: usize, reason: String },
    #[error("program ends with unmeasured quantum state")]
    UnmeasuredRound,
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::CoherentClassicalCall { .. } => "coherent-classical-call",
            Violation::TrailingUnitary { .. } => "trailing-unitary",
            Violation::PartialMeasurement { .. } => "partial-measurement",
            Violation::DepthExceeded { .. } => "depth-exceeded",
            Violation::RegisterOverlap { .. } => "register-overlap",
            Violation::MissingFlag { .. } => "missing-flag",
            Violation::QubitOutOfRange { .. } => "qubit-out-of-range",
            Violation::OracleWithoutLayer { .. } => "oracle-without-layer",
            Violation::MisplacedGuard { .. } => "misplaced-guard",
            Violation::Structure { .. } => "structure",
            Violation::UnmeasuredRound => "unmeasured-round",
        }
    }
}

/// Depth accounting of a valid program.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepthReport {
    /// QNC/CQ: largest per-round count of layers excluding a trailing oracle-free layer.
    /// QC: number of blocks.
    pub depth: usize,
    pub oracle_layers: usize,
    /// Quantum rounds (CQ/QNC) or blocks (QC).
    pub rounds: usize,
}

fn disjoint(stage: usize, qubits: impl Iterator<Item = usize>, width: usize) -> Result<(), Violation> {
    let mut seen = BTreeSet::new();
    for q in qubits {
        if q >= width {
            return Err(Violation::QubitOutOfRange { stage, qubit: q });
        }
        if !seen.insert(q) {
            return Err(Violation::RegisterOverlap { stage, qubit: q });
        }
    }
    Ok(())
}

fn check_stage(p: &HybridProgram, i: usize, stage: &Stage) -> Result<(), Violation> {
    let width = p.num_qubits();
    match stage {
        Stage::Unitary(u) => disjoint(i, u.qubits(), width),
        Stage::Oracle(slots) => disjoint(i, slots.iter().flat_map(|s| s.qubits()), width),
        Stage::Flagged { slots, flag, .. } => {
            disjoint(i, slots.iter().flat_map(|s| s.qubits()).chain([*flag]), width)?;
            match p.registers.get(FLAG_REGISTER) {
                Some(r) if r.contains(*flag) => Ok(()),
                _ => Err(Violation::MissingFlag { stage: i, qubit: *flag }),
            }
        }
        Stage::Measure(q) => disjoint(i, q.iter().copied(), width),
        _ => Ok(()),
    }
}

/// Checks a program against the grammar of its model and its depth budget.
pub fn validate(p: &HybridProgram) -> Result<DepthReport, Violation> {
    for (i, s) in p.stages.iter().enumerate() {
        check_stage(p, i, s)?;
    }
    let report = match p.model {
        Model::Qc => blocks(p)?,
        Model::Qnc | Model::Cq => rounds(p)?,
    };
    if report.depth > p.depth_budget {
        return Err(Violation::DepthExceeded { used: report.depth, budget: p.depth_budget });
    }
    Ok(report)
}

fn rounds(p: &HybridProgram) -> Result<DepthReport, Violation> {
    let cq = p.model == Model::Cq;
    let mut report = DepthReport::default();
    let (mut live, mut after_layer, mut layers, mut done) = (false, false, 0usize, false);
    let close = |layers: usize, after_layer: bool, report: &mut DepthReport| {
        let depth = layers - usize::from(after_layer && layers > 0);
        report.depth = report.depth.max(depth);
        report.rounds += 1;
    };
    for (i, stage) in p.stages.iter().enumerate() {
        match stage {
            Stage::Unitary(_) => {
                if done && !cq {
                    return Err(Violation::Structure { stage: i, reason: "QNC allows a single circuit".into() });
                }
                live = true;
                after_layer = true;
                layers += 1;
            }
            Stage::Oracle(_) | Stage::Flagged { .. } => {
                if !after_layer {
                    return Err(Violation::OracleWithoutLayer { stage: i });
                }
                after_layer = false;
                report.oracle_layers += 1;
            }
            Stage::Measure(_) if cq => return Err(Violation::PartialMeasurement { stage: i }),
            Stage::Measure(_) | Stage::MeasureAll => {
                if live {
                    close(layers, after_layer, &mut report);
                    done = true;
                }
                (live, after_layer, layers) = (false, false, 0);
            }
            Stage::Classical { .. } => {
                if live {
                    return Err(Violation::CoherentClassicalCall { stage: i });
                }
                if !cq && !done {
                    return Err(Violation::Structure {
                        stage: i,
                        reason: "QNC allows classical steps only after the measurement".into(),
                    });
                }
            }
            Stage::Guard(_) => {
                if !cq || live {
                    return Err(Violation::MisplacedGuard { stage: i });
                }
            }
        }
    }
    if live {
        return Err(Violation::UnmeasuredRound);
    }
    Ok(report)
}

#[derive(PartialEq)]
enum Phase {
    Open,
    AfterLayer,
    AfterOracle,
}

fn blocks(p: &HybridProgram) -> Result<DepthReport, Violation> {
    let mut report = DepthReport::default();
    let mut phase = Phase::Open;
    for (i, stage) in p.stages.iter().enumerate() {
        phase = match (stage, phase) {
            (Stage::Unitary(_), Phase::Open) => {
                report.depth += 1;
                report.rounds += 1;
                Phase::AfterLayer
            }
            (Stage::Unitary(_), _) => return Err(Violation::TrailingUnitary { stage: i }),
            (Stage::Oracle(_) | Stage::Flagged { .. }, Phase::AfterLayer) => {
                report.oracle_layers += 1;
                Phase::AfterOracle
            }
            (Stage::Oracle(_) | Stage::Flagged { .. }, _) => return Err(Violation::OracleWithoutLayer { stage: i }),
            (Stage::Measure(_) | Stage::MeasureAll, _) => Phase::Open,
            (Stage::Classical { .. }, Phase::Open) => Phase::Open,
            (Stage::Classical { .. }, _) => return Err(Violation::CoherentClassicalCall { stage: i }),
            (Stage::Guard(_), _) => return Err(Violation::MisplacedGuard { stage: i }),
        };
    }
    if phase != Phase::Open {
        return Err(Violation::UnmeasuredRound);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Load, ProgramSlot};
    use crate::oracle::{ShadowMask, Slot};
    use crate::statevec::GateLayer;

    fn h(qs: &[usize]) -> GateLayer<f64> {
        GateLayer::hadamards(qs).unwrap()
    }

    fn slot() -> Vec<ProgramSlot> {
        vec![ProgramSlot::sub(0, vec![0], vec![1, 2])]
    }

    fn base(model: Model, budget: usize) -> HybridProgram {
        let mut p = HybridProgram::new(model, budget);
        p.alloc("q", 3).unwrap();
        p
    }

    #[test]
    fn qnc_with_extra_trailing_layer() {
        let mut p = base(Model::Qnc, 2);
        p.layer(h(&[0])).oracle(slot()).layer(h(&[0])).oracle(slot()).layer(h(&[0])).measure_all();
        p.classical("post", |_, _| Ok(()));
        let r = validate(&p).unwrap();
        assert_eq!((r.depth, r.oracle_layers), (2, 2));
        p.depth_budget = 1;
        assert_eq!(validate(&p).unwrap_err(), Violation::DepthExceeded { used: 2, budget: 1 });
    }

    #[test]
    fn qnc_rejects_classical_inside() {
        let mut p = base(Model::Qnc, 2);
        p.layer(h(&[0])).classical("peek", |_, _| Ok(())).oracle(slot()).measure_all();
        assert_eq!(validate(&p).unwrap_err().kind(), "coherent-classical-call");
    }

    #[test]
    fn qc_block_structure() {
        let mut p = base(Model::Qc, 2);
        p.layer(h(&[0])).oracle(slot()).measure(vec![]).classical("a", |_, _| Ok(()));
        p.layer(h(&[0])).measure(vec![0]);
        assert_eq!(validate(&p).unwrap().depth, 2);
        let mut bad = base(Model::Qc, 2);
        bad.layer(h(&[0])).oracle(slot()).layer(h(&[0])).measure_all();
        assert_eq!(validate(&bad).unwrap_err(), Violation::TrailingUnitary { stage: 2 });
    }

    #[test]
    fn cq_rounds() {
        let mut p = base(Model::Cq, 1);
        for _ in 0..3 {
            p.guard(|_| true).layer(h(&[0])).oracle(slot()).layer(h(&[0])).measure_all();
            p.classical("collect", |_, _| Ok(()));
        }
        let r = validate(&p).unwrap();
        assert_eq!((r.depth, r.rounds, r.oracle_layers), (1, 3, 3));
        let mut bad = base(Model::Cq, 1);
        bad.layer(h(&[0])).oracle(slot()).measure(vec![0]);
        assert_eq!(validate(&bad).unwrap_err().kind(), "partial-measurement");
        let mut bad = base(Model::Cq, 1);
        bad.layer(h(&[0])).guard(|_| true).measure_all();
        assert_eq!(validate(&bad).unwrap_err().kind(), "misplaced-guard");
        let mut bad = base(Model::Cq, 1);
        bad.layer(h(&[0])).oracle(slot());
        assert_eq!(validate(&bad).unwrap_err(), Violation::UnmeasuredRound);
    }

    #[test]
    fn overlap_range_and_flag() {
        let mut p = base(Model::Qnc, 1);
        p.layer_with_loads(h(&[0]), vec![Load { qubits: vec![0], cell: "c".into() }]).measure_all();
        assert_eq!(validate(&p).unwrap_err().kind(), "register-overlap");
        let mut p = base(Model::Qnc, 1);
        p.layer(h(&[5])).measure_all();
        assert_eq!(validate(&p).unwrap_err().kind(), "qubit-out-of-range");
        let mut p = base(Model::Qnc, 1);
        let flagged = Stage::Flagged { slots: vec![Slot::new(0, vec![0], vec![1])], mask: ShadowMask::empty(1), flag: 2 };
        p.layer(h(&[0])).push(flagged.clone()).measure_all();
        assert_eq!(validate(&p).unwrap_err().kind(), "missing-flag");
        let mut p = HybridProgram::new(Model::Qnc, 1);
        p.alloc("q", 2).unwrap();
        p.alloc(FLAG_REGISTER, 1).unwrap();
        p.layer(h(&[0])).push(flagged).measure_all();
        assert!(validate(&p).is_ok());
    }
}
