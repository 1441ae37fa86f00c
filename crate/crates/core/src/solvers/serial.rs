use rand::{Rng, RngCore};

use super::simon::{collect_rows, simon_query, x_qubits};
use super::{alloc_tracks, period_key, simon_round, tracks_for, Gf2Error, SimonTrack, SolverError, SolverReport, MAX_BATCHES};
use crate::models::{run, ClassicalMemory, ClassicalPort, HybridProgram, Model, ModelError, OracleSet};
use crate::problems::{pack_pair, SerialInstance, Variant};
use crate::statevec::GateLayer;

fn solved_key(level: usize) -> String {
    format!("solved{level}")
}

/// Outcome of the recovery step for one level.
enum Step {
    Solved(u64),
    Retry,
    Failed(String),
}

/// Checks a candidate period of `level` with two classical queries at a random point.
fn verify(port: &mut ClassicalPort<'_>, n: u32, level: usize, z: u64, s: u64) -> Result<bool, ModelError> {
    let x = port.rng().gen_range(0..1u64 << n);
    let a = port.query(level, pack_pair(x, z, n))?;
    let b = port.query(level, pack_pair(x ^ s, z, n))?;
    Ok(a.is_some() && a == b)
}

/// Collects this batch's rows for `level` and decides what to do next.
fn recover(
    m: &mut ClassicalMemory,
    port: &mut ClassicalPort<'_>,
    tracks: &[SimonTrack],
    n: u32,
    level: usize,
    last: bool,
) -> Result<Step, ModelError> {
    let z = if level == 0 { 0 } else { m.require(&period_key(level - 1))? };
    let step = match collect_rows(m, tracks, level, n)? {
        Ok(s) if verify(port, n, level, z, s)? => Step::Solved(s),
        Ok(_) | Err(Gf2Error::Inconsistent) => Step::Failed(format!("level {level}: no period fits the rows")),
        Err(Gf2Error::RankDeficient { .. }) if last => Step::Failed(format!("level {level}: rank deficient")),
        Err(Gf2Error::RankDeficient { .. }) => Step::Retry,
    };
    Ok(step)
}

/// Records the result of `level`; for the decision variant a failed terminal level means the decoy.
fn settle(m: &mut ClassicalMemory, step: Step, level: usize, c: usize, variant: Variant) {
    let terminal = level == c;
    match (step, variant) {
        (Step::Retry, _) => return,
        (Step::Solved(s), Variant::Search) => {
            m.set(&period_key(level), s);
            if terminal {
                m.output = Some(s);
            }
        }
        (Step::Solved(s), Variant::Decision) => {
            m.set(&period_key(level), s);
            if terminal {
                m.output = Some(0);
            }
        }
        (Step::Failed(_), Variant::Decision) if terminal => {
            m.set(&period_key(level), 0);
            m.output = Some(1);
        }
        (Step::Failed(why), _) => {
            m.set(&period_key(level), 0);
            m.failure.get_or_insert(why);
        }
    }
    m.set(&solved_key(level), 1);
}

/// One CQ_1 program solving levels `0..=c` in turn. Each round runs `3n` parallel Simon
/// tracks; a level gets up to eight rounds.
pub fn serial_cq1_program(n: u32, c: usize, variant: Variant) -> Result<HybridProgram, ModelError> {
    let mut p = HybridProgram::new(Model::Cq, 1);
    let tracks = alloc_tracks(&mut p, "", tracks_for(n), n, true)?;
    for level in 0..=c {
        for batch in 0..MAX_BATCHES {
            p.guard(move |m| m.failure.is_none() && m.cell(&solved_key(level)).is_none());
            let gate = (level > 0).then(|| period_key(level - 1));
            simon_round(&mut p, &tracks, level, gate.as_deref())?;
            p.measure_all();
            let tracks = tracks.clone();
            p.classical("recover", move |m, port| {
                if m.failure.is_some() || m.cell(&solved_key(level)).is_some() {
                    return Ok(());
                }
                let step = recover(m, port, &tracks, n, level, batch + 1 == MAX_BATCHES)?;
                settle(m, step, level, c, variant);
                Ok(())
            });
        }
    }
    Ok(p)
}

/// One QC program with two blocks per level: prepare and query, then the Hadamard and
/// measurement of that level's `x` registers. `2c + 2` blocks in total.
pub fn serial_qc_program(n: u32, c: usize, variant: Variant, budget: usize) -> Result<HybridProgram, ModelError> {
    let mut p = HybridProgram::new(Model::Qc, budget);
    for level in 0..=c {
        let tracks = alloc_tracks(&mut p, &format!("l{level}"), tracks_for(n), n, true)?;
        let gate = (level > 0).then(|| period_key(level - 1));
        simon_query(&mut p, &tracks, level, gate.as_deref())?;
        let xs = x_qubits(&tracks);
        p.measure(Vec::new());
        p.layer(GateLayer::hadamards(&xs)?);
        p.measure(xs);
        p.classical("recover", move |m, port| {
            if m.failure.is_some() {
                m.set(&period_key(level), 0);
                return Ok(());
            }
            let step = recover(m, port, &tracks, n, level, true)?;
            settle(m, step, level, c, variant);
            Ok(())
        });
    }
    Ok(p)
}

pub fn solve_serial_cq1(instance: &SerialInstance, rng: &mut dyn RngCore) -> Result<SolverReport, SolverError> {
    let p = serial_cq1_program(instance.n, instance.c, instance.variant)?;
    let out = run(&p, &OracleSet::new(instance.bundle.clone()), rng)?;
    Ok(SolverReport::from_run("serial-cq1", Model::Cq, 1, instance.c + 1, &out))
}

/// Runs the QC solver at the budget `2c + 2`.
pub fn solve_serial_qc(instance: &SerialInstance, rng: &mut dyn RngCore) -> Result<SolverReport, SolverError> {
    let budget = 2 * instance.c + 2;
    let p = serial_qc_program(instance.n, instance.c, instance.variant, budget)?;
    let out = run(&p, &OracleSet::new(instance.bundle.clone()), rng)?;
    Ok(SolverReport::from_run("serial-qc", Model::Qc, budget, instance.c + 1, &out))
}
