use rand::RngCore;

use super::{gf2_nullspace, period_key, rows_key, tracks_for, Gf2Error, LinearSystemGF2, SolverError, SolverReport};
use crate::models::{run, HybridProgram, Load, Model, ModelError, OracleSet, ProgramSlot};
use crate::problems::SimonInstance;
use crate::oracle::OracleBundle;
use crate::statevec::GateLayer;

/// Registers of one Simon track. The query is `z` (low bits) then `x`; `z` is empty for
/// plain `n`-bit oracles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimonTrack {
    pub x: Vec<usize>,
    pub z: Vec<usize>,
    pub r: Vec<usize>,
}

impl SimonTrack {
    pub fn query(&self) -> Vec<usize> {
        self.z.iter().chain(&self.x).copied().collect()
    }
}

pub fn alloc_tracks(p: &mut HybridProgram, prefix: &str, count: usize, n: u32, gated: bool) -> Result<Vec<SimonTrack>, ModelError> {
    let n = n as usize;
    (0..count)
        .map(|k| {
            Ok(SimonTrack {
                x: p.alloc(&format!("{prefix}x{k}"), n)?,
                z: if gated { p.alloc(&format!("{prefix}z{k}"), n)? } else { Vec::new() },
                r: p.alloc(&format!("{prefix}r{k}"), n + 1)?,
            })
        })
        .collect()
}

pub(crate) fn x_qubits(tracks: &[SimonTrack]) -> Vec<usize> {
    tracks.iter().flat_map(|t| t.x.iter().copied()).collect()
}

/// Hadamards on every `x` (loading each `z` from the cell `gate` if given), then one
/// oracle layer on `sub`.
pub fn simon_query(p: &mut HybridProgram, tracks: &[SimonTrack], sub: usize, gate: Option<&str>) -> Result<(), ModelError> {
    let loads = match gate {
        Some(cell) => tracks.iter().map(|t| Load { qubits: t.z.clone(), cell: cell.to_string() }).collect(),
        None => Vec::new(),
    };
    p.layer_with_loads(GateLayer::hadamards(&x_qubits(tracks))?, loads);
    p.oracle(tracks.iter().map(|t| ProgramSlot::sub(sub, t.query(), t.r.clone())).collect());
    Ok(())
}

/// `simon_query` followed by the closing Hadamard layer.
pub fn simon_round(p: &mut HybridProgram, tracks: &[SimonTrack], sub: usize, gate: Option<&str>) -> Result<(), ModelError> {
    simon_query(p, tracks, sub, gate)?;
    p.layer(GateLayer::hadamards(&x_qubits(tracks))?);
    Ok(())
}

/// Reads the `x` registers into the row list for `system` and attempts recovery.
pub(crate) fn collect_rows(
    m: &mut crate::models::ClassicalMemory,
    tracks: &[SimonTrack],
    system: usize,
    n: u32,
) -> Result<Result<u64, Gf2Error>, ModelError> {
    let key = rows_key(system);
    for t in tracks {
        let w = m.read(&t.x)?;
        m.push(&key, w);
    }
    Ok(gf2_nullspace(&LinearSystemGF2::new(n, m.list(&key).to_vec())))
}

/// A single QNC_1 circuit of `3n` parallel Simon tracks followed by GF(2) recovery.
pub fn simon_qnc_program(n: u32) -> Result<HybridProgram, ModelError> {
    let mut p = HybridProgram::new(Model::Qnc, 1);
    let tracks = alloc_tracks(&mut p, "", tracks_for(n), n, false)?;
    simon_round(&mut p, &tracks, 0, None)?;
    p.measure_all();
    p.classical("recover", move |m, _| {
        match collect_rows(m, &tracks, 0, n)? {
            Ok(s) => {
                m.set(&period_key(0), s);
                m.output = Some(s);
            }
            Err(e) => m.failure = Some(e.to_string()),
        }
        Ok(())
    });
    Ok(p)
}

pub fn solve_simon_qnc(instance: &SimonInstance, rng: &mut dyn RngCore) -> Result<SolverReport, SolverError> {
    let p = simon_qnc_program(instance.n)?;
    let set = OracleSet::new(OracleBundle::new("simon", vec![instance.table.clone()]));
    let out = run(&p, &set, rng)?;
    Ok(SolverReport::from_run("simon-qnc1", Model::Qnc, 1, 1, &out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{trial_rng, Executor};
    use crate::oracle::FunctionTable;
    use crate::problems::sample_simon;
    use crate::solvers::dot;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn one_track(n: u32) -> (HybridProgram, SimonTrack) {
        let mut p = HybridProgram::new(Model::Qnc, 1);
        let t = alloc_tracks(&mut p, "", 1, n, false).unwrap().remove(0);
        simon_round(&mut p, std::slice::from_ref(&t), 0, None).unwrap();
        p.measure_all();
        (p, t)
    }

    #[test]
    fn n1_always_zero() {
        let inst = SimonInstance { n: 1, table: FunctionTable::total(1, 1, &[0, 0]).unwrap(), period: 1 };
        let (p, t) = one_track(1);
        let set = OracleSet::new(OracleBundle::new("s", vec![inst.table]));
        for seed in 0..50 {
            let out = run(&p, &set, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert_eq!(out.memory.read(&t.x).unwrap(), 0);
        }
    }

    #[test]
    fn exact_distribution_uniform_on_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = sample_simon(4, &mut rng).unwrap();
        let (p, t) = one_track(4);
        let set = OracleSet::new(OracleBundle::new("s", vec![inst.table.clone()]));
        let mut ex = Executor::new(&p, &set).unwrap();
        for _ in 0..3 {
            ex.step(&mut rng).unwrap();
        }
        let dist = ex.state().distribution(&t.x).unwrap();
        for w in 0..16u64 {
            let want = if dot(w, inst.period) { 0.0 } else { 1.0 / 8.0 };
            assert!((dist.get(&w).copied().unwrap_or(0.0) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn empirical_distribution_tv() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let inst = sample_simon(4, &mut rng).unwrap();
        let (p, t) = one_track(4);
        let set = OracleSet::new(OracleBundle::new("s", vec![inst.table.clone()]));
        let runs = 10_000;
        let mut counts = BTreeMap::new();
        for k in 0..runs {
            let out = run(&p, &set, &mut trial_rng(7, k)).unwrap();
            *counts.entry(out.memory.read(&t.x).unwrap()).or_insert(0usize) += 1;
        }
        let tv: f64 = (0..16u64)
            .map(|w| {
                let want = if dot(w, inst.period) { 0.0 } else { 1.0 / 8.0 };
                (counts.get(&w).copied().unwrap_or(0) as f64 / runs as f64 - want).abs()
            })
            .sum::<f64>()
            / 2.0;
        assert!(tv <= 0.03, "tv {tv}");
    }

    #[test]
    fn full_rank_rate_at_n6() {
        // Fraction of 3n uniform draws from s^perp spanning it: at least 1 - 2^(n-1) 2^(-3n).
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut ok = 0;
        for _ in 0..200 {
            let inst = sample_simon(6, &mut rng).unwrap();
            let report = solve_simon_qnc(&inst, &mut rng).unwrap();
            assert!(report.rows[0].iter().all(|&w| !dot(w, inst.period)));
            ok += usize::from(report.succeeded(inst.period));
        }
        assert!(ok as f64 / 200.0 >= 0.99, "{ok}");
    }
}
