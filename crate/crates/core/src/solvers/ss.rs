use rand::{Rng, RngCore};

use super::{gf2_nullspace, period_key, rows_key, tracks_for, Gf2Error, LinearSystemGF2, SolverError, SolverReport, MAX_BATCHES};
use crate::models::{run, ClassicalPort, HybridProgram, Model, ModelError, OracleSet, ProgramSlot};
use crate::problems::{SsInstance, Variant};
use crate::statevec::GateLayer;

/// Registers of one shuffled-Simon track: `x` with the zero high half `hi`, the
/// intermediate shuffler outputs `t[0..d]` (each `2n + 1` qubits) and the final `y`.
#[derive(Clone, Debug)]
struct Track {
    x: Vec<usize>,
    hi: Vec<usize>,
    t: Vec<Vec<usize>>,
    y: Vec<usize>,
}

impl Track {
    /// Query register of `f_i`.
    fn query(&self, i: usize, n: usize) -> Vec<usize> {
        match i {
            0 => self.x.iter().chain(&self.hi).copied().collect(),
            i => self.t[i - 1][..2 * n].to_vec(),
        }
    }

    fn response(&self, i: usize, d: usize) -> Vec<usize> {
        if i == d {
            self.y.clone()
        } else {
            self.t[i].clone()
        }
    }
}

fn alloc(p: &mut HybridProgram, k: usize, n: u32, d: usize) -> Result<Track, ModelError> {
    let n = n as usize;
    Ok(Track {
        x: p.alloc(&format!("x{k}"), n)?,
        hi: p.alloc(&format!("hi{k}"), n)?,
        t: (0..d).map(|i| p.alloc(&format!("t{k}.{i}"), 2 * n + 1)).collect::<Result<_, _>>()?,
        y: p.alloc(&format!("y{k}"), n + 1)?,
    })
}

/// Forward calls `f_0, …, f_d`, then `f_{d-1}, …, f_0` again to clear the intermediates:
/// `2d + 1` oracle layers between Hadamards on `x`.
fn round(p: &mut HybridProgram, tracks: &[Track], n: u32, d: usize) -> Result<(), ModelError> {
    let xs: Vec<usize> = tracks.iter().flat_map(|t| t.x.iter().copied()).collect();
    let call = |i: usize| -> Vec<ProgramSlot> {
        tracks.iter().map(|t| ProgramSlot::sub(i, t.query(i, n as usize), t.response(i, d))).collect()
    };
    p.layer(GateLayer::hadamards(&xs)?).oracle(call(0));
    for i in (1..=d).chain((0..d).rev()) {
        p.layer(GateLayer::empty()).oracle(call(i));
    }
    p.layer(GateLayer::hadamards(&xs)?);
    Ok(())
}

/// One circuit of `tracks` shuffled-Simon rounds, unmeasured, for inspecting the state.
pub fn ss_round_program(n: u32, d: usize, tracks: usize) -> Result<(HybridProgram, Vec<Vec<usize>>), ModelError> {
    let mut p = HybridProgram::new(Model::Qnc, 2 * d + 1);
    let ts = (0..tracks).map(|k| alloc(&mut p, k, n, d)).collect::<Result<Vec<_>, _>>()?;
    round(&mut p, &ts, n, d)?;
    p.measure_all();
    Ok((p, ts.into_iter().map(|t| t.x).collect()))
}

fn walk(port: &mut ClassicalPort<'_>, d: usize, x: u64) -> Result<Option<u64>, ModelError> {
    let mut v = x;
    for i in 0..=d {
        match port.query(i, v)? {
            Some(next) => v = next,
            None => return Ok(None),
        }
    }
    Ok(Some(v))
}

/// CQ program with rounds of `3n` parallel tracks, each round `2d + 1` deep.
pub fn ss_cq_program(n: u32, d: usize, budget: usize) -> Result<HybridProgram, ModelError> {
    let mut p = HybridProgram::new(Model::Cq, budget);
    let tracks = (0..tracks_for(n)).map(|k| alloc(&mut p, k, n, d)).collect::<Result<Vec<_>, _>>()?;
    let done = period_key(0);
    for batch in 0..MAX_BATCHES {
        let key = done.clone();
        p.guard(move |m| m.cell(&key).is_none() && m.failure.is_none());
        round(&mut p, &tracks, n, d)?;
        p.measure_all();
        let (tracks, key) = (tracks.clone(), done.clone());
        p.classical("recover", move |m, port| {
            if m.cell(&key).is_some() || m.failure.is_some() {
                return Ok(());
            }
            for t in &tracks {
                let w = m.read(&t.x)?;
                m.push(&rows_key(0), w);
            }
            match gf2_nullspace(&LinearSystemGF2::new(n, m.list(&rows_key(0)).to_vec())) {
                Ok(s) => {
                    let x = port.rng().gen_range(0..1u64 << n);
                    let (a, b) = (walk(port, d, x)?, walk(port, d, x ^ s)?);
                    if a.is_some() && a == b {
                        m.set(&key, s);
                        m.output = Some(s);
                    } else {
                        m.failure = Some("recovered period fails the classical check".into());
                    }
                }
                Err(Gf2Error::RankDeficient { .. }) if batch + 1 < MAX_BATCHES => {}
                Err(e) => m.failure = Some(e.to_string()),
            }
            Ok(())
        });
    }
    Ok(p)
}

/// Runs the CQ solver at the budget `2d + 1`.
pub fn solve_ss_cq(instance: &SsInstance, rng: &mut dyn RngCore) -> Result<SolverReport, SolverError> {
    if instance.variant != Variant::Search {
        return Err(SolverError::Unsupported("the shuffled-Simon solver handles the search variant".into()));
    }
    let budget = 2 * instance.d + 1;
    let p = ss_cq_program(instance.n, instance.d, budget)?;
    let out = run(&p, &OracleSet::new(instance.bundle.clone()), rng)?;
    Ok(SolverReport::from_run("ss-cq", Model::Cq, budget, 1, &out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{validate, Executor, Violation};
    use crate::problems::sample_ss;
    use crate::solvers::dot;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uncomputed_round_matches_plain_simon() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let inst = sample_ss(2, 4, Variant::Search, &mut rng).unwrap();
        let (p, xs) = ss_round_program(4, 2, 1).unwrap();
        let set = OracleSet::new(inst.bundle.clone());
        let mut ex = Executor::new(&p, &set).unwrap();
        while ex.pc() + 1 < p.stages.len() {
            ex.step(&mut rng).unwrap();
        }
        let dist = ex.state().distribution(&xs[0]).unwrap();
        let s = inst.period.unwrap();
        for w in 0..16u64 {
            let want = if dot(w, s) { 0.0 } else { 1.0 / 8.0 };
            assert!((dist.get(&w).copied().unwrap_or(0.0) - want).abs() < 1e-12);
        }
        assert_eq!(ex.ledger().quantum_layers, 5);
    }

    #[test]
    fn solves_and_counts_layers() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..5 {
            let inst = sample_ss(2, 4, Variant::Search, &mut rng).unwrap();
            let r = solve_ss_cq(&inst, &mut rng).unwrap();
            assert_eq!(r.answer, inst.period, "{r:?}");
            assert_eq!(r.oracle_layers, r.rounds * 5);
            assert_eq!(r.depth, 5);
        }
        let p = ss_cq_program(4, 2, 4).unwrap();
        assert_eq!(validate(&p), Err(Violation::DepthExceeded { used: 5, budget: 4 }));
    }
}
