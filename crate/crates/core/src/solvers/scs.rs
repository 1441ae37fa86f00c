use rand::RngCore;

use super::{rows_key, tracks_for, LinearSystemGF2, SolverError, SolverReport, MAX_BATCHES};
use crate::models::{run, ClassicalMemory, HybridProgram, Load, Model, ModelError, OracleSet, ProgramSlot};
use crate::problems::ScsInstance;
use crate::statevec::GateLayer;

/// Registers of one collision-to-Simon track. `y` and `x` receive the stochastic answer
/// `(x_b, y)`; `h` holds `h(y)` (loaded classically, or computed through `t` coherently);
/// `p` receives `p(x)` and `xf` is the flag of the `p'_inv` answer written back into `x`.
#[derive(Clone, Debug)]
pub struct ScsTrack {
    pub b: usize,
    pub y: Vec<usize>,
    pub x: Vec<usize>,
    pub hi: Vec<usize>,
    pub t: Vec<Vec<usize>>,
    pub h: Vec<usize>,
    pub p: Vec<usize>,
    pub xf: usize,
}

impl ScsTrack {
    fn alloc(prog: &mut HybridProgram, k: usize, n: u32, d: usize, coherent: bool) -> Result<Self, ModelError> {
        let n = n as usize;
        let shuffler = if coherent { d } else { 0 };
        Ok(Self {
            b: prog.alloc(&format!("b{k}"), 1)?[0],
            y: prog.alloc(&format!("y{k}"), n)?,
            x: prog.alloc(&format!("x{k}"), n)?,
            hi: if coherent { prog.alloc(&format!("hi{k}"), n)? } else { Vec::new() },
            t: (0..shuffler).map(|i| prog.alloc(&format!("t{k}.{i}"), 2 * n + 1)).collect::<Result<_, _>>()?,
            h: prog.alloc(&format!("h{k}"), n + usize::from(coherent))?,
            p: prog.alloc(&format!("p{k}"), n + 1)?,
            xf: prog.alloc(&format!("xf{k}"), 1)?[0],
        })
    }

    fn sample_slot(&self) -> ProgramSlot {
        ProgramSlot::stochastic(0, vec![self.b], self.y.iter().chain(&self.x).copied().collect())
    }

    fn hy(&self, n: usize) -> &[usize] {
        &self.h[..n]
    }

    fn p_prime_slot(&self, sub: usize, n: usize) -> ProgramSlot {
        ProgramSlot::sub(sub, self.x.iter().chain(self.hy(n)).copied().collect(), self.p.clone())
    }

    fn p_prime_inv_slot(&self, sub: usize, n: usize) -> ProgramSlot {
        let query = self.p[..n].iter().chain(self.hy(n)).copied().collect();
        ProgramSlot::sub(sub, query, self.x.iter().copied().chain([self.xf]).collect())
    }

    fn shuffler_slot(&self, i: usize, n: usize, d: usize) -> ProgramSlot {
        let query = if i == 0 { self.y.iter().chain(&self.hi).copied().collect() } else { self.t[i - 1][..2 * n].to_vec() };
        let response = if i == d { self.h.clone() } else { self.t[i].clone() };
        ProgramSlot::sub(i, query, response)
    }

    fn closing(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.b).chain(self.p[..n].iter().copied())
    }
}

fn h_key(k: usize) -> String {
    format!("h{k}")
}

/// Pushes the extended rows `(c, w)` with `c` at bit `n` and tries to recover `s` from
/// the unique nonzero solution `(1, s)`.
fn recover(m: &mut ClassicalMemory, tracks: &[ScsTrack], n: u32, last: bool) -> Result<(), ModelError> {
    let nn = n as usize;
    for t in tracks {
        if m.bit(t.p[nn]) == Some(true) {
            return Err(ModelError::Classical("p' answered ⊥ on a valid query".into()));
        }
        let row = m.read(&t.p[..nn])? | u64::from(m.bit(t.b) == Some(true)) << n;
        m.push(&rows_key(0), row);
    }
    let null = LinearSystemGF2::new(n + 1, m.list(&rows_key(0)).to_vec()).nullspace();
    match null.as_slice() {
        [v] if v >> n == 1 => m.output = Some(v & ((1 << n) - 1)),
        [_] => m.failure = Some("solution does not have the expected form".into()),
        [] => m.failure = Some("the only solution is zero".into()),
        _ if last => m.failure = Some("rank deficient".into()),
        _ => {}
    }
    Ok(())
}

/// The QC_4 program: sample and measure `y`, walk the shuffler classically, apply `p'` and
/// `p'_inv` coherently, then Hadamard and measure. `3n` parallel tracks.
pub fn scs_qc4_program(n: u32, d: usize) -> Result<HybridProgram, ModelError> {
    let mut prog = HybridProgram::new(Model::Qc, 4);
    let nn = n as usize;
    let tracks = (0..tracks_for(n)).map(|k| ScsTrack::alloc(&mut prog, k, n, d, false)).collect::<Result<Vec<_>, _>>()?;
    let bs: Vec<usize> = tracks.iter().map(|t| t.b).collect();
    prog.layer(GateLayer::hadamards(&bs)?);
    prog.oracle(tracks.iter().map(ScsTrack::sample_slot).collect());
    prog.measure(tracks.iter().flat_map(|t| t.y.iter().copied()).collect());
    let ys: Vec<Vec<usize>> = tracks.iter().map(|t| t.y.clone()).collect();
    prog.classical("walk", move |m, port| {
        for (k, y) in ys.iter().enumerate() {
            let mut path = vec![m.read(y)?];
            for i in 0..=d {
                let v = port.query(i, *path.last().expect("nonempty"))?;
                path.push(v.ok_or_else(|| ModelError::Classical(format!("shuffler answered ⊥ at level {i}")))?);
            }
            m.set(&h_key(k), *path.last().expect("nonempty"));
            port.reveal_path(path);
        }
        Ok(())
    });
    let loads = tracks.iter().enumerate().map(|(k, t)| Load { qubits: t.h.clone(), cell: h_key(k) }).collect();
    prog.layer_with_loads(GateLayer::empty(), loads);
    prog.oracle(tracks.iter().map(|t| t.p_prime_slot(d + 1, nn)).collect());
    prog.measure(Vec::new());
    prog.layer(GateLayer::empty());
    prog.oracle(tracks.iter().map(|t| t.p_prime_inv_slot(d + 2, nn)).collect());
    prog.measure(Vec::new());
    prog.layer(GateLayer::hadamards(&tracks.iter().flat_map(|t| t.closing(nn)).collect::<Vec<_>>())?);
    prog.measure_all();
    prog.classical("recover", move |m, _| recover(m, &tracks, n, true));
    Ok(prog)
}

/// The CQ program: one round evaluates `h(y)` through `d + 1` coherent shuffler calls,
/// `d + 4` oracle layers in all. Rounds of `3n` tracks, up to eight of them.
pub fn scs_cq_program(n: u32, d: usize, budget: usize) -> Result<HybridProgram, ModelError> {
    let mut prog = HybridProgram::new(Model::Cq, budget);
    let nn = n as usize;
    let tracks = (0..tracks_for(n)).map(|k| ScsTrack::alloc(&mut prog, k, n, d, true)).collect::<Result<Vec<_>, _>>()?;
    let bs: Vec<usize> = tracks.iter().map(|t| t.b).collect();
    let closing: Vec<usize> = tracks.iter().flat_map(|t| t.closing(nn)).collect();
    for batch in 0..MAX_BATCHES {
        prog.guard(|m| m.output.is_none() && m.failure.is_none());
        prog.layer(GateLayer::hadamards(&bs)?);
        prog.oracle(tracks.iter().map(ScsTrack::sample_slot).collect());
        for i in 0..=d {
            prog.layer(GateLayer::empty());
            prog.oracle(tracks.iter().map(|t| t.shuffler_slot(i, nn, d)).collect());
        }
        prog.layer(GateLayer::empty());
        prog.oracle(tracks.iter().map(|t| t.p_prime_slot(d + 1, nn)).collect());
        prog.layer(GateLayer::empty());
        prog.oracle(tracks.iter().map(|t| t.p_prime_inv_slot(d + 2, nn)).collect());
        prog.layer(GateLayer::hadamards(&closing)?);
        prog.measure_all();
        let tracks = tracks.clone();
        prog.classical("recover", move |m, _| {
            if m.output.is_some() || m.failure.is_some() {
                return Ok(());
            }
            recover(m, &tracks, n, batch + 1 == MAX_BATCHES)
        });
    }
    Ok(prog)
}

fn oracles(instance: &ScsInstance) -> OracleSet {
    OracleSet::with_stochastic(instance.bundle.clone(), vec![instance.stochastic.clone()])
}

pub fn solve_scs_qc4(instance: &ScsInstance, rng: &mut dyn RngCore) -> Result<SolverReport, SolverError> {
    let p = scs_qc4_program(instance.n, instance.d)?;
    let out = run(&p, &oracles(instance), rng)?;
    Ok(SolverReport::from_run("scs-qc4", Model::Qc, 4, 1, &out))
}

/// Runs the CQ solver under `budget`; budgets below `d + 4` fail validation.
pub fn solve_scs_cq(instance: &ScsInstance, budget: usize, rng: &mut dyn RngCore) -> Result<SolverReport, SolverError> {
    let p = scs_cq_program(instance.n, instance.d, budget)?;
    let out = run(&p, &oracles(instance), rng)?;
    Ok(SolverReport::from_run("scs-cq", Model::Cq, budget, 1, &out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{validate, Executor, Violation};
    use crate::problems::sample_scs;
    use crate::solvers::dot;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn qc4_state_after_third_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let inst = sample_scs(2, 4, &mut rng).unwrap();
        let p = scs_qc4_program(4, 2).unwrap();
        let set = oracles(&inst);
        let mut ex = Executor::new(&p, &set).unwrap();
        // Stop before the closing Hadamard layer.
        while !matches!(p.stages[ex.pc()], crate::models::Stage::Unitary(ref u) if !u.layer.is_empty()) || ex.pc() == 0 {
            ex.step(&mut rng).unwrap();
        }
        let y = ex.memory().read(&scs_tracks(&p)[0].0).unwrap();
        let pre = inst.preimages(y);
        let (b, preg) = (scs_tracks(&p)[0].1, scs_tracks(&p)[0].2.clone());
        let qubits: Vec<usize> = std::iter::once(b).chain(preg).collect();
        let sub = ex.state().subsystem(&qubits).unwrap().expect("pure");
        let amp = std::f64::consts::FRAC_1_SQRT_2;
        let (i0, i1) = ((inst.p[pre[0] as usize] << 1) as usize, (inst.p[pre[1] as usize] << 1 | 1) as usize);
        assert_eq!(inst.p[pre[0] as usize] ^ inst.p[pre[1] as usize], inst.period);
        let phase = sub.amplitude(i0) / Complex64::new(amp, 0.0);
        assert!((phase.norm() - 1.0).abs() < 1e-9);
        for (i, a) in sub.amplitudes().iter().enumerate() {
            let want = if i == i0 || i == i1 { phase * amp } else { Complex64::new(0.0, 0.0) };
            assert!((a - want).norm() < 1e-9, "index {i}");
        }
        assert_eq!(ex.depth().depth, 4);
    }

    fn scs_tracks(p: &HybridProgram) -> Vec<(Vec<usize>, usize, Vec<usize>)> {
        let y = p.registers.qubits("y0").unwrap();
        let b = p.registers.qubits("b0").unwrap()[0];
        let mut pr = p.registers.qubits("p0").unwrap();
        pr.pop();
        vec![(y, b, pr)]
    }

    #[test]
    fn qc4_rows_are_orthogonal_to_period() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for d in [0, 1, 3] {
            let inst = sample_scs(d, 4, &mut rng).unwrap();
            let r = solve_scs_qc4(&inst, &mut rng).unwrap();
            assert_eq!(r.depth, 4);
            let ext = inst.period | 1 << 4;
            assert!(r.rows[0].iter().all(|&v| !dot(v, ext)));
            assert!(r.answer == Some(inst.period) || r.failure.is_some());
        }
    }

    #[test]
    fn cq_budgets() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let inst = sample_scs(2, 4, &mut rng).unwrap();
        let r = solve_scs_cq(&inst, 8, &mut rng).unwrap();
        assert_eq!(r.answer, Some(inst.period), "{r:?}");
        assert_eq!(r.depth, 6);
        assert!(r.oracle_layers <= r.rounds * 8);
        assert!(matches!(
            solve_scs_cq(&inst, 2, &mut rng),
            Err(SolverError::Model(ModelError::Violation(Violation::DepthExceeded { used: 6, budget: 2 })))
        ));
        assert!(validate(&scs_cq_program(4, 2, 6).unwrap()).is_ok());
    }
}
