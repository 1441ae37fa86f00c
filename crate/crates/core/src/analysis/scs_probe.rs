use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{proportion_error, AnalysisError};
use crate::models::{run, trial_rng, validate, HybridProgram, Load, Model, ModelError, OracleSet, ProgramSlot};
use crate::oracle::decode;
use crate::problems::{sample_scs, unpack_pair};
use crate::statevec::GateLayer;

/// `1 - prod_{i<calls} (1 - i / 2^{n-1})`: chance that `calls` uniform draws from the
/// `2^{n-1}` images of a 2-to-1 function repeat.
pub fn birthday_collision(n: u32, calls: usize) -> f64 {
    1.0 - y_distinct_probability(n, calls)
}

/// `prod_{i<calls} (1 - i / 2^{n-1})`.
pub fn y_distinct_probability(n: u32, calls: usize) -> f64 {
    let images = (1u64 << (n - 1)) as f64;
    (0..calls).map(|i| (1.0 - i as f64 / images).max(0.0)).product()
}

/// A fixed CQ_2 adversary: `calls` classical stochastic calls with alternating `b`, then
/// `circuits` depth-2 circuits, each querying `p'` on a uniform `x` under a random key and
/// then the first shuffler level on the same `x`. It outputs `p(x) xor p(x')` if two answers
/// under one key came from different inputs, and a uniform nonzero guess otherwise.
pub fn scs_cq_adversary(n: u32, d: usize, calls: usize, circuits: usize) -> Result<HybridProgram, AnalysisError> {
    let nu = n as usize;
    let mut p = HybridProgram::new(Model::Cq, 2);
    let x = p.alloc("x", nu)?;
    let key = p.alloc("key", nu)?;
    let r = p.alloc("r", nu + 1)?;
    let hi = p.alloc("hi", nu)?;
    let t = p.alloc("t", 2 * nu + 1)?;
    p.classical("sample", move |mem, port| {
        for k in 0..calls {
            let b = (k % 2) as u64;
            let (y, v) = port.stochastic(0, b)?;
            mem.push("ys", y);
            mem.push("xs", unpack_pair(v, n).0);
        }
        Ok(())
    });
    let p_prime = d + 1;
    for c in 0..circuits {
        let cell = format!("key{c}");
        let draw = cell.clone();
        p.classical("draw-key", move |mem, port| {
            let k = port.rng().gen_range(0..1u64 << n);
            mem.set(&draw, k);
            Ok(())
        });
        p.layer_with_loads(GateLayer::hadamards(&x)?, vec![Load { qubits: key.clone(), cell }]);
        p.oracle(vec![ProgramSlot::sub(p_prime, x.iter().chain(&key).copied().collect(), r.clone())]);
        p.layer(GateLayer::empty());
        p.oracle(vec![ProgramSlot::sub(0, x.iter().chain(&hi).copied().collect(), t.clone())]);
        p.measure_all();
        let (x, r) = (x.clone(), r.clone());
        p.classical("read", move |mem, _| {
            if let Some(pv) = decode(mem.read(&r)?, n) {
                let k = mem.require(&format!("key{c}"))?;
                let xv = mem.read(&x)?;
                mem.push("hits", k << (2 * n) | xv << n | pv);
            }
            Ok(())
        });
    }
    p.classical("guess", move |mem, port| {
        let mask = (1u64 << n) - 1;
        let mut by_key: BTreeMap<u64, Vec<(u64, u64)>> = BTreeMap::new();
        for &h in mem.list("hits") {
            by_key.entry(h >> (2 * n)).or_default().push((h >> n & mask, h & mask));
        }
        let found = by_key
            .values()
            .find_map(|v| v.iter().find_map(|a| v.iter().find(|b| b.0 != a.0).map(|b| a.1 ^ b.1)));
        let out = match found {
            Some(s) => s,
            None => port.rng().gen_range(1..1u64 << n),
        };
        mem.output = Some(out);
        let ys = mem.list("ys").to_vec();
        let xs = mem.list("xs").to_vec();
        let distinct = ys.iter().collect::<BTreeSet<_>>().len() == ys.len();
        let pair = (0..ys.len()).any(|i| (0..i).any(|j| ys[i] == ys[j] && xs[i] != xs[j]));
        mem.set("y-distinct", u64::from(distinct));
        mem.set("collision", u64::from(pair));
        Ok(())
    });
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScsProbe {
    pub trials: usize,
    pub n: u32,
    pub d: usize,
    pub calls: usize,
    pub depth: usize,
    pub period_rate: f64,
    pub period_err: f64,
    /// `1 / (2^n - 1)`.
    pub guess_baseline: f64,
    pub collision_rate: f64,
    pub collision_err: f64,
    pub birthday: f64,
    pub y_distinct_rate: f64,
    pub y_distinct_err: f64,
    pub y_distinct_exact: f64,
    pub pass: bool,
}

/// Runs the fixed adversary on `trials` fresh d-SCS instances.
pub fn scs_hardness_probe(
    n: u32,
    d: usize,
    calls: usize,
    circuits: usize,
    trials: usize,
    seed: u64,
) -> Result<ScsProbe, AnalysisError> {
    let program = scs_cq_adversary(n, d, calls, circuits)?;
    let depth = validate(&program).map_err(ModelError::from)?.depth;
    if depth >= d {
        return Err(AnalysisError::Precondition(format!("adversary depth {depth} is not below the shuffler depth {d}")));
    }
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t as u64);
            let inst = sample_scs(d, n, &mut rng)?;
            let oracles = OracleSet::with_stochastic(inst.bundle.clone(), vec![inst.stochastic.clone()]);
            let out = run(&program, &oracles, &mut rng)?;
            let flag = |name: &str| out.memory.cell(name) == Some(1);
            Ok((out.output == Some(inst.period), flag("collision"), flag("y-distinct")))
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let rate = |f: fn(&(bool, bool, bool)) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / trials as f64;
    let (period_rate, collision_rate, y_distinct_rate) = (rate(|r| r.0), rate(|r| r.1), rate(|r| r.2));
    let guess_baseline = 1.0 / ((1u64 << n) - 1) as f64;
    let birthday = birthday_collision(n, calls);
    let y_distinct_exact = y_distinct_probability(n, calls);
    let period_err = proportion_error(guess_baseline, trials);
    let collision_err = proportion_error(birthday, trials);
    let y_distinct_err = proportion_error(y_distinct_exact, trials);
    let pass = period_rate - 3.0 * period_err <= guess_baseline
        && collision_rate - 3.0 * collision_err <= birthday
        && (y_distinct_rate - y_distinct_exact).abs() <= 3.0 * y_distinct_err;
    Ok(ScsProbe {
        trials,
        n,
        d,
        calls,
        depth,
        period_rate,
        period_err,
        guess_baseline,
        collision_rate,
        collision_err,
        birthday,
        y_distinct_rate,
        y_distinct_err,
        y_distinct_exact,
        pass,
    })
}
