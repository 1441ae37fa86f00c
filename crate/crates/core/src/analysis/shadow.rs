use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::find::find_probability;
use super::{mean_and_error, AnalysisError};
use crate::models::{trial_rng, validate, DepthReport, HybridProgram, Model, ProgramSlot, FLAG_REGISTER};
use crate::oracle::{QueryLedger, Slot};
use crate::problems::{sample_serial, SimonProblem, Variant};
use crate::statevec::{Backend, Gate, GateLayer, QuantumState};

/// A fixed QNC circuit against a c-Serial oracle: each layer is a gate layer followed by at
/// most one oracle slot on registers `x`, `z` (query `z` then `x`) and `r`, and the output is
/// the measured `x`. The last qubit is reserved for find flags.
#[derive(Clone, Debug)]
pub struct QncAdversary {
    pub n: u32,
    pub layers: Vec<(GateLayer<f64>, Option<Slot>)>,
}

impl QncAdversary {
    fn registers(n: u32) -> (Vec<usize>, Vec<usize>, Vec<usize>, usize) {
        let n = n as usize;
        ((0..n).collect(), (n..2 * n).collect(), (2 * n..3 * n + 1).collect(), 3 * n + 1)
    }

    fn random_layer(n: u32, rng: &mut ChaCha8Rng) -> Result<GateLayer<f64>, AnalysisError> {
        let tau = std::f64::consts::TAU;
        let gates = (0..3 * n as usize + 1)
            .map(|q| Gate::u3(q, rng.gen::<f64>() * tau, rng.gen::<f64>() * tau, rng.gen::<f64>() * tau))
            .collect();
        Ok(GateLayer::new(gates)?)
    }

    /// Random single-qubit layers, each followed by one slot on a sub-oracle drawn from `0..subs`.
    pub fn random(n: u32, depth: usize, subs: usize, rng: &mut ChaCha8Rng) -> Result<Self, AnalysisError> {
        let (x, z, r, _) = Self::registers(n);
        let layers = (0..depth)
            .map(|_| {
                let layer = Self::random_layer(n, rng)?;
                let slot = Slot::new(rng.gen_range(0..subs), z.iter().chain(&x).copied().collect(), r.clone());
                Ok((layer, Some(slot)))
            })
            .collect::<Result<_, AnalysisError>>()?;
        Ok(Self { n, layers })
    }

    /// Random layers and no oracle calls.
    pub fn silent(n: u32, depth: usize, rng: &mut ChaCha8Rng) -> Result<Self, AnalysisError> {
        let layers = (0..depth).map(|_| Ok((Self::random_layer(n, rng)?, None))).collect::<Result<_, AnalysisError>>()?;
        Ok(Self { n, layers })
    }

    pub fn width(&self) -> usize {
        Self::registers(self.n).3 + 1
    }

    pub fn flag(&self) -> usize {
        Self::registers(self.n).3
    }

    pub fn output(&self) -> Vec<usize> {
        Self::registers(self.n).0
    }

    /// The circuit as a QNC program, for validation.
    pub fn program(&self, budget: usize) -> Result<HybridProgram, AnalysisError> {
        let n = self.n as usize;
        let mut p = HybridProgram::new(Model::Qnc, budget);
        let x = p.alloc("x", n)?;
        p.alloc("z", n)?;
        p.alloc("r", n + 1)?;
        p.alloc(FLAG_REGISTER, 1)?;
        for (layer, slot) in &self.layers {
            p.layer(layer.clone());
            if let Some(s) = slot {
                p.oracle(vec![ProgramSlot::sub(s.sub, s.query.clone(), s.response.clone())]);
            }
        }
        p.measure(x);
        Ok(p)
    }
}

/// Exact comparison of the real run and the shadowed run over sampled instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShadowProbe {
    pub instances: usize,
    pub depth: usize,
    pub tv_mean: f64,
    pub tv_max: f64,
    pub bound_mean: f64,
    /// Instances with output TV above the hybrid bound.
    pub violations: usize,
    /// Mean probability that the shadowed run outputs the terminal period.
    pub success_mean: f64,
    pub success_err: f64,
    /// Mean of `(1 - Pr[output = 0]) / (2^n - 1)`: the success of an output that ignores the
    /// period, which is uniform over nonzero strings.
    pub blind_mean: f64,
    /// Mean and standard error of `success - blind` per instance.
    pub excess_mean: f64,
    pub excess_err: f64,
    pub pass: bool,
}

/// Runs `adv` against c-Serial instances with oracle `L` and against the shadow chain whose
/// layer `i` answers `⊥` on the shadow set `S_i`. For each instance the output TV distance is
/// computed exactly and compared with `sum_i sqrt(2 Pr[find : U_i, rho_{i-1}])`, where
/// `rho_{i-1}` is the shadowed state before layer `i`.
pub fn shadow_equivalence_probe(adv: &QncAdversary, c: usize, instances: usize, seed: u64) -> Result<ShadowProbe, AnalysisError> {
    let depth = adv.layers.len();
    if depth > c + 1 {
        return Err(AnalysisError::Precondition(format!("depth {depth} exceeds the {} shadow sets", c + 1)));
    }
    let DepthReport { depth: used, .. } = validate(&adv.program(depth)?).map_err(crate::models::ModelError::from)?;
    let (n, flag, out) = (adv.n, adv.flag(), adv.output());
    let per_instance = (0..instances)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i as u64);
            let inst = sample_serial(c, n, &SimonProblem, Variant::Search, &mut rng)?;
            let mut real = QuantumState::<f64>::zero(adv.width())?;
            let mut shad = real.clone();
            let mut bound = 0.0;
            for (j, (layer, slot)) in adv.layers.iter().enumerate() {
                match slot {
                    Some(slot) => {
                        let mask = inst.shadow_sets(j + 1)?;
                        let slots = std::slice::from_ref(slot);
                        let pfind = find_probability(&inst.bundle, &mask, &shad, std::slice::from_ref(layer), slots, flag)?;
                        bound += (2.0 * pfind).sqrt();
                        let shadow = inst.bundle.make_shadow(&mask)?;
                        Backend::apply_layer(&mut real, layer)?;
                        Backend::apply_layer(&mut shad, layer)?;
                        inst.bundle.quantum_apply(&mut real, slots, &mut QueryLedger::default())?;
                        shadow.quantum_apply(&mut shad, slots, &mut QueryLedger::default())?;
                    }
                    None => {
                        Backend::apply_layer(&mut real, layer)?;
                        Backend::apply_layer(&mut shad, layer)?;
                    }
                }
            }
            let (pr, ps) = (real.marginal(&out)?, shad.marginal(&out)?);
            let tv = 0.5 * pr.iter().zip(&ps).map(|(a, b)| (a - b).abs()).sum::<f64>();
            let blind = (1.0 - ps[0]) / ((1u64 << n) - 1) as f64;
            Ok((tv, bound, ps[inst.answer() as usize], blind))
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let tvs: Vec<f64> = per_instance.iter().map(|r| r.0).collect();
    let bounds: Vec<f64> = per_instance.iter().map(|r| r.1).collect();
    let success: Vec<f64> = per_instance.iter().map(|r| r.2).collect();
    let blind: Vec<f64> = per_instance.iter().map(|r| r.3).collect();
    let excess: Vec<f64> = per_instance.iter().map(|r| r.2 - r.3).collect();
    let violations = per_instance.iter().filter(|r| r.0 > r.1 + 1e-9).count();
    let (success_mean, success_err) = mean_and_error(&success);
    let (excess_mean, excess_err) = mean_and_error(&excess);
    Ok(ShadowProbe {
        instances,
        depth: used,
        tv_mean: mean_and_error(&tvs).0,
        tv_max: tvs.iter().copied().fold(0.0, f64::max),
        bound_mean: mean_and_error(&bounds).0,
        violations,
        success_mean,
        success_err,
        blind_mean: mean_and_error(&blind).0,
        excess_mean,
        excess_err,
        pass: violations == 0 && excess_mean - 3.0 * excess_err <= 0.0,
    })
}
