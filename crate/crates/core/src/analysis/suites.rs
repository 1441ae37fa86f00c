use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    check_dom_hit, check_o2h, combinatorics_checks, compose_check, decompose_conditioned, dual_definition_check,
    find_probability, find_sweep, mean_and_error, nonuniformity_delta, o2h_sweep, random_advice, scs_hardness_probe,
    serial_find_experiment, shadow_equivalence_probe, AnalysisError, O2hInstance, PermDistribution, QncAdversary,
    ShufflerCondition,
};
use crate::models::trial_rng;
use crate::oracle::{FunctionTable, OracleBundle, ShadowMask, Slot};
use crate::problems::Shuffler;
use crate::statevec::{GateLayer, QuantumState};

/// One verified statement: a statistic, the bound it is held to and the outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub statistic: f64,
    pub bound: f64,
    /// `statistic ± 3σ` for Monte Carlo checks.
    pub ci: Option<[f64; 2]>,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    /// Deterministic check `statistic <= bound`.
    pub fn exact(name: &str, statistic: f64, bound: f64, detail: String) -> Self {
        Self { name: name.into(), statistic, bound, ci: None, pass: statistic <= bound, detail }
    }

    /// One-sided Monte Carlo check `estimate - 3σ <= bound`.
    pub fn upper(name: &str, estimate: f64, err: f64, bound: f64, detail: String) -> Self {
        let ci = [estimate - 3.0 * err, estimate + 3.0 * err];
        Self { name: name.into(), statistic: estimate, bound, ci: Some(ci), pass: ci[0] <= bound, detail }
    }

    /// Two-sided Monte Carlo check `|estimate - target| <= 3σ`.
    pub fn near(name: &str, estimate: f64, err: f64, target: f64, detail: String) -> Self {
        let ci = [estimate - 3.0 * err, estimate + 3.0 * err];
        let pass = (estimate - target).abs() <= 3.0 * err;
        Self { name: name.into(), statistic: estimate, bound: target, ci: Some(ci), pass, detail }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    O2h,
    Find,
    Shuffler,
    Decomposition,
    Combinatorics,
    HardnessProbe,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::O2h, Suite::Find, Suite::Shuffler, Suite::Decomposition, Suite::Combinatorics, Suite::HardnessProbe];

    pub fn name(self) -> &'static str {
        match self {
            Suite::O2h => "o2h",
            Suite::Find => "find",
            Suite::Shuffler => "shuffler",
            Suite::Decomposition => "decomposition",
            Suite::Combinatorics => "combinatorics",
            Suite::HardnessProbe => "hardness-probe",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`; expected one of o2h, find, shuffler, decomposition, combinatorics, hardness-probe"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    /// Monte Carlo sample counts are divided by this factor.
    pub scale_down: usize,
    pub checks: Vec<Check>,
    pub pass: bool,
}

/// Runs every check of `suite`. Sample counts are the full ones divided by `scale_down`.
pub fn run_suite(suite: Suite, seed: u64, scale_down: usize) -> Result<SuiteReport, AnalysisError> {
    let k = scale_down.max(1);
    let checks = match suite {
        Suite::O2h => o2h_checks(seed, k)?,
        Suite::Find => find_checks(seed, k)?,
        Suite::Shuffler => shuffler_checks(seed, k)?,
        Suite::Decomposition => decomposition_checks(seed)?,
        Suite::Combinatorics => combinatorics_checks(12),
        Suite::HardnessProbe => hardness_checks(seed, k)?,
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(SuiteReport { suite, seed, scale_down: k, checks, pass })
}

fn o2h_checks(seed: u64, k: usize) -> Result<Vec<Check>, AnalysisError> {
    let tol = 1e-9;
    let sweep = o2h_sweep(1000 / k, seed, tol)?;
    let basis = |mask: ShadowMask| -> Result<O2hInstance, AnalysisError> {
        Ok(O2hInstance {
            bundle: OracleBundle::new("L", vec![FunctionTable::total(2, 2, &[3, 1, 2, 0])?]),
            mask,
            layers: vec![],
            slots: vec![Slot::new(0, vec![0, 1], vec![2, 3, 4])],
            flag: 5,
            projector: vec![0b00101],
            rho: vec![(1.0, QuantumState::basis(6, 0b01)?)],
        })
    };
    let empty = check_o2h(&basis(ShadowMask::empty(1))?)?;
    let full = check_o2h(&basis(ShadowMask::from_sets(vec![(0..4).collect()]))?)?;
    let r2 = 2f64.sqrt();
    let full_gap = (full.lhs - 1.0).abs().max((full.bures - r2).abs()).max((full.rhs - r2).abs());
    Ok(vec![
        Check::exact(
            "o2h-chain",
            sweep.violations as f64,
            0.0,
            format!(
                "{} random 6-qubit instances ({} mixed); worst squared gaps {:.3e} and {:.3e}",
                sweep.instances, sweep.mixed, sweep.worst_first, sweep.worst_second
            ),
        ),
        Check::exact("o2h-empty-mask", empty.lhs.max(empty.bures.powi(2)).max(empty.rhs), tol, format!("{empty:?}")),
        Check::exact("o2h-basis-query-in-mask", full_gap, tol, format!("{full:?}")),
    ])
}

fn find_checks(seed: u64, k: usize) -> Result<Vec<Check>, AnalysisError> {
    let sweep = find_sweep(4, 100, 10_000 / k, seed)?;
    let failing = sweep.iter().filter(|c| !c.experiment.pass).count();
    let worst = sweep
        .iter()
        .map(|c| c.experiment.lo - c.experiment.bound)
        .fold(f64::NEG_INFINITY, f64::max);
    let serial = serial_find_experiment(4, 2, 10_000 / k, seed)?;
    // A uniform single query against every singleton S, averaged exactly.
    let bundle = OracleBundle::new("f", vec![FunctionTable::total(4, 1, &[0; 16])?]);
    let slot = Slot::new(0, vec![0, 1, 2, 3], vec![4, 5]);
    let layer = GateLayer::hadamards(&[0, 1, 2, 3])?;
    let start = QuantumState::zero(7)?;
    let mut total = 0.0;
    for s in 0..16u64 {
        let mask = ShadowMask::from_sets(vec![[s].into()]);
        total += find_probability(&bundle, &mask, &start, std::slice::from_ref(&layer), std::slice::from_ref(&slot), 6)?;
    }
    Ok(vec![
        Check::exact(
            "find-sweep",
            failing as f64,
            0.0,
            format!("100 configurations at n=4; largest (mean - 3σ) - q̄p = {worst:.3e}"),
        ),
        Check::upper(
            "find-serial-first-shadow",
            serial.mean,
            serial.std_err,
            serial.bound,
            format!("{} trials, c=2, n=4, one slot", serial.trials),
        ),
        Check::exact(
            "find-uniform-singleton",
            (total / 16.0 - 1.0 / 16.0).abs(),
            1e-12,
            format!("exact average {}", total / 16.0),
        ),
    ])
}

fn shuffler_checks(seed: u64, k: usize) -> Result<Vec<Check>, AnalysisError> {
    let (n, d) = (4u32, 2usize);
    let trials = 10_000 / k;
    let mismatches = dual_definition_check(seed..seed + 100, n, 4)?;
    let mut checks = vec![Check::exact("dual-definition", mismatches as f64, 0.0, "100 seeds, n=4, d in 1..=4".into())];
    let target = 1.0 / (1u64 << n) as f64;
    for i in 1..=d {
        let h = check_dom_hit(&ShufflerCondition::default(), n, d, 0xA5, i, trials, seed + i as u64, 0.0)?;
        checks.push(Check::near(
            &format!("dom-hit-uniform-{i}"),
            h.estimate,
            h.std_err,
            target,
            format!("{} trials; bound {:.4}", h.trials, h.bound),
        ));
    }
    let sh = Shuffler::sample(d, n, &(0..16).collect::<Vec<_>>(), &mut trial_rng(seed, u64::MAX))?;
    let path = sh.paths_star()[0].clone();
    let x = (0..256).find(|v| path[1..].iter().all(|p| p != v)).unwrap_or(0);
    let cond = ShufflerCondition { paths: vec![path], ..Default::default() };
    let h = check_dom_hit(&cond, n, d, x, 1, trials, seed + 7, 0.0)?;
    checks.push(Check::near(
        "dom-hit-unrelated-path",
        h.estimate,
        h.std_err,
        target,
        format!("exact conditioned value {:.5}", h.exact),
    ));
    checks.push(Check::upper("dom-hit-bound", h.estimate, h.std_err, h.bound, "2^δ N / (M - #facts), δ = 0".into()));
    let cond = ShufflerCondition { not_in_dom: vec![(2, x)], ..Default::default() };
    let h = check_dom_hit(&cond, n, d, x, 2, trials / 10, seed + 8, 0.0)?;
    checks.push(Check::exact("dom-hit-excluded", h.estimate, 0.0, format!("{} hits", h.hits)));
    Ok(checks)
}

fn decomposition_checks(seed: u64) -> Result<Vec<Check>, AnalysisError> {
    let delta = 1.0;
    let (mut recon, mut weight, mut residual, mut size, mut first, mut comp_delta) = (0.0f64, 0.0f64, f64::MIN, 0.0f64, 0.0f64, f64::MIN);
    let mut runs = 0usize;
    for n in [3usize, 4] {
        let u = PermDistribution::uniform(n)?;
        let gamma = 1.0 / (1..=n).product::<usize>() as f64;
        let cap = 2.0 * (1.0 / gamma).log2() / delta;
        for j in 0..20 {
            let g = random_advice(n, seed.wrapping_mul(31).wrapping_add(j))?;
            let advice = |q: &[u8]| g[q];
            for r in 0..4u8 {
                let Ok(res) = decompose_conditioned(&u, &advice, r, gamma, delta, &[], 0.0) else { continue };
                runs += 1;
                recon = recon.max(res.reconstruction_error());
                weight = weight.max((res.total_weight() - 1.0).abs());
                residual = residual.max(res.residual_weight - gamma);
                size = size.max(res.max_fixed() as f64 / cap);
                if let Some(k) = res.first_fixed() {
                    first = first.max(k as f64 / res.first_cap);
                }
                for c in &res.components {
                    comp_delta = comp_delta.max(nonuniformity_delta(&c.dist, &c.fixed)?.0 - delta);
                }
            }
        }
    }
    let mut worst_composed = 0.0f64;
    for j in 0..20 {
        let u = PermDistribution::uniform(4)?;
        let g1 = random_advice(4, seed.wrapping_add(1000 + j))?;
        let g2 = random_advice(4, seed.wrapping_add(2000 + j))?;
        let r1 = g1[&vec![0u8, 1, 2, 3]];
        let rep = compose_check(&u, &|q| g1[q], r1, &|q| g2[q], 1.0 / 24.0, delta, &[])?;
        worst_composed = worst_composed.max(rep.worst_delta);
    }
    let point = nonuniformity_delta(&PermDistribution::point(vec![1, 2, 0])?, &[])?.0;
    let fixed = PermDistribution::uniform(3)?
        .conditioned(|q| q[0] == 0)
        .ok_or_else(|| AnalysisError::Precondition("empty condition".into()))?
        .0;
    let (fixed_delta, witness) = nonuniformity_delta(&fixed, &[])?;
    let log3 = 3f64.log2();
    Ok(vec![
        Check::exact("decomposition-reconstruction", recon, 1e-9, format!("{runs} decompositions at N=3 and N=4")),
        Check::exact("decomposition-total-weight", weight, 1e-9, "|Σα + γ' - 1|".into()),
        Check::exact("decomposition-residual", residual, 0.0, "γ' - γ".into()),
        Check::exact("decomposition-part-size", size, 1.0 - 1e-12, "largest |S_i| / (2m/δ)".into()),
        Check::exact("decomposition-first-part-size", first, 1.0 - 1e-12, "first |S| / (m/δ)".into()),
        Check::exact("decomposition-component-delta", comp_delta, 1e-9, "δ* - δ over components".into()),
        Check::exact("composition-delta", worst_composed, 2.0 * delta + 1e-9, "20 advice pairs at N=4".into()),
        Check::exact("nonuniformity-point-mass", (point - log3).abs(), 1e-12, format!("δ* = {point}")),
        Check::exact(
            "nonuniformity-fixed-point",
            (fixed_delta - log3).abs() + f64::from(u8::from(witness != vec![(0, 0)])),
            1e-12,
            format!("δ* = {fixed_delta}, witness {witness:?}"),
        ),
    ])
}

fn hardness_checks(seed: u64, k: usize) -> Result<Vec<Check>, AnalysisError> {
    let trials = 10_000 / k;
    let adversaries = 20.min(trials).max(1);
    let probes = (0..adversaries as u64)
        .map(|a| {
            let adv = QncAdversary::random(4, 2, 3, &mut trial_rng(seed, u64::MAX - a))?;
            shadow_equivalence_probe(&adv, 2, trials / adversaries, seed.wrapping_add(a))
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let mut rng = trial_rng(seed, u64::MAX - adversaries as u64);
    let silent = shadow_equivalence_probe(&QncAdversary::silent(4, 2, &mut rng)?, 2, trials / 10, seed)?;
    let scs = scs_hardness_probe(4, 3, 4, 2, trials, seed)?;
    let violations: usize = probes.iter().map(|p| p.violations).sum();
    let instances: usize = probes.iter().map(|p| p.instances).sum();
    let tv_max = probes.iter().map(|p| p.tv_max).fold(0.0, f64::max);
    let tv_mean = probes.iter().map(|p| p.tv_mean).sum::<f64>() / probes.len() as f64;
    let bound_mean = probes.iter().map(|p| p.bound_mean).sum::<f64>() / probes.len() as f64;
    // Adversaries are the sampling unit for the family-level guess: their means are i.i.d.
    let (success, success_err) = mean_and_error(&probes.iter().map(|p| p.success_mean).collect::<Vec<_>>());
    let worst = probes
        .iter()
        .map(|p| p.excess_mean - 3.0 * p.excess_err)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        Check::exact(
            "shadow-tv-vs-hybrid-bound",
            violations as f64,
            0.0,
            format!("{instances} instances over {adversaries} adversaries; mean TV {tv_mean:.4}, max TV {tv_max:.4}, mean bound {bound_mean:.4}"),
        ),
        Check::upper(
            "shadow-period-guess",
            success,
            success_err,
            1.0 / 16.0,
            format!("mean over {adversaries} random adversaries of the shadowed run's period success; baseline 1/2^n"),
        ),
        Check::exact(
            "shadow-period-blind",
            worst,
            0.0,
            "largest (excess - 3σ) per adversary, excess = success - (1 - Pr[output 0]) / (2^n - 1)".into(),
        ),
        Check::exact("shadow-silent-adversary", silent.tv_max, 0.0, "no oracle calls".into()),
        Check::upper(
            "scs-period",
            scs.period_rate,
            scs.period_err,
            scs.guess_baseline,
            format!("{} trials, depth {}, d = 3", scs.trials, scs.depth),
        ),
        Check::upper(
            "scs-collision",
            scs.collision_rate,
            scs.collision_err,
            scs.birthday,
            format!("{} stochastic calls; birthday bound", scs.calls),
        ),
        Check::near(
            "scs-y-distinct",
            scs.y_distinct_rate,
            scs.y_distinct_err,
            scs.y_distinct_exact,
            "exact product over the calls".into(),
        ),
    ])
}
