use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::find::{find_probability, random_low};
use super::AnalysisError;
use crate::models::trial_rng;
use crate::oracle::{FunctionTable, OracleBundle, QueryLedger, ShadowMask, Slot};
use crate::statevec::{bures, Backend, Ensemble, Gate, GateLayer, QuantumState};

/// `(|Pr_L - Pr_G|, B(L U rho, G U rho), sqrt(2 Pr[find]))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct O2hTriple {
    pub lhs: f64,
    pub bures: f64,
    pub rhs: f64,
}

impl O2hTriple {
    /// Compares squares: `B^2 = 2 - 2F` carries the rounding of `F` linearly, while `B`
    /// itself amplifies it through the square root near `F = 1`.
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs.powi(2) <= self.bures.powi(2) + tol && self.bures.powi(2) <= self.rhs.powi(2) + tol
    }
}

/// Oracle, mask, circuit and measured projector of one O2H check. `projector` lists basis
/// indices of the full register.
#[derive(Clone, Debug)]
pub struct O2hInstance {
    pub bundle: OracleBundle,
    pub mask: ShadowMask,
    pub layers: Vec<GateLayer<f64>>,
    pub slots: Vec<Slot>,
    pub flag: usize,
    pub projector: Vec<usize>,
    /// Weighted pure states; one member means a pure input.
    pub rho: Vec<(f64, QuantumState<f64>)>,
}

fn evolve(
    bundle: &OracleBundle,
    layers: &[GateLayer<f64>],
    slots: &[Slot],
    state: &QuantumState<f64>,
) -> Result<QuantumState<f64>, AnalysisError> {
    let mut s = state.clone();
    for layer in layers {
        Backend::apply_layer(&mut s, layer)?;
    }
    bundle.quantum_apply(&mut s, slots, &mut QueryLedger::default())?;
    Ok(s)
}

/// Evaluates both sides of the O2H chain with `G = make_shadow(L, mask)`.
pub fn check_o2h(inst: &O2hInstance) -> Result<O2hTriple, AnalysisError> {
    let shadow = inst.bundle.make_shadow(&inst.mask)?;
    let mut via_l = Vec::with_capacity(inst.rho.len());
    let mut via_g = Vec::with_capacity(inst.rho.len());
    let (mut pl, mut pg, mut pfind) = (0.0, 0.0, 0.0);
    for (w, psi) in &inst.rho {
        let l = evolve(&inst.bundle, &inst.layers, &inst.slots, psi)?;
        let g = evolve(&shadow, &inst.layers, &inst.slots, psi)?;
        pl += w * l.projector_expectation(&inst.projector);
        pg += w * g.projector_expectation(&inst.projector);
        pfind += w * find_probability(&inst.bundle, &inst.mask, psi, &inst.layers, &inst.slots, inst.flag)?;
        via_l.push((*w, l));
        via_g.push((*w, g));
    }
    let b = if via_l.len() == 1 {
        bures(&via_l[0].1, &via_g[0].1)?
    } else {
        bures(&Ensemble::new(via_l)?, &Ensemble::new(via_g)?)?
    };
    Ok(O2hTriple { lhs: (pl - pg).abs(), bures: b, rhs: (2.0 * pfind.max(0.0)).sqrt() })
}

/// Random 6-qubit instance: a 2-qubit query, a 3-qubit response (2 payload bits and the `⊥`
/// flag) into a random total function, the find flag on qubit 5, a random mask, two random
/// layers and either a pure state or a mixture of two or three. The `⊥` flag (qubit 4) stays
/// in `|0>` before the query, so answers inside `S` from `L` and `G` are orthogonal.
pub fn random_o2h_instance(rng: &mut ChaCha8Rng) -> Result<O2hInstance, AnalysisError> {
    let values: Vec<u64> = (0..4).map(|_| rng.gen_range(0..4)).collect();
    let bundle = OracleBundle::new("L", vec![FunctionTable::total(2, 2, &values)?]);
    let mask = ShadowMask::from_sets(vec![(0..4u64).filter(|_| rng.gen_bool(0.5)).collect()]);
    let tau = std::f64::consts::TAU;
    let u3 = |q: usize, rng: &mut ChaCha8Rng| Gate::u3(q, rng.gen::<f64>() * tau, rng.gen::<f64>() * tau, rng.gen::<f64>() * tau);
    let first = GateLayer::new((0..4).map(|q| u3(q, rng)).collect())?;
    let second = GateLayer::new(vec![Gate::cnot(0, 2), Gate::cnot(1, 3)])?;
    let members = if rng.gen_bool(0.5) { 1 } else { rng.gen_range(2..=3) };
    let raw: Vec<f64> = (0..members).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let rho = raw
        .iter()
        .map(|w| Ok((w / total, random_low(6, 4, rng)?)))
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let projector = (0..64).filter(|_| rng.gen_bool(0.5)).collect();
    Ok(O2hInstance {
        bundle,
        mask,
        layers: vec![first, second],
        slots: vec![Slot::new(0, vec![0, 1], vec![2, 3, 4])],
        flag: 5,
        projector,
        rho,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct O2hSweep {
    pub instances: usize,
    pub violations: usize,
    /// Largest `lhs^2 - bures^2` and `bures^2 - rhs^2` seen.
    pub worst_first: f64,
    pub worst_second: f64,
    pub mixed: usize,
}

/// Runs the chain on `instances` seeded random instances.
pub fn o2h_sweep(instances: usize, seed: u64, tol: f64) -> Result<O2hSweep, AnalysisError> {
    let results = (0..instances)
        .into_par_iter()
        .map(|i| {
            let inst = random_o2h_instance(&mut trial_rng(seed, i as u64))?;
            Ok((check_o2h(&inst)?, inst.rho.len() > 1))
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    Ok(O2hSweep {
        instances,
        violations: results.iter().filter(|(t, _)| !t.holds(tol)).count(),
        worst_first: results.iter().map(|(t, _)| t.lhs.powi(2) - t.bures.powi(2)).fold(f64::NEG_INFINITY, f64::max),
        worst_second: results.iter().map(|(t, _)| t.bures.powi(2) - t.rhs.powi(2)).fold(f64::NEG_INFINITY, f64::max),
        mixed: results.iter().filter(|(_, m)| *m).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn basis_instance(mask: ShadowMask) -> O2hInstance {
        let bundle = OracleBundle::new("L", vec![FunctionTable::total(2, 2, &[3, 1, 2, 0]).unwrap()]);
        // Query |01>; L answers 1 with the flag clear, so the response is |001>.
        let l_out = 0b00101;
        O2hInstance {
            bundle,
            mask,
            layers: vec![],
            slots: vec![Slot::new(0, vec![0, 1], vec![2, 3, 4])],
            flag: 5,
            projector: vec![l_out],
            rho: vec![(1.0, QuantumState::basis(6, 0b01).unwrap())],
        }
    }

    #[test]
    fn empty_mask_gives_zeros() {
        let t = check_o2h(&basis_instance(ShadowMask::empty(1))).unwrap();
        assert!(t.lhs.abs() < 1e-12 && t.bures.abs() < 1e-6 && t.rhs == 0.0, "{t:?}");
    }

    #[test]
    fn basis_query_inside_the_mask() {
        // G answers ⊥ on the query, so the two outputs are orthogonal.
        let t = check_o2h(&basis_instance(ShadowMask::from_sets(vec![(0..4).collect()]))).unwrap();
        let r2 = 2f64.sqrt();
        assert!((t.lhs - 1.0).abs() < 1e-12);
        assert!((t.bures - r2).abs() < 1e-9 && (t.rhs - r2).abs() < 1e-12);
        assert!(t.holds(1e-9));
    }

    #[test]
    fn superposed_query_splits_the_amplitude() {
        // (|00> + |01>)/sqrt2 with S = {01}: Pr[find] = 1/2 and F = 1/2.
        let mut inst = basis_instance(ShadowMask::from_sets(vec![[1].into()]));
        inst.rho = vec![(1.0, QuantumState::zero(6).unwrap())];
        inst.layers = vec![GateLayer::hadamards(&[0]).unwrap()];
        let t = check_o2h(&inst).unwrap();
        assert!((t.rhs - 1.0).abs() < 1e-12);
        assert!((t.bures - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mixed_inputs_use_density_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut seen = false;
        for _ in 0..40 {
            let inst = random_o2h_instance(&mut rng).unwrap();
            seen |= inst.rho.len() > 1;
            assert!(check_o2h(&inst).unwrap().holds(1e-9));
        }
        assert!(seen);
    }

    #[test]
    fn superposed_bottom_flag_breaks_the_bound() {
        // With the ⊥ flag in |->, G only adds a phase on the branch inside S, so the outputs
        // are orthogonal while Pr[find] = 1/2: the chain needs the flag in a basis state.
        let mut inst = basis_instance(ShadowMask::from_sets(vec![[1].into()]));
        inst.bundle = OracleBundle::new("L", vec![FunctionTable::total(2, 2, &[0, 0, 0, 0]).unwrap()]);
        inst.rho = vec![(1.0, QuantumState::zero(6).unwrap())];
        let minus = Gate::u3(4, std::f64::consts::FRAC_PI_2, std::f64::consts::PI, 0.0);
        inst.layers = vec![GateLayer::new(vec![Gate::h(0), minus]).unwrap()];
        let t = check_o2h(&inst).unwrap();
        assert!((t.bures - 2f64.sqrt()).abs() < 1e-9 && (t.rhs - 1.0).abs() < 1e-12, "{t:?}");
        assert!(!t.holds(1e-9));
    }

    #[test]
    fn sweep_has_no_violations() {
        let s = o2h_sweep(200, 5, 1e-9).unwrap();
        assert_eq!(s.violations, 0, "{s:?}");
        assert!(s.mixed > 0 && s.mixed < 200);
    }
}
