use nalgebra::DMatrix;
use num_complex::Complex;

use super::{QuantumState, StateError, MAX_DENSITY_QUBITS};
use crate::scalar::Scalar;

/// Finite mixture of pure states.
#[derive(Clone, Debug)]
pub struct Ensemble<T: Scalar> {
    members: Vec<(T, QuantumState<T>)>,
}

impl<T: Scalar> Ensemble<T> {
    /// Weights must be non-negative and sum to one within `1e-9`; widths must agree.
    pub fn new(members: Vec<(T, QuantumState<T>)>) -> Result<Self, StateError> {
        let total: f64 = members.iter().map(|(p, _)| p.as_f64()).sum();
        if members.is_empty() || (total - 1.0).abs() > 1e-9 || members.iter().any(|(p, _)| *p < T::zero()) {
            return Err(StateError::BadEnsemble(total));
        }
        let width = members[0].1.num_qubits();
        if let Some((_, s)) = members.iter().find(|(_, s)| s.num_qubits() != width) {
            return Err(StateError::WidthMismatch(width, s.num_qubits()));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[(T, QuantumState<T>)] {
        &self.members
    }

    pub fn num_qubits(&self) -> usize {
        self.members[0].1.num_qubits()
    }
}

/// Either a pure state or an ensemble, as accepted by the distance functions.
#[derive(Clone, Copy, Debug)]
pub enum StateRef<'a, T: Scalar> {
    Pure(&'a QuantumState<T>),
    Mixed(&'a Ensemble<T>),
}

impl<'a, T: Scalar> From<&'a QuantumState<T>> for StateRef<'a, T> {
    fn from(s: &'a QuantumState<T>) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a, T: Scalar> From<&'a Ensemble<T>> for StateRef<'a, T> {
    fn from(e: &'a Ensemble<T>) -> Self {
        StateRef::Mixed(e)
    }
}

impl<T: Scalar> StateRef<'_, T> {
    fn num_qubits(&self) -> usize {
        match self {
            StateRef::Pure(s) => s.num_qubits(),
            StateRef::Mixed(e) => e.num_qubits(),
        }
    }

    /// Columns `sqrt(p_i) |psi_i>` of a factor `A` with `rho = A A^†`.
    fn factor(&self) -> Vec<Vec<Complex<f64>>> {
        let col = |p: f64, s: &QuantumState<T>| -> Vec<Complex<f64>> {
            let r = p.sqrt();
            s.amplitudes().iter().map(|a| Complex::new(a.re.as_f64() * r, a.im.as_f64() * r)).collect()
        };
        match self {
            StateRef::Pure(s) => vec![col(1.0, s)],
            StateRef::Mixed(e) => e.members().iter().map(|(p, s)| col(p.as_f64(), s)).collect(),
        }
    }

    fn density(&self) -> Result<DMatrix<Complex<f64>>, StateError> {
        let n = self.num_qubits();
        if n > MAX_DENSITY_QUBITS {
            return Err(StateError::TooManyQubits(n));
        }
        let dim = 1 << n;
        let mut rho = DMatrix::<Complex<f64>>::zeros(dim, dim);
        let mut add = |p: f64, s: &QuantumState<T>| {
            let v: Vec<Complex<f64>> =
                s.amplitudes().iter().map(|a| Complex::new(a.re.as_f64(), a.im.as_f64())).collect();
            for i in 0..dim {
                for j in 0..dim {
                    rho[(i, j)] += v[i] * v[j].conj() * p;
                }
            }
        };
        match self {
            StateRef::Pure(s) => add(1.0, s),
            StateRef::Mixed(e) => e.members().iter().for_each(|(p, s)| add(p.as_f64(), s)),
        }
        Ok(rho)
    }
}

fn same_width<T: Scalar>(a: &StateRef<T>, b: &StateRef<T>) -> Result<(), StateError> {
    if a.num_qubits() != b.num_qubits() {
        return Err(StateError::WidthMismatch(a.num_qubits(), b.num_qubits()));
    }
    Ok(())
}

/// Fidelity `tr sqrt(sqrt(rho) rho' sqrt(rho))`; `|<a|b>|` for two pure states.
pub fn fidelity<'a, 'b, T: Scalar>(
    a: impl Into<StateRef<'a, T>>,
    b: impl Into<StateRef<'b, T>>,
) -> Result<T, StateError> {
    let (a, b) = (a.into(), b.into());
    same_width(&a, &b)?;
    if let (StateRef::Pure(x), StateRef::Pure(y)) = (a, b) {
        return Ok(x.inner(y)?.norm().min(T::one()));
    }
    // With rho = A A^† and rho' = B B^†, F is the trace norm of A^† B.
    let (fa, fb) = (a.factor(), b.factor());
    let gram = DMatrix::from_fn(fa.len(), fb.len(), |i, j| {
        fa[i].iter().zip(&fb[j]).map(|(x, y)| x.conj() * y).sum::<Complex<f64>>()
    });
    let f: f64 = gram.singular_values().iter().sum();
    Ok(T::lit(f.min(1.0)))
}

/// Trace distance `1/2 tr|rho - rho'|`.
pub fn trace_distance<'a, 'b, T: Scalar>(
    a: impl Into<StateRef<'a, T>>,
    b: impl Into<StateRef<'b, T>>,
) -> Result<T, StateError> {
    let (a, b) = (a.into(), b.into());
    same_width(&a, &b)?;
    if let (StateRef::Pure(_), StateRef::Pure(_)) = (a, b) {
        let f = fidelity(a, b)?;
        return Ok((T::one() - f * f).max(T::zero()).sqrt());
    }
    let diff = a.density()? - b.density()?;
    let eig = diff.symmetric_eigen();
    Ok(T::lit(0.5 * eig.eigenvalues.iter().map(|l| l.abs()).sum::<f64>()))
}

/// Bures distance `sqrt(2 - 2F)`.
pub fn bures<'a, 'b, T: Scalar>(
    a: impl Into<StateRef<'a, T>>,
    b: impl Into<StateRef<'b, T>>,
) -> Result<T, StateError> {
    let f = fidelity(a, b)?;
    Ok((T::lit(2.0) - T::lit(2.0) * f).max(T::zero()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::GateLayer;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};
    use rand::{seq::index::sample, Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type S = QuantumState<f64>;

    #[test]
    fn orthogonal_basis_states() {
        let (a, b) = (S::basis(1, 0).unwrap(), S::basis(1, 1).unwrap());
        assert!(fidelity(&a, &b).unwrap().abs() < 1e-12);
        assert!((bures(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn plus_versus_zero() {
        let z = S::zero(1).unwrap();
        let p = z.apply_layer(&GateLayer::hadamards(&[0]).unwrap()).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((fidelity(&z, &p).unwrap() - r).abs() < 1e-12);
        assert!((bures(&z, &p).unwrap() - (2.0 - 2.0 * r).sqrt()).abs() < 1e-12);
        assert!((trace_distance(&z, &p).unwrap() - r).abs() < 1e-12);
    }

    #[test]
    fn density_route_matches_pure_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = S::random(3, &mut rng).unwrap();
            let b = S::random(3, &mut rng).unwrap();
            let eb = Ensemble::new(vec![(1.0, b.clone())]).unwrap();
            assert!((fidelity(&a, &b).unwrap() - fidelity(&a, &eb).unwrap()).abs() < 1e-9);
            assert!((trace_distance(&a, &b).unwrap() - trace_distance(&a, &eb).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn maximally_mixed_qubit() {
        let mixed = Ensemble::new(vec![(0.5, S::basis(1, 0).unwrap()), (0.5, S::basis(1, 1).unwrap())]).unwrap();
        let zero = S::zero(1).unwrap();
        assert!((fidelity(&zero, &mixed).unwrap() - 0.5f64.sqrt()).abs() < 1e-9);
        assert!((trace_distance(&zero, &mixed).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn mixture_fidelity_is_sharp_at_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let members: Vec<(f64, S)> = (0..3).map(|k| (1.0 / 3.0 + 0.1 * (k as f64 - 1.0), S::random(6, &mut rng).unwrap())).collect();
        let e = Ensemble::new(members).unwrap();
        assert!((fidelity(&e, &e).unwrap() - 1.0).abs() < 1e-12);
        assert!(bures(&e, &e).unwrap() < 1e-6);
        // Commuting diagonal states: F is the classical Bhattacharyya overlap.
        let p = Ensemble::new(vec![(0.2, S::basis(2, 0).unwrap()), (0.8, S::basis(2, 3).unwrap())]).unwrap();
        let q = Ensemble::new(vec![(0.5, S::basis(2, 0).unwrap()), (0.5, S::basis(2, 1).unwrap())]).unwrap();
        assert!((fidelity(&p, &q).unwrap() - 0.1f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn width_mismatch_is_an_error() {
        let (a, b) = (S::zero(1).unwrap(), S::zero(2).unwrap());
        assert!(fidelity(&a, &b).is_err());
        assert!(Ensemble::new(vec![(0.5, a.clone()), (0.5, b)]).is_err());
        assert!(Ensemble::new(vec![(0.4, a)]).is_err());
    }

    #[test]
    fn measurement_gap_bounded_by_bures() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let a = S::random(6, &mut rng).unwrap();
            let b = S::random(6, &mut rng).unwrap();
            let k = rng.gen_range(1..64);
            let proj = sample(&mut rng, 64, k).into_vec();
            let gap = (a.projector_expectation(&proj) - b.projector_expectation(&proj)).abs();
            assert!(gap <= bures(&a, &b).unwrap() + 1e-9);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn distance_ordering(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = S::random(3, &mut rng).unwrap();
            let b = S::random(3, &mut rng).unwrap();
            let c = S::random(3, &mut rng).unwrap();
            let f = fidelity(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&f));
            prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-9);
            prop_assert!((f - fidelity(&b, &a).unwrap()).abs() < 1e-12);
            let td = trace_distance(&a, &b).unwrap();
            let bu = bures(&a, &b).unwrap();
            prop_assert!(td <= bu + 1e-9);
            prop_assert!(bu <= (2.0f64).sqrt() + 1e-12);
            let mix = Ensemble::new(vec![(0.3, b.clone()), (0.7, c.clone())]).unwrap();
            let fm = fidelity(&a, &mix).unwrap();
            prop_assert!(trace_distance(&a, &mix).unwrap() <= bures(&a, &mix).unwrap() + 1e-9);
            prop_assert!((0.0..=1.0 + 1e-9).contains(&fm));
        }
    }
}
