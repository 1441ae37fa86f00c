use num_complex::Complex;
use rand::{Rng, RngCore};
use rand_distr::StandardNormal;

use super::registers::{deposit, extract};
use super::{check_qubits, Backend, Gate, GateLayer, StateError, MAX_DENSE_QUBITS};
use crate::scalar::Scalar;

/// Normalized amplitude vector over `num_qubits` qubits. Basis index bit `q` is qubit `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState<T: Scalar> {
    num_qubits: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Scalar> QuantumState<T> {
    pub fn zero(num_qubits: usize) -> Result<Self, StateError> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Result<Self, StateError> {
        if num_qubits > MAX_DENSE_QUBITS {
            return Err(StateError::TooManyQubits(num_qubits));
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << num_qubits];
        let slot = amps.get_mut(index).ok_or(StateError::QubitOutOfRange {
            qubit: index,
            width: num_qubits,
        })?;
        *slot = Complex::new(T::one(), T::zero());
        Ok(Self { num_qubits, amps })
    }

    /// Wraps an amplitude vector, checking length and norm within `1e-9`.
    pub fn from_amplitudes(amps: Vec<Complex<T>>) -> Result<Self, StateError> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(StateError::BadLength(len));
        }
        let num_qubits = len.trailing_zeros() as usize;
        if num_qubits > MAX_DENSE_QUBITS {
            return Err(StateError::TooManyQubits(num_qubits));
        }
        let state = Self { num_qubits, amps };
        let norm = state.norm_sqr().as_f64();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Haar-like random pure state from normalized Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> Result<Self, StateError> {
        if num_qubits > MAX_DENSE_QUBITS {
            return Err(StateError::TooManyQubits(num_qubits));
        }
        let raw: Vec<(f64, f64)> = (0..1usize << num_qubits)
            .map(|_| (rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = raw.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
        let amps = raw.into_iter().map(|(a, b)| Complex::new(T::lit(a / norm), T::lit(b / norm))).collect();
        Ok(Self { num_qubits, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex<T> {
        self.amps[index]
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn probability(&self, index: usize) -> T {
        self.amps[index].norm_sqr()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>, StateError> {
        if self.num_qubits != other.num_qubits {
            return Err(StateError::WidthMismatch(self.num_qubits, other.num_qubits));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b))
    }

    /// `self` on the low qubits, `other` on the high qubits.
    pub fn tensor(&self, other: &Self) -> Result<Self, StateError> {
        let n = self.num_qubits + other.num_qubits;
        if n > MAX_DENSE_QUBITS {
            return Err(StateError::TooManyQubits(n));
        }
        let amps = other
            .amps
            .iter()
            .flat_map(|b| self.amps.iter().map(move |a| a * b))
            .collect();
        Ok(Self { num_qubits: n, amps })
    }

    /// Value-semantics layer application.
    pub fn apply_layer(&self, layer: &GateLayer<T>) -> Result<Self, StateError> {
        let mut out = self.clone();
        Backend::apply_layer(&mut out, layer)?;
        Ok(out)
    }

    /// Probability of each value of the register formed by `qubits`.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<T>, StateError> {
        check_qubits(qubits, self.num_qubits)?;
        let mut probs = vec![T::zero(); 1 << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let v = extract(i as u128, qubits) as usize;
            probs[v] = probs[v] + a.norm_sqr();
        }
        Ok(probs)
    }

    /// Projects `qubits` onto `outcome` and renormalizes.
    pub fn measure_forced(&self, qubits: &[usize], outcome: u64) -> Result<Self, StateError> {
        check_qubits(qubits, self.num_qubits)?;
        let mut amps = self.amps.clone();
        let mut kept = T::zero();
        for (i, a) in amps.iter_mut().enumerate() {
            if extract(i as u128, qubits) == outcome {
                kept = kept + a.norm_sqr();
            } else {
                *a = Complex::new(T::zero(), T::zero());
            }
        }
        if kept.as_f64() <= 1e-300 {
            return Err(StateError::ImpossibleOutcome);
        }
        let scale = T::one() / kept.sqrt();
        amps.iter_mut().for_each(|a| *a = *a * scale);
        Ok(Self { num_qubits: self.num_qubits, amps })
    }

    /// Samples an outcome for `qubits` and returns it with the post-measurement state.
    pub fn measure<R: RngCore + ?Sized>(&self, qubits: &[usize], rng: &mut R) -> Result<(u64, Self), StateError> {
        let probs = self.marginal(qubits)?;
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut pick = probs.len() - 1;
        for (v, p) in probs.iter().enumerate() {
            acc += p.as_f64();
            if u < acc {
                pick = v;
                break;
            }
        }
        while probs[pick].as_f64() <= 0.0 && pick > 0 {
            pick -= 1;
        }
        let post = self.measure_forced(qubits, pick as u64)?;
        Ok((pick as u64, post))
    }

    /// Expected value of the projector onto the listed basis states.
    pub fn projector_expectation(&self, basis: &[usize]) -> T {
        basis.iter().fold(T::zero(), |acc, &i| acc + self.amps[i].norm_sqr())
    }
}

impl<T: Scalar> Backend for QuantumState<T> {
    type Real = T;

    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn apply_gate(&mut self, gate: &Gate<T>) -> Result<(), StateError> {
        check_qubits(&gate.targets(), self.num_qubits)?;
        match gate {
            Gate::Single { qubit, matrix } => {
                let mask = 1usize << qubit;
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | mask]);
                        self.amps[i] = matrix[0] * a + matrix[1] * b;
                        self.amps[i | mask] = matrix[2] * a + matrix[3] * b;
                    }
                }
            }
            Gate::Pair { first, second, matrix } => {
                let (mf, ms) = (1usize << first, 1usize << second);
                for i in 0..self.amps.len() {
                    if i & (mf | ms) == 0 {
                        let idx = [i, i | ms, i | mf, i | mf | ms];
                        let v = idx.map(|k| self.amps[k]);
                        for (row, &k) in idx.iter().enumerate() {
                            self.amps[k] = (0..4).fold(Complex::new(T::zero(), T::zero()), |acc, col| {
                                acc + matrix[row * 4 + col] * v[col]
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn permute(&mut self, qubits: &[usize], map: &dyn Fn(u64) -> u64) -> Result<(), StateError> {
        check_qubits(qubits, self.num_qubits)?;
        let limit = 1u64 << qubits.len();
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.amps.len()];
        let mut hit = vec![false; self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let w = map(extract(i as u128, qubits));
            if w >= limit {
                return Err(StateError::NotPermutation);
            }
            let j = deposit(i as u128, qubits, w) as usize;
            if std::mem::replace(&mut hit[j], true) {
                return Err(StateError::NotPermutation);
            }
            out[j] = *a;
        }
        self.amps = out;
        Ok(())
    }

    fn measure_qubits(&mut self, qubits: &[usize], rng: &mut dyn RngCore) -> Result<Vec<bool>, StateError> {
        let (v, post) = self.measure(qubits, rng)?;
        *self = post;
        Ok((0..qubits.len()).map(|j| (v >> j) & 1 == 1).collect())
    }

    fn prob_one(&self, qubit: usize) -> Result<T, StateError> {
        check_qubits(&[qubit], self.num_qubits)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| (i >> qubit) & 1 == 1)
            .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr()))
    }
}
