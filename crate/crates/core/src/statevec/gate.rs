use num_complex::Complex;

use super::StateError;
use crate::scalar::Scalar;

/// A one- or two-qubit unitary with its target qubits.
///
/// Two-qubit matrices are indexed by `2 * bit(first) + bit(second)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Gate<T: Scalar> {
    Single { qubit: usize, matrix: [Complex<T>; 4] },
    Pair { first: usize, second: usize, matrix: [Complex<T>; 16] },
}

fn c<T: Scalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

impl<T: Scalar> Gate<T> {
    pub fn single(qubit: usize, matrix: [Complex<T>; 4]) -> Self {
        Gate::Single { qubit, matrix }
    }

    pub fn h(qubit: usize) -> Self {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        Self::single(qubit, [c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)])
    }

    pub fn x(qubit: usize) -> Self {
        Self::single(qubit, [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    pub fn z(qubit: usize) -> Self {
        Self::single(qubit, [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
    }

    pub fn s(qubit: usize) -> Self {
        Self::single(qubit, [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 1.0)])
    }

    /// General single-qubit rotation `U(theta, phi, lambda)`.
    pub fn u3(qubit: usize, theta: f64, phi: f64, lambda: f64) -> Self {
        let (ct, st) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let e = |a: f64, m: f64| c::<T>(m * a.cos(), m * a.sin());
        Self::single(qubit, [c(ct, 0.0), -e(lambda, st), e(phi, st), e(phi + lambda, ct)])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        let mut m = [c(0.0, 0.0); 16];
        for (row, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
            m[row * 4 + col] = c(1.0, 0.0);
        }
        Gate::Pair { first: control, second: target, matrix: m }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        let mut m = [c(0.0, 0.0); 16];
        for k in 0..4 {
            m[k * 4 + k] = c(if k == 3 { -1.0 } else { 1.0 }, 0.0);
        }
        Gate::Pair { first: a, second: b, matrix: m }
    }

    pub fn targets(&self) -> Vec<usize> {
        match self {
            Gate::Single { qubit, .. } => vec![*qubit],
            Gate::Pair { first, second, .. } => vec![*first, *second],
        }
    }

    /// Checks `M M^dagger = I` entrywise within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        let (dim, m): (usize, Vec<Complex<T>>) = match self {
            Gate::Single { matrix, .. } => (2, matrix.to_vec()),
            Gate::Pair { matrix, .. } => (4, matrix.to_vec()),
        };
        (0..dim).all(|i| {
            (0..dim).all(|j| {
                let dot: Complex<T> = (0..dim)
                    .map(|k| m[i * dim + k] * m[j * dim + k].conj())
                    .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b);
                let want = if i == j { T::one() } else { T::zero() };
                ((dot.re - want).abs() + dot.im.abs()).as_f64() <= tol
            })
        })
    }

    /// True when the gate maps basis states to basis states (up to phase) on every input.
    pub fn is_classical(&self) -> bool {
        let (dim, m): (usize, Vec<Complex<T>>) = match self {
            Gate::Single { matrix, .. } => (2, matrix.to_vec()),
            Gate::Pair { matrix, .. } => (4, matrix.to_vec()),
        };
        (0..dim).all(|col| (0..dim).filter(|&row| m[row * dim + col].norm() > T::zero()).count() == 1)
    }
}

/// A set of gates acting on pairwise disjoint qubits, applied as one circuit layer.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GateLayer<T: Scalar> {
    gates: Vec<Gate<T>>,
}

impl<T: Scalar> GateLayer<T> {
    pub fn new(gates: Vec<Gate<T>>) -> Result<Self, StateError> {
        let mut seen = std::collections::BTreeSet::new();
        for g in &gates {
            for q in g.targets() {
                if !seen.insert(q) {
                    return Err(StateError::LayerOverlap(q));
                }
            }
        }
        Ok(Self { gates })
    }

    pub fn empty() -> Self {
        Self { gates: Vec::new() }
    }

    /// Hadamard on each listed qubit.
    pub fn hadamards(qubits: &[usize]) -> Result<Self, StateError> {
        Self::new(qubits.iter().map(|&q| Gate::h(q)).collect())
    }

    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }

    pub fn targets(&self) -> Vec<usize> {
        self.gates.iter().flat_map(Gate::targets).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_gates_are_unitary() {
        let gates: Vec<Gate<f64>> = vec![
            Gate::h(0),
            Gate::x(0),
            Gate::z(0),
            Gate::s(0),
            Gate::u3(0, 0.3, 1.1, -0.7),
            Gate::cnot(0, 1),
            Gate::cz(0, 1),
        ];
        assert!(gates.iter().all(|g| g.is_unitary(1e-12)));
        assert!(Gate::<f64>::cnot(0, 1).is_classical());
        assert!(!Gate::<f64>::h(0).is_classical());
    }

    #[test]
    fn overlapping_layer_is_rejected() {
        let err = GateLayer::<f64>::new(vec![Gate::h(1), Gate::cnot(0, 1)]).unwrap_err();
        assert_eq!(err, StateError::LayerOverlap(1));
    }
}
