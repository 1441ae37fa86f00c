//! Simulation of depth-limited hybrid quantum-classical query algorithms: state vectors,
//! oracles with a `⊥` symbol, problem generators, the three hybrid models, solvers and
//! analysis probes.

pub mod analysis;
pub mod models;
pub mod oracle;
pub mod problems;
pub mod scalar;
pub mod solvers;
pub mod statevec;

pub use scalar::Scalar;

pub type State = statevec::QuantumState<f64>;
pub type State32 = statevec::QuantumState<f32>;
pub type Factored = statevec::FactoredState<f64>;
pub type Factored32 = statevec::FactoredState<f32>;
pub type Layer = statevec::GateLayer<f64>;
pub type Ensemble = statevec::Ensemble<f64>;
