//! Numerical and exhaustive checks of the proof machinery: find probabilities and their
//! bound, the one-way-to-hiding chain, shadow-equivalence probes, non-uniformity of
//! permutation distributions with the constructive decomposition, shuffler domain facts and
//! the collision probe against the shuffled collision-to-Simon problem.

mod combinatorics;
mod find;
mod nonuniform;
mod o2h;
mod scs_probe;
mod shadow;
mod shuffler;
mod suites;

pub use combinatorics::{binomial, combinatorics_checks, falling, membership_by_enumeration};
pub use find::{
    estimate_find, find_probability, find_sweep, query_marginal_find, serial_find_experiment, FindExperiment,
    SweepConfig,
};
pub use nonuniform::{
    compose_check, decompose_conditioned, nonuniformity_delta, random_advice, uniform_part_probability, Component,
    CompositionReport, DecompositionResult, Pair, PermDistribution, MAX_EXHAUSTIVE_N,
};
pub use o2h::{check_o2h, o2h_sweep, random_o2h_instance, O2hInstance, O2hSweep, O2hTriple};
pub use scs_probe::{birthday_collision, scs_cq_adversary, scs_hardness_probe, y_distinct_probability, ScsProbe};
pub use shadow::{shadow_equivalence_probe, QncAdversary, ShadowProbe};
pub use shuffler::{check_dom_hit, dual_definition_check, extend_to_permutations, DomHit, ShufflerCondition};
pub use suites::{run_suite, Check, Suite, SuiteReport};

use thiserror::Error;

use crate::models::ModelError;
use crate::oracle::OracleError;
use crate::problems::ProblemError;
use crate::statevec::StateError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("exhaustive mode supports at most {max} points, got {got}")]
    TooLarge { got: usize, max: usize },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len().max(1) as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Standard error of a proportion estimated from `trials` samples.
pub(crate) fn proportion_error(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials.max(1) as f64).sqrt()
}
