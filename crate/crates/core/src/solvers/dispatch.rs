use rand::RngCore;

use super::{
    scs_cq_program, scs_qc4_program, serial_cq1_program, serial_qc_program, simon_qnc_program, ss_cq_program, SolverError,
    SolverReport,
};
use crate::models::{run, HybridProgram, Model, OracleSet};
use crate::oracle::OracleBundle;
use crate::problems::{ProblemInstance, Variant};

/// The budget each reference solver is built for.
pub fn default_budget(instance: &ProblemInstance, model: Model) -> Result<usize, SolverError> {
    match (instance, model) {
        (ProblemInstance::Simon(_), Model::Qnc) => Ok(1),
        (ProblemInstance::Serial(_), Model::Cq) => Ok(1),
        (ProblemInstance::Serial(s), Model::Qc) => Ok(2 * s.c + 2),
        (ProblemInstance::Ss(s), Model::Cq) => Ok(2 * s.d + 1),
        (ProblemInstance::Scs(_), Model::Qc) => Ok(4),
        (ProblemInstance::Scs(s), Model::Cq) => Ok(s.d + 6),
        _ => Err(unsupported(instance, model)),
    }
}

fn unsupported(instance: &ProblemInstance, model: Model) -> SolverError {
    SolverError::Unsupported(format!("no {model} solver for {}", problem_name(instance)))
}

pub fn problem_name(instance: &ProblemInstance) -> &'static str {
    match instance {
        ProblemInstance::Simon(_) => "simon",
        ProblemInstance::Serial(_) => "serial",
        ProblemInstance::Ss(_) => "ss",
        ProblemInstance::Scs(_) => "scs",
    }
}

/// What a correct solver outputs: the hidden period, or the label for decision instances.
pub fn expected_answer(instance: &ProblemInstance) -> u64 {
    match instance {
        ProblemInstance::Simon(s) => s.period,
        ProblemInstance::Serial(s) => s.answer(),
        ProblemInstance::Ss(s) => s.answer(),
        ProblemInstance::Scs(s) => s.period,
    }
}

/// The reference program for `(instance, model)` with its depth budget replaced by `budget`,
/// plus the oracles it runs against, its name and the number of linear systems it records.
pub fn solver_program(
    instance: &ProblemInstance,
    model: Model,
    budget: usize,
) -> Result<(HybridProgram, OracleSet, &'static str, usize), SolverError> {
    let (mut program, oracles, name, systems) = match (instance, model) {
        (ProblemInstance::Simon(s), Model::Qnc) => {
            let set = OracleSet::new(OracleBundle::new("simon", vec![s.table.clone()]));
            (simon_qnc_program(s.n)?, set, "simon-qnc1", 1)
        }
        (ProblemInstance::Serial(s), Model::Cq) => {
            (serial_cq1_program(s.n, s.c, s.variant)?, OracleSet::new(s.bundle.clone()), "serial-cq1", s.c + 1)
        }
        (ProblemInstance::Serial(s), Model::Qc) => {
            (serial_qc_program(s.n, s.c, s.variant, budget)?, OracleSet::new(s.bundle.clone()), "serial-qc", s.c + 1)
        }
        (ProblemInstance::Ss(s), Model::Cq) => {
            if s.variant != Variant::Search {
                return Err(SolverError::Unsupported("the shuffled-Simon solver handles the search variant".into()));
            }
            (ss_cq_program(s.n, s.d, budget)?, OracleSet::new(s.bundle.clone()), "ss-cq", 1)
        }
        (ProblemInstance::Scs(s), Model::Qc) => {
            let set = OracleSet::with_stochastic(s.bundle.clone(), vec![s.stochastic.clone()]);
            (scs_qc4_program(s.n, s.d)?, set, "scs-qc4", 1)
        }
        (ProblemInstance::Scs(s), Model::Cq) => {
            let set = OracleSet::with_stochastic(s.bundle.clone(), vec![s.stochastic.clone()]);
            (scs_cq_program(s.n, s.d, budget)?, set, "scs-cq", 1)
        }
        _ => return Err(unsupported(instance, model)),
    };
    program.depth_budget = budget;
    Ok((program, oracles, name, systems))
}

/// Runs the reference solver for `(instance, model)` under `budget`. A budget below the
/// program's depth surfaces as a validation error.
pub fn solve(instance: &ProblemInstance, model: Model, budget: usize, rng: &mut dyn RngCore) -> Result<SolverReport, SolverError> {
    let (program, oracles, name, systems) = solver_program(instance, model, budget)?;
    let out = run(&program, &oracles, rng)?;
    Ok(SolverReport::from_run(name, model, budget, systems, &out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{trial_rng, ModelError, Violation};
    use crate::problems::{sample_scs, sample_serial, SimonProblem};

    #[test]
    fn default_budgets_solve() {
        let mut rng = trial_rng(2, 0);
        let inst = ProblemInstance::Serial(sample_serial(2, 4, &SimonProblem, Variant::Search, &mut rng).unwrap());
        for model in [Model::Cq, Model::Qc] {
            let budget = default_budget(&inst, model).unwrap();
            let rep = solve(&inst, model, budget, &mut rng).unwrap();
            assert_eq!(rep.budget, budget);
            assert!(rep.depth <= budget);
        }
    }

    #[test]
    fn short_budget_is_a_violation() {
        let mut rng = trial_rng(2, 1);
        let inst = ProblemInstance::Scs(sample_scs(2, 4, &mut rng).unwrap());
        let err = solve(&inst, Model::Qc, 3, &mut rng).unwrap_err();
        assert!(matches!(err, SolverError::Model(ModelError::Violation(Violation::DepthExceeded { used: 4, budget: 3 }))));
    }

    #[test]
    fn missing_pairs_are_unsupported() {
        let mut rng = trial_rng(2, 2);
        let inst = ProblemInstance::Scs(sample_scs(2, 4, &mut rng).unwrap());
        assert!(matches!(default_budget(&inst, Model::Qnc), Err(SolverError::Unsupported(_))));
    }
}
