use serde::{Deserialize, Serialize};

use super::{ProblemError, ScsInstance, SerialInstance, SimonInstance, SsInstance};

pub const INSTANCE_SCHEMA: &str = "qdepth.instance";
pub const INSTANCE_VERSION: u32 = 1;

/// Any generated instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "snake_case")]
pub enum ProblemInstance {
    Simon(SimonInstance),
    Serial(SerialInstance),
    Ss(SsInstance),
    Scs(ScsInstance),
}

impl ProblemInstance {
    /// Rebuilds derived oracles from the stored parts and checks they match.
    pub fn validate(&self) -> Result<(), ProblemError> {
        match self {
            ProblemInstance::Simon(s) => {
                if super::simon_period(&s.table) != Some(s.period) {
                    return Err(ProblemError::Invalid("stored period is not the Simon period".into()));
                }
            }
            ProblemInstance::Serial(s) => s.gate_check()?,
            ProblemInstance::Ss(s) => {
                let rebuilt = SsInstance::build(s.variant, s.function.clone(), s.period, s.label, s.shuffler.clone())?;
                if rebuilt.bundle != s.bundle {
                    return Err(ProblemError::Invalid("shuffler tables disagree with tuples".into()));
                }
            }
            ProblemInstance::Scs(s) => {
                let rebuilt = ScsInstance::build(s.f.clone(), s.g.clone(), s.period, s.shuffler.clone())?;
                if rebuilt.bundle != s.bundle || rebuilt.stochastic != s.stochastic {
                    return Err(ProblemError::Invalid("derived oracles disagree with stored parts".into()));
                }
            }
        }
        Ok(())
    }
}

/// Versioned on-disk record of an instance and the seed that generated it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub schema: String,
    pub version: u32,
    pub seed: u64,
    pub instance: ProblemInstance,
}

impl InstanceFile {
    pub fn new(seed: u64, instance: ProblemInstance) -> Self {
        Self { schema: INSTANCE_SCHEMA.into(), version: INSTANCE_VERSION, seed, instance }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    /// Parses and validates a record.
    pub fn from_json(text: &str) -> Result<Self, ProblemError> {
        let file: Self = serde_json::from_str(text).map_err(|e| ProblemError::Invalid(e.to_string()))?;
        if file.schema != INSTANCE_SCHEMA || file.version != INSTANCE_VERSION {
            return Err(ProblemError::Invalid(format!("unsupported record {} v{}", file.schema, file.version)));
        }
        file.instance.validate()?;
        Ok(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{sample_scs, sample_serial, sample_ss, SimonProblem, Variant};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn roundtrip_all_kinds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let kinds = vec![
            ProblemInstance::Simon(crate::problems::sample_simon(3, &mut rng).unwrap()),
            ProblemInstance::Serial(sample_serial(2, 3, &SimonProblem, Variant::Search, &mut rng).unwrap()),
            ProblemInstance::Ss(sample_ss(2, 3, Variant::Decision, &mut rng).unwrap()),
            ProblemInstance::Scs(sample_scs(1, 3, &mut rng).unwrap()),
        ];
        for inst in kinds {
            let file = InstanceFile::new(1, inst);
            let text = file.to_json();
            let back = InstanceFile::from_json(&text).unwrap();
            assert_eq!(back, file);
            assert_eq!(back.to_json(), text);
        }
    }

    #[test]
    fn rejects_foreign_schema() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut file = InstanceFile::new(1, ProblemInstance::Simon(crate::problems::sample_simon(2, &mut rng).unwrap()));
        file.version = 99;
        assert!(InstanceFile::from_json(&file.to_json()).is_err());
    }
}
