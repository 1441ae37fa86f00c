use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_n, sample_one_to_one, sample_simon, ProblemError, Shuffler, Variant, MAX_PAIRED_N};
use crate::oracle::{FunctionTable, OracleBundle};

/// Shuffled Simon: a Simon function (or, for the decision variant, possibly a uniform
/// permutation) hidden behind a d-Shuffler.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsInstance {
    pub n: u32,
    pub d: usize,
    pub variant: Variant,
    pub function: FunctionTable,
    pub period: Option<u64>,
    pub label: Option<u8>,
    pub shuffler: Shuffler,
    pub bundle: OracleBundle,
}

impl SsInstance {
    pub fn build(
        variant: Variant,
        function: FunctionTable,
        period: Option<u64>,
        label: Option<u8>,
        shuffler: Shuffler,
    ) -> Result<Self, ProblemError> {
        let image: Vec<u64> = (0..function.domain_size())
            .map(|x| function.get(x).ok().flatten().ok_or_else(|| ProblemError::Invalid("f must be total".into())))
            .collect::<Result<_, _>>()?;
        if image != shuffler.image() {
            return Err(ProblemError::Invalid("shuffler does not hide f".into()));
        }
        let (n, d) = (shuffler.n, shuffler.d);
        let bundle = OracleBundle::new(format!("ss(d={d},n={n})"), shuffler.tables()?);
        Ok(Self { n, d, variant, function, period, label, shuffler, bundle })
    }

    pub fn answer(&self) -> u64 {
        match self.variant {
            Variant::Search => self.period.unwrap_or(0),
            Variant::Decision => u64::from(self.label.unwrap_or(0)),
        }
    }
}

/// Samples a d-SS instance. The decision variant pairs Simon functions with uniform permutations.
pub fn sample_ss<R: Rng + ?Sized>(d: usize, n: u32, variant: Variant, rng: &mut R) -> Result<SsInstance, ProblemError> {
    check_n(n, MAX_PAIRED_N)?;
    let (function, period, label) = match variant {
        Variant::Decision if rng.gen_bool(0.5) => (sample_one_to_one(n, rng)?, None, Some(1)),
        _ => {
            let inst = sample_simon(n, rng)?;
            let label = (variant == Variant::Decision).then_some(0);
            (inst.table, Some(inst.period), label)
        }
    };
    let image: Vec<u64> = (0..function.domain_size()).map(|x| function.get(x).unwrap().unwrap()).collect();
    let shuffler = Shuffler::sample(d, n, &image, rng)?;
    SsInstance::build(variant, function, period, label, shuffler)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bundle_composes_to_f() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let inst = sample_ss(2, 4, Variant::Search, &mut rng).unwrap();
        assert_eq!(inst.bundle.len(), 3);
        for x in 0..16 {
            let mut v = x;
            for t in inst.bundle.subs() {
                v = t.get(v).unwrap().unwrap();
            }
            assert_eq!(Some(v), inst.function.get(x).unwrap());
        }
        assert_eq!(crate::problems::simon_period(&inst.function), inst.period);
    }

    #[test]
    fn decision_partner_is_a_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let inst = sample_ss(1, 3, Variant::Decision, &mut rng).unwrap();
            let simon = crate::problems::simon_period(&inst.function).is_some();
            assert_eq!(simon, inst.label == Some(0));
        }
    }
}
