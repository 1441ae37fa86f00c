use rand::seq::{index, SliceRandom};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{check_n, GenericProblem, ProblemError, MAX_PLAIN_N};
use crate::oracle::FunctionTable;

/// A Simon function `f(x) = f(x ^ s)` on `n` bits with period `s != 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimonInstance {
    pub n: u32,
    pub table: FunctionTable,
    pub period: u64,
}

/// Uniform Simon function: `s` uniform over nonzero strings and the cosets `{x, x^s}`
/// (ordered by their smaller element) sent to a uniformly random injection.
pub fn sample_simon<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<SimonInstance, ProblemError> {
    check_n(n, MAX_PLAIN_N)?;
    let size = 1u64 << n;
    let s = rng.gen_range(1..size);
    let images = index::sample(rng, size as usize, (size / 2) as usize);
    let mut values = vec![0u64; size as usize];
    let mut k = 0;
    for x in 0..size {
        if x < x ^ s {
            let v = images.index(k) as u64;
            values[x as usize] = v;
            values[(x ^ s) as usize] = v;
            k += 1;
        }
    }
    Ok(SimonInstance { n, table: FunctionTable::total(n, n, &values)?, period: s })
}

/// Uniform permutation of `{0,1}^n`.
pub fn sample_one_to_one<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<FunctionTable, ProblemError> {
    check_n(n, MAX_PLAIN_N)?;
    let mut values: Vec<u64> = (0..1u64 << n).collect();
    values.shuffle(rng);
    Ok(FunctionTable::total(n, n, &values)?)
}

/// Uniform 2-to-1 function: a uniform perfect matching with pairs sent to a uniform injection.
pub fn sample_two_to_one<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<FunctionTable, ProblemError> {
    check_n(n, MAX_PLAIN_N)?;
    let size = 1usize << n;
    let mut order: Vec<u64> = (0..size as u64).collect();
    order.shuffle(rng);
    let images = index::sample(rng, size, size / 2);
    let mut values = vec![0u64; size];
    for (k, pair) in order.chunks(2).enumerate() {
        for &x in pair {
            values[x as usize] = images.index(k) as u64;
        }
    }
    Ok(FunctionTable::total(n, n, &values)?)
}

/// The period of `table` if it is a Simon function.
pub fn simon_period(table: &FunctionTable) -> Option<u64> {
    if !table.is_total() || table.in_bits() == 0 {
        return None;
    }
    let f0 = table.get(0).ok()??;
    let s = (1..table.domain_size()).find(|&x| table.get(x).ok().flatten() == Some(f0))?;
    let ok = (0..table.domain_size()).all(|x| {
        let fx = table.get(x).ok().flatten();
        fx == table.get(x ^ s).ok().flatten()
            && (0..table.domain_size()).all(|y| y == x || y == x ^ s || table.get(y).ok().flatten() != fx)
    });
    ok.then_some(s)
}

/// Simon's problem as a generic problem; the decoy is a uniform permutation.
#[derive(Clone, Copy, Debug, Default)]
pub struct SimonProblem;

impl GenericProblem for SimonProblem {
    fn name(&self) -> &str {
        "simon"
    }

    fn sample_search(&self, n: u32, rng: &mut dyn RngCore) -> Result<(FunctionTable, u64), ProblemError> {
        let inst = sample_simon(n, rng)?;
        Ok((inst.table, inst.period))
    }

    fn sample_decoy(&self, n: u32, rng: &mut dyn RngCore) -> Result<FunctionTable, ProblemError> {
        sample_one_to_one(n, rng)
    }
}
