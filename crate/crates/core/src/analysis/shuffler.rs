use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{proportion_error, AnalysisError};
use crate::models::trial_rng;
use crate::problems::Shuffler;

/// Extends each partial injection `t_{i-1}[j] -> t_i[j]` to a full permutation of the
/// `2n`-bit strings, matching the unused inputs to the unused outputs at random.
pub fn extend_to_permutations<R: Rng + ?Sized>(sh: &Shuffler, rng: &mut R) -> Vec<Vec<u64>> {
    let space = 1u64 << (2 * sh.n);
    (0..sh.d)
        .map(|i| {
            let (from, to) = (sh.tuple(i as isize - 1), sh.tuple(i as isize));
            let mut perm = vec![u64::MAX; space as usize];
            for (a, b) in from.iter().zip(&to) {
                perm[*a as usize] = *b;
            }
            let used: BTreeSet<u64> = to.iter().copied().collect();
            let mut rest: Vec<u64> = (0..space).filter(|v| !used.contains(v)).collect();
            rest.shuffle(rng);
            for (slot, v) in perm.iter_mut().filter(|v| **v == u64::MAX).zip(rest) {
                *slot = v;
            }
            perm
        })
        .collect()
}

/// Samples shufflers for `seeds`, rebuilds each from random permutation extensions and
/// returns the number of seeds whose sub-oracle tables differ anywhere.
pub fn dual_definition_check(seeds: std::ops::Range<u64>, n: u32, max_d: usize) -> Result<usize, AnalysisError> {
    let image: Vec<u64> = (0..1u64 << n).collect();
    let mut mismatches = 0;
    for seed in seeds {
        let mut rng = trial_rng(seed, 0);
        let d = 1 + (seed as usize % max_d);
        let mut shuffled = image.clone();
        shuffled.shuffle(&mut rng);
        let sh = Shuffler::sample(d, n, &shuffled, &mut rng)?;
        let rebuilt = Shuffler::from_permutations(n, &extend_to_permutations(&sh, &mut rng), shuffled)?;
        mismatches += usize::from(sh.tables()? != rebuilt.tables()?);
    }
    Ok(mismatches)
}

/// Facts conditioning a uniform shuffler: whole paths `(j, t_0[j], …, t_{d-1}[j])`, values
/// known to lie in `dom_i = t_{i-1}` and values known to lie outside it (`1 <= i <= d`).
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShufflerCondition {
    pub paths: Vec<Vec<u64>>,
    pub in_dom: Vec<(usize, u64)>,
    pub not_in_dom: Vec<(usize, u64)>,
}

impl ShufflerCondition {
    fn level_facts(&self, level: usize) -> (BTreeSet<u64>, BTreeSet<u64>, BTreeSet<u64>) {
        let fixed: BTreeSet<u64> = self.paths.iter().map(|p| p[level + 1]).collect();
        let forced = self.in_dom.iter().filter(|(i, _)| *i == level + 1).map(|(_, v)| *v).filter(|v| !fixed.contains(v)).collect();
        let excluded = self.not_in_dom.iter().filter(|(i, _)| *i == level + 1).map(|(_, v)| *v).collect();
        (fixed, forced, excluded)
    }

    /// Proper and satisfiable for a `d`-shuffler over `n` bits.
    pub fn check(&self, n: u32, d: usize) -> Result<(), AnalysisError> {
        let (size, space) = (1u64 << n, 1u64 << (2 * n));
        let bad = |m: &str| Err(AnalysisError::Precondition(m.to_string()));
        let rows: BTreeSet<u64> = self.paths.iter().map(|p| p[0]).collect();
        if rows.len() != self.paths.len() || self.paths.iter().any(|p| p.len() != d + 1 || p[0] >= size) {
            return bad("paths must start at distinct rows and have d + 1 entries");
        }
        if self.in_dom.iter().chain(&self.not_in_dom).any(|&(i, v)| i == 0 || i > d || v >= space) {
            return bad("domain facts must name levels 1..=d and 2n-bit values");
        }
        for level in 0..d {
            let (fixed, forced, excluded) = self.level_facts(level);
            if fixed.len() != self.paths.len() || self.paths.iter().any(|p| p[1..].iter().any(|&v| v >= space)) {
                return bad("paths collide or leave the 2n-bit range");
            }
            if fixed.iter().chain(&forced).any(|v| excluded.contains(v)) {
                return bad("a value is both required and excluded");
            }
            if fixed.len() + forced.len() > size as usize || space - (excluded.len() as u64) < size {
                return bad("condition cannot be satisfied");
            }
        }
        Ok(())
    }

    /// Exact sample from the uniform d-shuffler conditioned on these facts. Levels are
    /// independent; within a level, required values go to uniformly chosen free rows and the
    /// remaining rows take distinct values uniformly from everything not yet used or excluded.
    pub fn sample<R: Rng + ?Sized>(&self, n: u32, d: usize, image: &[u64], rng: &mut R) -> Result<Shuffler, AnalysisError> {
        self.check(n, d)?;
        let (size, space) = (1usize << n, 1u64 << (2 * n));
        let mut tuples = Vec::with_capacity(d);
        for level in 0..d {
            let (_, forced, excluded) = self.level_facts(level);
            let mut row = vec![None; size];
            for p in &self.paths {
                row[p[0] as usize] = Some(p[level + 1]);
            }
            let mut free: Vec<usize> = (0..size).filter(|&j| row[j].is_none()).collect();
            free.shuffle(rng);
            let mut free = free.into_iter();
            for &v in &forced {
                row[free.next().expect("checked capacity")] = Some(v);
            }
            let mut used: BTreeSet<u64> = row.iter().flatten().copied().collect();
            used.extend(&excluded);
            for j in free {
                let v = loop {
                    let v = rng.gen_range(0..space);
                    if !used.contains(&v) {
                        break v;
                    }
                };
                used.insert(v);
                row[j] = Some(v);
            }
            tuples.push(row.into_iter().map(|v| v.expect("every row filled")).collect());
        }
        Ok(Shuffler::from_tuples(n, tuples, image.to_vec())?)
    }

    /// `Pr[x ∈ dom_i]` under the conditioned uniform shuffler, for `x` not named by the facts.
    pub fn exact_dom_probability(&self, n: u32, i: usize) -> f64 {
        let (fixed, forced, excluded) = self.level_facts(i - 1);
        let (size, space) = (1u64 << n, 1u64 << (2 * n));
        let known = (fixed.len() + forced.len()) as u64;
        (size - known) as f64 / (space - known - excluded.len() as u64) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomHit {
    pub trials: usize,
    pub hits: usize,
    pub estimate: f64,
    pub std_err: f64,
    pub exact: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Monte Carlo estimate of `Pr[x ∈ dom_i]` for the conditioned uniform shuffler, checked
/// against `2^δ · N / (M - #facts)`. A miss is rerun once with ten times the trials.
pub fn check_dom_hit(
    cond: &ShufflerCondition,
    n: u32,
    d: usize,
    x: u64,
    i: usize,
    trials: usize,
    seed: u64,
    delta: f64,
) -> Result<DomHit, AnalysisError> {
    if i == 0 || i > d {
        return Err(AnalysisError::Precondition(format!("level {i} outside 1..={d}")));
    }
    cond.check(n, d)?;
    let named = cond.paths.iter().any(|p| p[i] == x) || cond.in_dom.contains(&(i, x));
    if named {
        return Err(AnalysisError::Precondition(format!("{x} is already placed in dom_{i} by the condition")));
    }
    let excluded = cond.not_in_dom.contains(&(i, x));
    let (size, space) = (1u64 << n, 1u64 << (2 * n));
    let facts = cond.paths.len() + cond.in_dom.len() + cond.not_in_dom.len();
    let bound = 2f64.powf(delta) * size as f64 / (space as f64 - facts as f64);
    let exact = if excluded { 0.0 } else { cond.exact_dom_probability(n, i) };
    let image: Vec<u64> = (0..size).collect();
    let once = |trials: usize| -> Result<DomHit, AnalysisError> {
        let hits = (0..trials)
            .into_par_iter()
            .map(|t| {
                let sh = cond.sample(n, d, &image, &mut trial_rng(seed, t as u64))?;
                Ok(usize::from(sh.domain(i).contains(&x)))
            })
            .collect::<Result<Vec<_>, AnalysisError>>()?
            .into_iter()
            .sum::<usize>();
        let estimate = hits as f64 / trials as f64;
        let std_err = proportion_error(exact.max(estimate), trials);
        Ok(DomHit { trials, hits, estimate, std_err, exact, bound, pass: estimate - 3.0 * std_err <= bound })
    };
    let first = once(trials)?;
    if first.pass {
        return Ok(first);
    }
    once(trials * 10)
}
