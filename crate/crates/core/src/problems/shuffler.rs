use std::collections::{BTreeMap, BTreeSet};

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_n, ProblemError, MAX_PAIRED_N};
use crate::oracle::{FunctionTable, ShadowMask};

/// A d-Shuffler hiding `f: {0,1}^n -> {0,1}^n` behind `d` random tuples of `2n`-bit strings.
///
/// With `N = 2^n`, `t_{-1} = (0, …, N-1)` and `t_d = (f(0), …, f(N-1))`, sub-oracle `f_i`
/// (`0 <= i <= d`) maps `t_{i-1}[j] -> t_i[j]` and answers `⊥` elsewhere. Sub-oracles take
/// `2n`-bit inputs; `f_0` sees `x` in the low half with the high half zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shuffler {
    pub n: u32,
    pub d: usize,
    tuples: Vec<Vec<u64>>,
    image: Vec<u64>,
}

impl Shuffler {
    /// Samples each `t_i` as a uniform ordered tuple of `N` distinct `2n`-bit strings.
    pub fn sample<R: Rng + ?Sized>(d: usize, n: u32, image: &[u64], rng: &mut R) -> Result<Self, ProblemError> {
        check_n(n, MAX_PAIRED_N)?;
        let (size, space) = (1usize << n, 1usize << (2 * n));
        let tuples = (0..d)
            .map(|_| index::sample(rng, space, size).into_iter().map(|v| v as u64).collect())
            .collect();
        Self::from_tuples(n, tuples, image.to_vec())
    }

    pub fn from_tuples(n: u32, tuples: Vec<Vec<u64>>, image: Vec<u64>) -> Result<Self, ProblemError> {
        check_n(n, MAX_PAIRED_N)?;
        let size = 1usize << n;
        if image.len() != size || image.iter().any(|&v| v >> n != 0) {
            return Err(ProblemError::Invalid("hidden function has the wrong shape".into()));
        }
        for (i, t) in tuples.iter().enumerate() {
            let distinct: BTreeSet<_> = t.iter().collect();
            if t.len() != size || distinct.len() != size || t.iter().any(|&v| v >> (2 * n) != 0) {
                return Err(ProblemError::Invalid(format!("tuple t_{i} is not {size} distinct 2n-bit strings")));
            }
        }
        Ok(Self { n, d: tuples.len(), tuples, image })
    }

    /// Builds the shuffler from full permutations `f'_0, …, f'_{d-1}` of `{0,1}^{2n}`:
    /// `X_0 = Z×{0,1}^n`, `X_{i+1} = f'_i(X_i)`, `f_i = f'_i` on `X_i`, and `f_d` sends
    /// `f'_{d-1}∘…∘f'_0(x)` to `f(x)`.
    pub fn from_permutations(n: u32, perms: &[Vec<u64>], image: Vec<u64>) -> Result<Self, ProblemError> {
        check_n(n, MAX_PAIRED_N)?;
        let space = 1usize << (2 * n);
        for p in perms {
            let distinct: BTreeSet<_> = p.iter().collect();
            if p.len() != space || distinct.len() != space || p.iter().any(|&v| v as usize >= space) {
                return Err(ProblemError::Invalid("not a permutation of 2n-bit strings".into()));
            }
        }
        let mut current: Vec<u64> = (0..1u64 << n).collect();
        let mut tuples = Vec::with_capacity(perms.len());
        for p in perms {
            current = current.iter().map(|&v| p[v as usize]).collect();
            tuples.push(current.clone());
        }
        Self::from_tuples(n, tuples, image)
    }

    /// `t_i` for `-1 <= i <= d`.
    pub fn tuple(&self, i: isize) -> Vec<u64> {
        match i {
            -1 => (0..1u64 << self.n).collect(),
            i if i as usize == self.d => self.image.clone(),
            i => self.tuples[i as usize].clone(),
        }
    }

    pub fn image(&self) -> &[u64] {
        &self.image
    }

    /// Tables `f_0, …, f_d`.
    pub fn tables(&self) -> Result<Vec<FunctionTable>, ProblemError> {
        (0..=self.d)
            .map(|i| {
                let from = self.tuple(i as isize - 1);
                let to = self.tuple(i as isize);
                let out_bits = if i == self.d { self.n } else { 2 * self.n };
                let lookup: BTreeMap<u64, u64> = from.into_iter().zip(to).collect();
                Ok(FunctionTable::from_fn(2 * self.n, out_bits, |x| lookup.get(&x).copied())?)
            })
            .collect()
    }

    /// Domain of `f_i`: the entries of `t_{i-1}`.
    pub fn domain(&self, i: usize) -> BTreeSet<u64> {
        self.tuple(i as isize - 1).into_iter().collect()
    }

    /// Rows `(j, t_0[j], …, t_d[j])`.
    pub fn paths(&self) -> Vec<Vec<u64>> {
        (0..1usize << self.n)
            .map(|j| (-1..=self.d as isize).map(|i| self.tuple(i)[j]).collect())
            .collect()
    }

    /// Rows without the last column.
    pub fn paths_star(&self) -> Vec<Vec<u64>> {
        self.paths().into_iter().map(|mut p| {
            p.pop();
            p
        }).collect()
    }

    /// Evaluates the hidden function by walking the tuples.
    pub fn walk(&self, x: u64) -> Option<u64> {
        self.image.get(x as usize).copied()
    }

    /// Shadow sets indexed by sub-oracle: for `i >= j`, sub-oracle `i` is masked on
    /// `dom(f_i)` minus the exposed paths' entries in that domain. Valid for `1 <= j <= d + 1`.
    pub fn shadow_sets(&self, j: usize, exposed: &[Vec<u64>]) -> Result<ShadowMask, ProblemError> {
        if j == 0 || j > self.d + 1 {
            return Err(ProblemError::Parameter(format!("shadow index {j} outside 1..={}", self.d + 1)));
        }
        let paths: BTreeSet<Vec<u64>> = self.paths().into_iter().collect();
        let star: BTreeSet<Vec<u64>> = self.paths_star().into_iter().collect();
        if let Some(bad) = exposed.iter().find(|y| !paths.contains(*y) && !star.contains(*y)) {
            return Err(ProblemError::Invalid(format!("exposed tuple {bad:?} is not a path")));
        }
        let mut mask = ShadowMask::empty(self.d + 1);
        for i in j..=self.d {
            let shown: BTreeSet<u64> = exposed.iter().map(|y| y[i]).collect();
            mask.set(i, self.domain(i).difference(&shown).copied().collect());
        }
        Ok(mask)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::extend_to_permutations;
    use crate::oracle::OracleBundle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity_image(n: u32) -> Vec<u64> {
        (0..1u64 << n).collect()
    }

    #[test]
    fn walk_through_tables_recovers_f() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let image: Vec<u64> = (0..16).rev().collect();
        let sh = Shuffler::sample(3, 4, &image, &mut rng).unwrap();
        let tables = sh.tables().unwrap();
        for x in 0..16u64 {
            let mut v = x;
            for t in &tables {
                v = t.get(v).unwrap().unwrap();
            }
            assert_eq!(v, image[x as usize]);
        }
    }

    #[test]
    fn tuple_and_permutation_views_agree() {
        for seed in 0..100u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = (seed % 4 + 1) as usize;
            let sh = Shuffler::sample(d, 4, &identity_image(4), &mut rng).unwrap();
            let via_perms = Shuffler::from_permutations(4, &extend_to_permutations(&sh, &mut rng), identity_image(4)).unwrap();
            assert_eq!(sh.tables().unwrap(), via_perms.tables().unwrap());
        }
    }

    #[test]
    fn shadow_g1_answers_only_on_level_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sh = Shuffler::sample(2, 3, &identity_image(3), &mut rng).unwrap();
        let bundle = OracleBundle::new("sh", sh.tables().unwrap());
        let g1 = bundle.make_shadow(&sh.shadow_sets(1, &[]).unwrap()).unwrap();
        assert_eq!(g1.sub(0).unwrap().support().count(), 8);
        for i in 1..=2 {
            assert_eq!(g1.sub(i).unwrap().support().count(), 0);
        }
        let exposed = vec![sh.paths()[5].clone()];
        let g = bundle.make_shadow(&sh.shadow_sets(1, &exposed).unwrap()).unwrap();
        for i in 1..=2 {
            assert_eq!(g.sub(i).unwrap().support().collect::<Vec<_>>(), vec![exposed[0][i]]);
        }
    }

    #[test]
    fn non_path_exposure_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let sh = Shuffler::sample(2, 3, &identity_image(3), &mut rng).unwrap();
        let mut fake = sh.paths()[0].clone();
        fake[1] ^= 1;
        assert!(sh.shadow_sets(1, &[fake]).is_err());
        assert!(sh.shadow_sets(0, &[]).is_err());
    }

    #[test]
    fn domains_follow_tuples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let sh = Shuffler::sample(2, 3, &identity_image(3), &mut rng).unwrap();
        assert_eq!(sh.domain(0), (0..8).collect());
        for i in 1..=2 {
            let t = sh.tables().unwrap();
            assert_eq!(sh.domain(i), t[i].support().collect());
        }
    }
}
