use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_n, pack_pair, sample_one_to_one, sample_simon, sample_two_to_one, ProblemError, Shuffler, MAX_SCS_N};
use crate::oracle::{FunctionTable, OracleBundle, ShadowMask, StochasticOracle, StochasticOutcome};

/// The collision-to-Simon map between two 2-to-1 functions and its inverse.
///
/// The pre-images of `f`'s k-th largest image, in ascending order, go to the pre-images of
/// `g`'s k-th largest image, in ascending order.
pub fn cs_map(f: &FunctionTable, g: &FunctionTable) -> Result<(Vec<u64>, Vec<u64>), ProblemError> {
    let groups = |t: &FunctionTable| -> Result<Vec<(u64, u64)>, ProblemError> {
        let mut by_image: std::collections::BTreeMap<u64, Vec<u64>> = Default::default();
        for x in 0..t.domain_size() {
            let v = t.get(x)?.ok_or_else(|| ProblemError::Invalid("2-to-1 function must be total".into()))?;
            by_image.entry(v).or_default().push(x);
        }
        if by_image.values().any(|xs| xs.len() != 2) {
            return Err(ProblemError::Invalid("function is not 2-to-1".into()));
        }
        Ok(by_image.into_values().rev().map(|xs| (xs[0], xs[1])).collect())
    };
    let (fg, gg) = (groups(f)?, groups(g)?);
    let mut p = vec![0u64; f.domain_size() as usize];
    let mut p_inv = vec![0u64; f.domain_size() as usize];
    for ((a0, a1), (b0, b1)) in fg.into_iter().zip(gg) {
        p[a0 as usize] = b0;
        p[a1 as usize] = b1;
        p_inv[b0 as usize] = a0;
        p_inv[b1 as usize] = a1;
    }
    Ok((p, p_inv))
}

/// Shuffled collision-to-Simon instance.
///
/// Bundle layout: sub-oracles `0..=d` are the shuffler hiding `h`, `d + 1` is `p'` and
/// `d + 2` is `p'_inv`, both over pairs packed as `first * 2^n + second`:
/// `p'(h(f(x)), x) = p(x)` and `p'_inv(h(f(x)), p(x)) = x`, `⊥` elsewhere.
/// The stochastic oracle answers `b -> (x_b, y)` for a uniform image `y` of `f` with
/// `f^{-1}(y) = {x_0 < x_1}`, packed as `x_b * 2^n + y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScsInstance {
    pub n: u32,
    pub d: usize,
    pub f: FunctionTable,
    pub g: FunctionTable,
    pub period: u64,
    pub p: Vec<u64>,
    pub p_inv: Vec<u64>,
    pub h: Vec<u64>,
    pub shuffler: Shuffler,
    pub bundle: OracleBundle,
    pub stochastic: StochasticOracle,
}

impl ScsInstance {
    pub fn build(f: FunctionTable, g: FunctionTable, period: u64, shuffler: Shuffler) -> Result<Self, ProblemError> {
        let (n, d) = (shuffler.n, shuffler.d);
        check_n(n, MAX_SCS_N)?;
        if super::simon_period(&g) != Some(period) {
            return Err(ProblemError::Invalid("g is not a Simon function with the stated period".into()));
        }
        let (p, p_inv) = cs_map(&f, &g)?;
        let h = shuffler.image().to_vec();
        let hf = |x: u64| h[f.get(x).unwrap().unwrap() as usize];
        let size = 1u64 << n;
        let mut pp = vec![None; 1 << (2 * n)];
        let mut pi = vec![None; 1 << (2 * n)];
        for x in 0..size {
            pp[pack_pair(hf(x), x, n) as usize] = Some(p[x as usize] as u32);
            pi[pack_pair(hf(x), p[x as usize], n) as usize] = Some(x as u32);
        }
        let mut subs = shuffler.tables()?;
        subs.push(FunctionTable::from_entries(2 * n, n, pp)?);
        subs.push(FunctionTable::from_entries(2 * n, n, pi)?);
        let images: BTreeSet<u64> = (0..size).map(|x| f.get(x).unwrap().unwrap()).collect();
        let weight = 1.0 / images.len() as f64;
        let outcomes = images
            .iter()
            .map(|&y| {
                let pre: Vec<u64> = (0..size).filter(|&x| f.get(x).unwrap() == Some(y)).collect();
                let table = FunctionTable::total(1, 2 * n, &[pack_pair(pre[0], y, n), pack_pair(pre[1], y, n)])?;
                Ok(StochasticOutcome { y, weight, table })
            })
            .collect::<Result<Vec<_>, ProblemError>>()?;
        Ok(Self {
            n,
            d,
            period,
            p,
            p_inv,
            h,
            bundle: OracleBundle::new(format!("scs(d={d},n={n})"), subs),
            stochastic: StochasticOracle::new("collision-sampler", outcomes)?,
            f,
            g,
            shuffler,
        })
    }

    pub fn p_prime(&self) -> usize {
        self.d + 1
    }

    pub fn p_prime_inv(&self) -> usize {
        self.d + 2
    }

    /// Pre-images of `y` under `f`, ascending.
    pub fn preimages(&self, y: u64) -> Vec<u64> {
        (0..1u64 << self.n).filter(|&x| self.f.get(x).ok().flatten() == Some(y)).collect()
    }

    fn hf(&self, x: u64) -> u64 {
        self.h[self.f.get(x).unwrap().unwrap() as usize]
    }

    /// Masks `p'` and `p'_inv` everywhere on their support except at the revealed inputs `xs`.
    pub fn shadow_sets(&self, revealed: &[u64]) -> Result<ShadowMask, ProblemError> {
        let size = 1u64 << self.n;
        if let Some(&x) = revealed.iter().find(|&&x| x >= size) {
            return Err(ProblemError::Parameter(format!("revealed input {x} out of range")));
        }
        let keep: BTreeSet<u64> = revealed.iter().copied().collect();
        let hidden = (0..size).filter(|x| !keep.contains(x));
        let mut mask = ShadowMask::empty(self.bundle.len());
        mask.set(self.p_prime(), hidden.clone().map(|x| pack_pair(self.hf(x), x, self.n)).collect());
        mask.set(
            self.p_prime_inv(),
            hidden.map(|x| pack_pair(self.hf(x), self.p[x as usize], self.n)).collect(),
        );
        Ok(mask)
    }

    /// Adds the collision partner of every revealed `x` whose image `f(x)` is among `known_ys`.
    pub fn close_collisions(&self, revealed: &[u64], known_ys: &BTreeSet<u64>) -> Vec<u64> {
        let mut out: BTreeSet<u64> = revealed.iter().copied().collect();
        for &x in revealed {
            if let Ok(Some(y)) = self.f.get(x) {
                if known_ys.contains(&y) {
                    out.extend(self.preimages(y));
                }
            }
        }
        out.into_iter().collect()
    }
}

/// Samples a d-SCS instance: `f` uniform 2-to-1, `(g, s)` uniform Simon, `h` a uniform
/// permutation hidden behind a d-Shuffler.
pub fn sample_scs<R: Rng + ?Sized>(d: usize, n: u32, rng: &mut R) -> Result<ScsInstance, ProblemError> {
    check_n(n, MAX_SCS_N)?;
    if n < 2 {
        return Err(ProblemError::SizeOutOfRange { n, max: MAX_SCS_N });
    }
    let f = sample_two_to_one(n, rng)?;
    let simon = sample_simon(n, rng)?;
    let h = sample_one_to_one(n, rng)?;
    let image: Vec<u64> = (0..1u64 << n).map(|x| h.get(x).unwrap().unwrap()).collect();
    let shuffler = Shuffler::sample(d, n, &image, rng)?;
    ScsInstance::build(f, simon.table, simon.period, shuffler)
}
