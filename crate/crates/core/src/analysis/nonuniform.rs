use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// Largest number of points handled exhaustively.
pub const MAX_EXHAUSTIVE_N: usize = 5;

/// One path `x -> y` of a permutation.
pub type Pair = (u8, u8);

fn check_n(n: usize) -> Result<(), AnalysisError> {
    if n == 0 || n > MAX_EXHAUSTIVE_N {
        return Err(AnalysisError::TooLarge { got: n, max: MAX_EXHAUSTIVE_N });
    }
    Ok(())
}

fn is_partial_injection(pairs: &[Pair]) -> bool {
    pairs.iter().enumerate().all(|(i, a)| {
        pairs[..i].iter().all(|b| (a.0 == b.0) == (a.1 == b.1) && (a.0 != b.0 || a == b))
    })
}

fn contains(perm: &[u8], part: &[Pair]) -> bool {
    part.iter().all(|&(x, y)| perm[x as usize] == y)
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// All permutations of `0..n` in lexicographic order; `perm[x]` is the image of `x`.
pub fn all_permutations(n: usize) -> Vec<Vec<u8>> {
    fn walk(n: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for v in 0..n as u8 {
            if !cur.contains(&v) {
                cur.push(v);
                walk(n, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(n, &mut Vec::new(), &mut out);
    out
}

/// `Pr[S ⊆ parts(u)]` for `u` uniform among permutations containing `beta`; zero when
/// `S ∪ beta` is not a partial injection.
pub fn uniform_part_probability(n: usize, beta: &[Pair], s: &[Pair]) -> f64 {
    let mut union: Vec<Pair> = beta.to_vec();
    union.extend(s.iter().filter(|p| !beta.contains(p)));
    if !is_partial_injection(&union) || union.len() > n {
        return 0.0;
    }
    factorial(n - union.len()) / factorial(n - beta.len())
}

/// Explicit distribution over the permutations of `0..n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermDistribution {
    n: usize,
    probs: BTreeMap<Vec<u8>, f64>,
}

impl PermDistribution {
    pub fn uniform(n: usize) -> Result<Self, AnalysisError> {
        check_n(n)?;
        let perms = all_permutations(n);
        let p = 1.0 / perms.len() as f64;
        Ok(Self { n, probs: perms.into_iter().map(|q| (q, p)).collect() })
    }

    pub fn point(perm: Vec<u8>) -> Result<Self, AnalysisError> {
        Self::from_weights(perm.len(), [(perm, 1.0)].into())
    }

    /// Weights must form a distribution over valid permutations within `1e-12`.
    pub fn from_weights(n: usize, probs: BTreeMap<Vec<u8>, f64>) -> Result<Self, AnalysisError> {
        check_n(n)?;
        for perm in probs.keys() {
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            if sorted != (0..n as u8).collect::<Vec<_>>() {
                return Err(AnalysisError::Precondition(format!("{perm:?} is not a permutation of 0..{n}")));
            }
        }
        let total: f64 = probs.values().sum();
        if (total - 1.0).abs() > 1e-12 || probs.values().any(|&p| p < 0.0) {
            return Err(AnalysisError::Precondition(format!("weights sum to {total}")));
        }
        Ok(Self { n, probs: probs.into_iter().filter(|(_, p)| *p > 0.0).collect() })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &BTreeMap<Vec<u8>, f64> {
        &self.probs
    }

    pub fn prob(&self, perm: &[u8]) -> f64 {
        self.probs.get(perm).copied().unwrap_or(0.0)
    }

    /// The distribution conditioned on `pred` and the mass it had; `None` for mass zero.
    pub fn conditioned(&self, pred: impl Fn(&[u8]) -> bool) -> Option<(Self, f64)> {
        let kept: BTreeMap<Vec<u8>, f64> = self.probs.iter().filter(|(q, _)| pred(q)).map(|(q, p)| (q.clone(), *p)).collect();
        let mass: f64 = kept.values().sum();
        (mass > 0.0).then(|| (Self { n: self.n, probs: kept.into_iter().map(|(q, p)| (q, p / mass)).collect() }, mass))
    }

    /// `Pr[S ⊆ parts(t)]`.
    pub fn part_probability(&self, part: &[Pair]) -> f64 {
        self.probs.iter().filter(|(q, _)| contains(q, part)).map(|(_, p)| p).sum()
    }

    fn supports(&self, beta: &[Pair]) -> bool {
        self.probs.keys().all(|q| contains(q, beta))
    }
}

/// Calls `visit(part, Pr_t[part])` for every nonempty part disjoint from `beta` with positive
/// probability, extending parts in increasing `x` so each is seen once. Branches whose
/// probability vanishes are pruned.
fn for_each_part(dist: &PermDistribution, beta: &[Pair], mut visit: impl FnMut(&[Pair], f64)) {
    let n = dist.n;
    let support: Vec<(&Vec<u8>, f64)> = dist.probs.iter().map(|(q, p)| (q, *p)).collect();
    let free_x: Vec<u8> = (0..n as u8).filter(|x| beta.iter().all(|b| b.0 != *x)).collect();
    let free_y: Vec<u8> = (0..n as u8).filter(|y| beta.iter().all(|b| b.1 != *y)).collect();
    fn walk(
        from: usize,
        free_x: &[u8],
        free_y: &[u8],
        part: &mut Vec<Pair>,
        support: &[(&Vec<u8>, f64)],
        visit: &mut dyn FnMut(&[Pair], f64),
    ) {
        for (i, &x) in free_x.iter().enumerate().skip(from) {
            for &y in free_y {
                if part.iter().any(|p| p.1 == y) {
                    continue;
                }
                let sub: Vec<(&Vec<u8>, f64)> = support.iter().filter(|(q, _)| q[x as usize] == y).copied().collect();
                if sub.is_empty() {
                    continue;
                }
                part.push((x, y));
                visit(part, sub.iter().map(|(_, p)| p).sum());
                walk(i + 1, free_x, free_y, part, &sub, visit);
                part.pop();
            }
        }
    }
    walk(0, &free_x, &free_y, &mut Vec::new(), &support, &mut visit);
}

/// `δ* = max_S (1/|S|) log2(Pr_t[S] / Pr_u[S | beta])` over parts disjoint from `beta`, with a
/// witness attaining it (smallest such part on ties). `dist` must be supported on
/// permutations containing `beta`.
pub fn nonuniformity_delta(dist: &PermDistribution, beta: &[Pair]) -> Result<(f64, Vec<Pair>), AnalysisError> {
    check_n(dist.n)?;
    if !is_partial_injection(beta) || !dist.supports(beta) {
        return Err(AnalysisError::Precondition("distribution is not supported on the fixed paths".into()));
    }
    let mut best: Option<(f64, Vec<Pair>)> = None;
    for_each_part(dist, beta, |part, pt| {
        let delta = (pt / uniform_part_probability(dist.n, beta, part)).log2() / part.len() as f64;
        let better = match &best {
            None => true,
            Some((d, w)) => delta > d + 1e-12 || (delta > d - 1e-12 && part.len() < w.len()),
        };
        if better {
            best = Some((delta, part.to_vec()));
        }
    });
    Ok(best.unwrap_or((0.0, Vec::new())))
}

/// One piece of a decomposition: weight, the extra paths it fixes and the distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub fixed: Vec<Pair>,
    pub dist: PermDistribution,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    /// The input conditioned on the advice value, and the mass of that value.
    pub conditioned: PermDistribution,
    pub advice_mass: f64,
    pub beta: Vec<Pair>,
    pub components: Vec<Component>,
    pub residual_weight: f64,
    pub residual: Option<PermDistribution>,
    /// Exponent per path used to detect violations (`δ + δ'`).
    pub threshold: f64,
    /// `m / δ` with `m = log2(1/γ)`.
    pub first_cap: f64,
}

impl DecompositionResult {
    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum::<f64>() + self.residual_weight
    }

    /// Largest pointwise gap between the recombined mixture and the conditioned input.
    pub fn reconstruction_error(&self) -> f64 {
        all_permutations(self.conditioned.n)
            .iter()
            .map(|q| {
                let mix: f64 = self.components.iter().map(|c| c.weight * c.dist.prob(q)).sum::<f64>()
                    + self.residual.as_ref().map_or(0.0, |r| self.residual_weight * r.prob(q));
                (mix - self.conditioned.prob(q)).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn max_fixed(&self) -> usize {
        self.components.iter().map(|c| c.fixed.len()).max().unwrap_or(0)
    }

    /// Size of the part fixed by the first split, if the loop split at all.
    pub fn first_fixed(&self) -> Option<usize> {
        self.components.first().map(|c| c.fixed.len()).filter(|&k| k > 0)
    }
}

/// Conditions `dist` on `advice = r` and splits it the constructive way: while the remainder
/// weighs more than `γ`, take the largest part `S` with
/// `Pr[S] > 2^{(δ+δ')|S|} Pr_u[S | beta]`; the remainder conditioned on `S` becomes a
/// component fixing `S`, and the rest carries on. A remainder with no such part is the last
/// component; one of weight at most `γ` is the residual.
pub fn decompose_conditioned(
    dist: &PermDistribution,
    advice: &dyn Fn(&[u8]) -> u8,
    r: u8,
    gamma: f64,
    delta: f64,
    beta: &[Pair],
    delta_extra: f64,
) -> Result<DecompositionResult, AnalysisError> {
    check_n(dist.n)?;
    if !(gamma > 0.0 && gamma <= 1.0 && delta > 0.0 && delta_extra >= 0.0) {
        return Err(AnalysisError::Precondition("need 0 < γ <= 1, δ > 0 and δ' >= 0".into()));
    }
    if !is_partial_injection(beta) || !dist.supports(beta) {
        return Err(AnalysisError::Precondition("distribution is not supported on the fixed paths".into()));
    }
    let (conditioned, advice_mass) = dist
        .conditioned(|q| advice(q) == r)
        .filter(|(_, m)| *m >= gamma)
        .ok_or_else(|| AnalysisError::Precondition(format!("advice value {r} has probability below γ = {gamma}")))?;
    let threshold = delta + delta_extra;
    let mut rest: BTreeMap<Vec<u8>, f64> = conditioned.probs.clone();
    let mut components = Vec::new();
    let (residual_weight, residual) = loop {
        let w: f64 = rest.values().sum();
        let normalized = |m: &BTreeMap<Vec<u8>, f64>, w: f64| PermDistribution {
            n: dist.n,
            probs: m.iter().map(|(q, p)| (q.clone(), p / w)).collect(),
        };
        if w <= gamma {
            break (w, (w > 0.0).then(|| normalized(&rest, w)));
        }
        let current = normalized(&rest, w);
        let mut pick: Option<(usize, f64, Vec<Pair>)> = None;
        for_each_part(&current, beta, |part, pt| {
            let limit = 2f64.powf(threshold * part.len() as f64) * uniform_part_probability(dist.n, beta, part);
            if pt <= limit * (1.0 + 1e-12) {
                return;
            }
            let excess = pt / limit;
            let better = match &pick {
                None => true,
                Some((k, e, _)) => part.len() > *k || (part.len() == *k && excess > *e + 1e-12),
            };
            if better {
                pick = Some((part.len(), excess, part.to_vec()));
            }
        });
        match pick {
            None => {
                components.push(Component { weight: w, fixed: Vec::new(), dist: current });
                break (0.0, None);
            }
            Some((_, _, part)) => {
                let inside: BTreeMap<Vec<u8>, f64> =
                    rest.iter().filter(|(q, _)| contains(q, &part)).map(|(q, p)| (q.clone(), *p)).collect();
                let mass: f64 = inside.values().sum();
                rest.retain(|q, _| !contains(q, &part));
                components.push(Component { weight: mass, fixed: part, dist: normalized(&inside, mass) });
            }
        }
    };
    Ok(DecompositionResult {
        conditioned,
        advice_mass,
        beta: beta.to_vec(),
        components,
        residual_weight,
        residual,
        threshold,
        first_cap: (1.0 / gamma).log2() / delta,
    })
}

/// A random advice function from the permutations of `0..n` to `0..4`.
pub fn random_advice(n: usize, seed: u64) -> Result<BTreeMap<Vec<u8>, u8>, AnalysisError> {
    check_n(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(all_permutations(n).into_iter().map(|q| (q, rng.gen_range(0..4))).collect())
}

/// Second-level decomposition of every component and the measured non-uniformity of the
/// resulting pieces relative to all the paths they fix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompositionReport {
    pub first: DecompositionResult,
    pub second: Vec<DecompositionResult>,
    /// Largest `δ*` over second-level pieces, measured against `beta ∪ S_i ∪ S_ij`.
    pub worst_delta: f64,
    /// Largest `|S_i| + |S_ij|`.
    pub max_total_fixed: usize,
}

/// Decomposes `dist | g1 = r1` with `(γ, δ)`, then each component again under `g2` (at its
/// most likely value) with baseline `beta ∪ S_i` and `δ' = δ`.
pub fn compose_check(
    dist: &PermDistribution,
    g1: &dyn Fn(&[u8]) -> u8,
    r1: u8,
    g2: &dyn Fn(&[u8]) -> u8,
    gamma: f64,
    delta: f64,
    beta: &[Pair],
) -> Result<CompositionReport, AnalysisError> {
    let first = decompose_conditioned(dist, g1, r1, gamma, delta, beta, 0.0)?;
    let mut second = Vec::new();
    let (mut worst_delta, mut max_total_fixed) = (0.0f64, 0usize);
    for comp in &first.components {
        let base: Vec<Pair> = beta.iter().chain(&comp.fixed).copied().collect();
        let mut mass = [0.0f64; 256];
        for (q, p) in comp.dist.probs() {
            mass[g2(q) as usize] += p;
        }
        let r2 = (0..=255u8).max_by(|a, b| mass[*a as usize].total_cmp(&mass[*b as usize]).then(b.cmp(a))).unwrap_or(0);
        if mass[r2 as usize] < gamma {
            continue;
        }
        let sub = decompose_conditioned(&comp.dist, g2, r2, gamma, delta, &base, delta)?;
        for piece in &sub.components {
            let all: Vec<Pair> = base.iter().chain(&piece.fixed).copied().collect();
            worst_delta = worst_delta.max(nonuniformity_delta(&piece.dist, &all)?.0);
            max_total_fixed = max_total_fixed.max(comp.fixed.len() + piece.fixed.len());
        }
        second.push(sub);
    }
    Ok(CompositionReport { first, second, worst_delta, max_total_fixed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    #[test]
    fn permutation_and_part_counts() {
        assert_eq!(all_permutations(4).len(), 24);
        let u = PermDistribution::uniform(4).unwrap();
        let mut by_size = [0usize; 5];
        for_each_part(&u, &[], |p, _| by_size[p.len()] += 1);
        // C(4,k)^2 k! partial injections of size k.
        assert_eq!(by_size, [0, 16, 72, 96, 24]);
    }

    #[test]
    fn uniform_is_zero_non_uniform() {
        for n in 1..=5 {
            let (d, _) = nonuniformity_delta(&PermDistribution::uniform(n).unwrap(), &[]).unwrap();
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn point_mass_on_s3() {
        // Pr_u[S] = (3-|S|)!/3!, so the ratio per path is log2 3, log2(6)/2, log2(6)/3.
        let (d, w) = nonuniformity_delta(&PermDistribution::point(vec![1, 2, 0]).unwrap(), &[]).unwrap();
        assert!((d - 3f64.log2()).abs() < 1e-12);
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn conditioned_on_fixed_point() {
        let (t, mass) = PermDistribution::uniform(3).unwrap().conditioned(|q| q[0] == 0).unwrap();
        assert!((mass - 1.0 / 3.0).abs() < 1e-12);
        let (d, w) = nonuniformity_delta(&t, &[]).unwrap();
        assert!((d - 3f64.log2()).abs() < 1e-12);
        assert_eq!(w, vec![(0, 0)]);
        // Against the baseline that already fixes 0 -> 0 it is uniform.
        assert!(nonuniformity_delta(&t, &[(0, 0)]).unwrap().0.abs() < 1e-12);
    }

    #[test]
    fn refuses_large_or_unsupported_inputs() {
        assert!(PermDistribution::uniform(6).is_err());
        let u = PermDistribution::uniform(3).unwrap();
        assert!(nonuniformity_delta(&u, &[(0, 0)]).is_err());
    }

    #[test]
    fn constant_advice_is_vacuous() {
        let u = PermDistribution::uniform(4).unwrap();
        let res = decompose_conditioned(&u, &|_| 0, 0, 0.1, 1.0, &[], 0.0).unwrap();
        assert_eq!(res.components.len(), 1);
        assert!(res.components[0].fixed.is_empty());
        let dist = &res.components[0].dist;
        assert!(u.probs().iter().all(|(k, p)| (dist.prob(k) - p).abs() < 1e-12));
        assert_eq!(res.residual_weight, 0.0);
    }

    #[test]
    fn first_coordinate_advice_at_three() {
        let u = PermDistribution::uniform(3).unwrap();
        let gamma = 1.0 / 6.0;
        let res = decompose_conditioned(&u, &|q| q[0], 0, gamma, 1.0, &[], 0.0).unwrap();
        let m = 6f64.log2();
        assert!(res.components.iter().all(|c| (c.fixed.len() as f64) < 2.0 * m));
        assert_eq!(res.components[0].fixed, vec![(0, 0)]);
        assert!(res.reconstruction_error() < 1e-9);
        assert!((res.total_weight() - 1.0).abs() < 1e-9 && res.residual_weight <= gamma);
    }

    #[test]
    fn rare_advice_value_is_rejected() {
        let u = PermDistribution::uniform(3).unwrap();
        let err = decompose_conditioned(&u, &|q| u8::from(q == [2, 1, 0]), 1, 0.5, 1.0, &[], 0.0);
        assert!(matches!(err, Err(AnalysisError::Precondition(_))));
    }

    fn check_family(n: usize, seeds: std::ops::Range<u64>) {
        let u = PermDistribution::uniform(n).unwrap();
        let gamma = 1.0 / factorial(n);
        let delta = 1.0;
        let m = (1.0 / gamma).log2();
        for seed in seeds {
            let g = random_advice(n, seed).unwrap();
            let advice = |q: &[u8]| g[q];
            for r in 0..4u8 {
                let Ok(res) = decompose_conditioned(&u, &advice, r, gamma, delta, &[], 0.0) else { continue };
                assert!(res.reconstruction_error() < 1e-9);
                assert!((res.total_weight() - 1.0).abs() < 1e-9);
                assert!(res.residual_weight <= gamma + 1e-12);
                assert!(res.components.iter().all(|c| (c.fixed.len() as f64) < 2.0 * m / delta));
                if let Some(k) = res.first_fixed() {
                    assert!((k as f64) < res.first_cap);
                }
                for c in &res.components {
                    let (d, _) = nonuniformity_delta(&c.dist, &c.fixed).unwrap();
                    assert!(d <= delta + 1e-9, "seed {seed} r {r}: δ* = {d}");
                }
            }
        }
    }

    #[test]
    fn random_advice_family_at_three_and_four() {
        check_family(3, 0..20);
        check_family(4, 0..20);
    }

    #[test]
    fn composition_stays_within_twice_delta() {
        let u = PermDistribution::uniform(4).unwrap();
        for seed in 0..5 {
            let (g1, g2) = (random_advice(4, seed).unwrap(), random_advice(4, seed + 100).unwrap());
            let rep = compose_check(&u, &|q| g1[q], g1[&vec![0, 1, 2, 3]], &|q| g2[q], 1.0 / 24.0, 1.0, &[]).unwrap();
            assert!(rep.worst_delta <= 2.0 + 1e-9, "{}", rep.worst_delta);
            let cap = 2.0 * 24f64.log2();
            assert!((rep.max_total_fixed as f64) < 2.0 * cap);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn delta_is_attained_by_the_witness(seed in any::<u64>(), n in 2usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw: BTreeMap<Vec<u8>, f64> = all_permutations(n).into_iter().map(|q| (q, rng.gen_range(0.0..1.0))).collect();
            let total: f64 = raw.values().sum();
            let t = PermDistribution::from_weights(n, raw.into_iter().map(|(q, p)| (q, p / total)).collect()).unwrap();
            let (d, w) = nonuniformity_delta(&t, &[]).unwrap();
            let attained = (t.part_probability(&w) / uniform_part_probability(n, &[], &w)).log2() / w.len() as f64;
            prop_assert!((d - attained).abs() < 1e-9);
            prop_assert!(d >= -1e-12);
        }
    }
}
