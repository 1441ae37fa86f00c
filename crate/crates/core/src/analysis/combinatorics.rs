use super::Check;

/// Falling factorial `a!/(a-b)!`, zero when `b > a`.
pub fn falling(a: u64, b: u64) -> u128 {
    if b > a {
        return 0;
    }
    (a - b + 1..=a).fold(1u128, |acc, k| acc * k as u128)
}

/// Binomial coefficient, zero when `b > a`.
pub fn binomial(a: u64, b: u64) -> u128 {
    if b > a {
        return 0;
    }
    let b = b.min(a - b);
    (0..b).fold(1u128, |acc, k| acc * (a - k) as u128 / (k + 1) as u128)
}

/// Counts, over all ordered tuples and all sets of `size` distinct elements of `0..universe`,
/// how many contain element 0. Returns `(tuples_with, tuples, sets_with, sets)`.
pub fn membership_by_enumeration(universe: u64, size: u64) -> (u128, u128, u128, u128) {
    fn walk(universe: u64, size: u64, used: &mut Vec<u64>, out: &mut (u128, u128, u128, u128)) {
        if used.len() as u64 == size {
            let has = used.contains(&0);
            out.0 += u128::from(has);
            out.1 += 1;
            if used.windows(2).all(|w| w[0] < w[1]) {
                out.2 += u128::from(has);
                out.3 += 1;
            }
            return;
        }
        for v in 0..universe {
            if !used.contains(&v) {
                used.push(v);
                walk(universe, size, used, out);
                used.pop();
            }
        }
    }
    let mut out = (0, 0, 0, 0);
    walk(universe, size, &mut Vec::new(), &mut out);
    out
}

/// Exact integer checks of the permutation and combination ratios and of
/// `Pr[x in t] = N/M` for tuples and sets of `N` distinct draws from `M` values.
pub fn combinatorics_checks(max_a: u64) -> Vec<Check> {
    let mut perm_bad = 0usize;
    let mut comb_bad = 0usize;
    let mut cases = 0usize;
    for a in 0..=max_a {
        for b in 0..=a {
            cases += 1;
            // aPb / (a+1)P(b+1) = 1/(a+1)
            perm_bad += usize::from(falling(a, b) * (a as u128 + 1) != falling(a + 1, b + 1));
            // aCb / (a+1)C(b+1) = (b+1)/(a+1)
            comb_bad += usize::from(binomial(a, b) * (a as u128 + 1) != binomial(a + 1, b + 1) * (b as u128 + 1));
        }
    }
    let mut member_bad = 0usize;
    let mut member_cases = 0usize;
    for m in 1..=max_a {
        for n in 1..=m {
            member_cases += 1;
            let (m128, n128) = (m as u128, n as u128);
            let tuples_ok = n128 * falling(m - 1, n - 1) * m128 == falling(m, n) * n128;
            let sets_ok = binomial(m - 1, n - 1) * m128 == binomial(m, n) * n128;
            member_bad += usize::from(!tuples_ok || !sets_ok);
        }
    }
    let mut enum_bad = 0usize;
    let mut enum_cases = 0usize;
    for m in 1..=6u64 {
        for n in 1..=m {
            enum_cases += 1;
            let (tw, t, sw, s) = membership_by_enumeration(m, n);
            let ok = tw * m as u128 == t * n as u128 && sw * m as u128 == s * n as u128;
            enum_bad += usize::from(!ok);
        }
    }
    let line = |name: &str, bad: usize, cases: usize| Check::exact(name, bad as f64, 0.0, format!("{bad} of {cases} cases differ"));
    vec![
        line("permutation-ratio", perm_bad, cases),
        line("combination-ratio", comb_bad, cases),
        line("membership-n-over-m", member_bad, member_cases),
        line("membership-enumeration", enum_bad, enum_cases),
    ]
}
