use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gf2Error {
    #[error("rank {rank} is below the {needed} needed for a unique solution")]
    RankDeficient { rank: usize, needed: usize },
    #[error("the only solution is zero")]
    Inconsistent,
}

/// Homogeneous system `w · s = 0 (mod 2)` over `n`-bit rows.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearSystemGF2 {
    pub n: u32,
    pub rows: Vec<u64>,
}

impl LinearSystemGF2 {
    pub fn new(n: u32, rows: Vec<u64>) -> Self {
        assert!(n <= 63, "at most 63 unknowns");
        Self { n, rows }
    }

    /// Reduced row echelon form: `(pivot column, row)` pairs with each pivot cleared elsewhere.
    fn echelon(&self) -> Vec<(u32, u64)> {
        let mask = (1u64 << self.n) - 1;
        let mut basis: Vec<(u32, u64)> = Vec::new();
        for &w in &self.rows {
            let mut v = w & mask;
            for &(p, b) in &basis {
                if v >> p & 1 == 1 {
                    v ^= b;
                }
            }
            if v == 0 {
                continue;
            }
            let p = 63 - v.leading_zeros();
            for entry in &mut basis {
                if entry.1 >> p & 1 == 1 {
                    entry.1 ^= v;
                }
            }
            basis.push((p, v));
        }
        basis
    }

    pub fn rank(&self) -> usize {
        self.echelon().len()
    }

    /// A basis of `{s : w · s = 0 for every row}`.
    pub fn nullspace(&self) -> Vec<u64> {
        let basis = self.echelon();
        let pivots: u64 = basis.iter().fold(0, |acc, &(p, _)| acc | 1 << p);
        (0..self.n)
            .filter(|&f| pivots >> f & 1 == 0)
            .map(|f| {
                // Each pivot variable equals the free variable's coefficient in its row.
                basis
                    .iter()
                    .filter(|&&(_, b)| b >> f & 1 == 1)
                    .fold(1u64 << f, |s, &(p, _)| s | 1 << p)
            })
            .collect()
    }
}

/// The unique nonzero `s` orthogonal to every row, if the nullspace is exactly `{0, s}`.
pub fn gf2_nullspace(sys: &LinearSystemGF2) -> Result<u64, Gf2Error> {
    let null = sys.nullspace();
    match null.len() {
        0 => Err(Gf2Error::Inconsistent),
        1 => Ok(null[0]),
        k => Err(Gf2Error::RankDeficient { rank: sys.n as usize - k, needed: sys.n as usize - 1 }),
    }
}

pub fn dot(a: u64, b: u64) -> bool {
    (a & b).count_ones() % 2 == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest};

    fn brute_force(n: u32, rows: &[u64]) -> Vec<u64> {
        (1..1u64 << n).filter(|&s| rows.iter().all(|&w| !dot(w, s))).collect()
    }

    #[test]
    fn basis_of_complement() {
        let s = 0b101;
        let rows: Vec<u64> = (0..8).filter(|&w| !dot(w, s)).collect();
        assert_eq!(brute_force(3, &[0b010, 0b101]), vec![0b101]);
        assert_eq!(gf2_nullspace(&LinearSystemGF2::new(3, vec![0b010, 0b101])), Ok(0b101));
        assert_eq!(gf2_nullspace(&LinearSystemGF2::new(3, rows)), Ok(s));
    }

    #[test]
    fn degenerate_systems() {
        assert_eq!(
            gf2_nullspace(&LinearSystemGF2::new(2, vec![])),
            Err(Gf2Error::RankDeficient { rank: 0, needed: 1 })
        );
        assert_eq!(gf2_nullspace(&LinearSystemGF2::new(3, vec![0b010, 0b101, 0b001])), Err(Gf2Error::Inconsistent));
    }

    proptest! {
        #[test]
        fn nullspace_matches_brute_force(n in 1u32..7, rows in proptest::collection::vec(any::<u64>(), 0..8)) {
            let rows: Vec<u64> = rows.into_iter().map(|w| w & ((1 << n) - 1)).collect();
            let sys = LinearSystemGF2::new(n, rows.clone());
            let null = sys.nullspace();
            prop_assert_eq!(1usize << null.len(), brute_force(n, &rows).len() + 1);
            for s in null {
                prop_assert!(rows.iter().all(|&w| !dot(w, s)));
            }
            let expect = brute_force(n, &rows);
            match gf2_nullspace(&sys) {
                Ok(s) => prop_assert_eq!(expect, vec![s]),
                Err(Gf2Error::Inconsistent) => prop_assert!(expect.is_empty()),
                Err(Gf2Error::RankDeficient { .. }) => prop_assert!(expect.len() > 1),
            }
        }
    }
}
