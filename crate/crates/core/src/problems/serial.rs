use std::collections::BTreeSet;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{check_n, pack_pair, GenericProblem, ProblemError, Variant, MAX_PAIRED_N};
use crate::oracle::{FunctionTable, OracleBundle, ShadowMask};

/// One gated level: the function `f_i` and its period `s_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerialLevel {
    pub table: FunctionTable,
    pub period: u64,
}

/// A c-Serial instance.
///
/// Sub-oracle `i` takes the pair `(x, z)` packed as `x * 2^n + z`. Sub-oracle 0 ignores `z`;
/// sub-oracle `i` in `1..=c` answers `⊥` unless `z = s_{i-1}`. Sub-oracle `c` carries the
/// terminal function `Q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SerialInstance {
    pub n: u32,
    pub c: usize,
    pub variant: Variant,
    pub levels: Vec<SerialLevel>,
    pub terminal: FunctionTable,
    /// Period of `Q` when it is a search instance.
    pub terminal_period: Option<u64>,
    /// Decision label: 0 when `Q` came from the search distribution, 1 for the decoy.
    pub label: Option<u8>,
    pub bundle: OracleBundle,
}

fn gated(n: u32, f: &FunctionTable, gate: Option<u64>) -> Result<FunctionTable, ProblemError> {
    Ok(FunctionTable::from_fn(2 * n, n, |v| {
        let (x, z) = (v >> n, v & ((1 << n) - 1));
        match gate {
            Some(g) if z != g => None,
            _ => f.get(x).ok().flatten(),
        }
    })?)
}

impl SerialInstance {
    /// Assembles the gated bundle from levels and the terminal function.
    pub fn build(
        n: u32,
        variant: Variant,
        levels: Vec<SerialLevel>,
        terminal: FunctionTable,
        terminal_period: Option<u64>,
        label: Option<u8>,
    ) -> Result<Self, ProblemError> {
        check_n(n, MAX_PAIRED_N)?;
        if levels.is_empty() {
            return Err(ProblemError::Parameter("c must be at least 1".into()));
        }
        let mut subs = Vec::with_capacity(levels.len() + 1);
        let mut gate = None;
        for level in &levels {
            subs.push(gated(n, &level.table, gate)?);
            gate = Some(level.period);
        }
        subs.push(gated(n, &terminal, gate)?);
        let c = levels.len();
        Ok(Self {
            n,
            c,
            variant,
            levels,
            terminal,
            terminal_period,
            label,
            bundle: OracleBundle::new(format!("serial(c={c},n={n})"), subs),
        })
    }

    /// Expected output of a correct solver.
    pub fn answer(&self) -> u64 {
        match self.variant {
            Variant::Search => self.terminal_period.unwrap_or(0),
            Variant::Decision => u64::from(self.label.unwrap_or(0)),
        }
    }

    /// Packed query `(x, z)`.
    pub fn pair(&self, x: u64, z: u64) -> u64 {
        pack_pair(x, z, self.n)
    }

    /// Exhaustively checks the gate rule on every sub-oracle.
    pub fn gate_check(&self) -> Result<(), ProblemError> {
        let rebuilt = Self::build(
            self.n,
            self.variant,
            self.levels.clone(),
            self.terminal.clone(),
            self.terminal_period,
            self.label,
        )?;
        if rebuilt.bundle.subs() != self.bundle.subs() {
            return Err(ProblemError::Invalid("gated sub-oracles disagree with their levels".into()));
        }
        for (i, level) in self.levels.iter().enumerate() {
            if super::simon_period(&level.table) != Some(level.period) {
                return Err(ProblemError::Invalid(format!("level {i} is not a Simon function with its period")));
            }
        }
        Ok(())
    }

    /// Shadow sets `(∅, …, ∅, E×s_{j-1}, …, E×s_{c-1})` indexed by sub-oracle; sub-oracle `i`
    /// is masked on `{(x, s_{i-1})}` for `i >= j`. Valid for `1 <= j <= c + 1`.
    pub fn shadow_sets(&self, j: usize) -> Result<ShadowMask, ProblemError> {
        if j == 0 || j > self.c + 1 {
            return Err(ProblemError::Parameter(format!("shadow index {j} outside 1..={}", self.c + 1)));
        }
        let mut mask = ShadowMask::empty(self.c + 1);
        for i in j..=self.c {
            let z = self.levels[i - 1].period;
            let set: BTreeSet<u64> = (0..1u64 << self.n).map(|x| self.pair(x, z)).collect();
            mask.set(i, set);
        }
        Ok(mask)
    }
}

/// Samples a c-Serial instance over `inner`.
pub fn sample_serial<R: RngCore>(
    c: usize,
    n: u32,
    inner: &dyn GenericProblem,
    variant: Variant,
    rng: &mut R,
) -> Result<SerialInstance, ProblemError> {
    check_n(n, MAX_PAIRED_N)?;
    if c == 0 {
        return Err(ProblemError::Parameter("c must be at least 1".into()));
    }
    let levels = (0..c)
        .map(|_| inner.sample_search(n, rng).map(|(table, period)| SerialLevel { table, period }))
        .collect::<Result<Vec<_>, _>>()?;
    let (terminal, period, label) = match variant {
        Variant::Search => {
            let (t, s) = inner.sample_search(n, rng)?;
            (t, Some(s), None)
        }
        Variant::Decision => {
            if rng.gen_bool(0.5) {
                let (t, s) = inner.sample_search(n, rng)?;
                (t, Some(s), Some(0))
            } else {
                (inner.sample_decoy(n, rng)?, None, Some(1))
            }
        }
    };
    SerialInstance::build(n, variant, levels, terminal, period, label)
}
