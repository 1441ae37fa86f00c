use serde::{Deserialize, Serialize};

use super::OracleError;

/// Largest supported input width of a function table.
pub const MAX_IN_BITS: u32 = 24;

/// A function `{0,1}^in_bits -> {0,1}^out_bits ∪ {⊥}` stored as a full table.
///
/// In a quantum register the response takes `out_bits + 1` qubits: the payload followed by a
/// flag bit. `⊥` is encoded as flag set, payload zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionTable {
    in_bits: u32,
    out_bits: u32,
    entries: Vec<Option<u32>>,
}

impl FunctionTable {
    pub fn from_entries(in_bits: u32, out_bits: u32, entries: Vec<Option<u32>>) -> Result<Self, OracleError> {
        if in_bits > MAX_IN_BITS || out_bits > 31 {
            return Err(OracleError::TooWide { in_bits, out_bits });
        }
        if entries.len() != 1usize << in_bits {
            return Err(OracleError::TableLength { expected: 1 << in_bits, got: entries.len() });
        }
        if let Some(v) = entries.iter().flatten().find(|&&v| u64::from(v) >> out_bits != 0) {
            return Err(OracleError::OutputOutOfRange { value: u64::from(*v), out_bits });
        }
        Ok(Self { in_bits, out_bits, entries })
    }

    /// Table with every input mapped through `f`.
    pub fn from_fn(in_bits: u32, out_bits: u32, f: impl Fn(u64) -> Option<u64>) -> Result<Self, OracleError> {
        let entries = (0..1u64 << in_bits).map(|x| f(x).map(|v| v as u32)).collect();
        Self::from_entries(in_bits, out_bits, entries)
    }

    /// Total table from a slice of outputs.
    pub fn total(in_bits: u32, out_bits: u32, values: &[u64]) -> Result<Self, OracleError> {
        Self::from_entries(in_bits, out_bits, values.iter().map(|&v| Some(v as u32)).collect())
    }

    /// Table answering `⊥` everywhere.
    pub fn bottom(in_bits: u32, out_bits: u32) -> Result<Self, OracleError> {
        Self::from_entries(in_bits, out_bits, vec![None; 1 << in_bits])
    }

    pub fn in_bits(&self) -> u32 {
        self.in_bits
    }

    pub fn out_bits(&self) -> u32 {
        self.out_bits
    }

    pub fn domain_size(&self) -> u64 {
        1 << self.in_bits
    }

    pub fn get(&self, x: u64) -> Result<Option<u64>, OracleError> {
        self.entries
            .get(x as usize)
            .map(|e| e.map(u64::from))
            .ok_or(OracleError::InputOutOfRange { x, in_bits: self.in_bits })
    }

    /// Response-register encoding of `get(x)`.
    pub fn encoded(&self, x: u64) -> Result<u64, OracleError> {
        Ok(encode(self.get(x)?, self.out_bits))
    }

    pub fn is_total(&self) -> bool {
        self.entries.iter().all(Option::is_some)
    }

    /// Inputs with a non-`⊥` answer.
    pub fn support(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().enumerate().filter(|(_, e)| e.is_some()).map(|(x, _)| x as u64)
    }

    pub fn entries(&self) -> &[Option<u32>] {
        &self.entries
    }

    /// Copy with the listed inputs answering `⊥`.
    pub fn masked<'a>(&self, inputs: impl IntoIterator<Item = &'a u64>) -> Result<Self, OracleError> {
        let mut out = self.clone();
        for &x in inputs {
            *out.entries.get_mut(x as usize).ok_or(OracleError::InputOutOfRange { x, in_bits: self.in_bits })? = None;
        }
        Ok(out)
    }
}

/// Response encoding: `v` with flag clear, or the flag bit alone for `⊥`.
pub fn encode(value: Option<u64>, out_bits: u32) -> u64 {
    value.unwrap_or(1 << out_bits)
}

/// Inverse of [`encode`]; `None` means `⊥`. Payload bits under a set flag are ignored.
pub fn decode(word: u64, out_bits: u32) -> Option<u64> {
    (word >> out_bits & 1 == 0).then_some(word & ((1 << out_bits) - 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert_eq, proptest};

    #[test]
    fn encoding_roundtrip() {
        assert_eq!(encode(None, 3), 0b1000);
        assert_eq!(decode(0b1000, 3), None);
        assert_eq!(decode(encode(Some(5), 3), 3), Some(5));
    }

    #[test]
    fn construction_checks() {
        assert!(FunctionTable::from_entries(2, 1, vec![Some(0); 3]).is_err());
        assert!(FunctionTable::from_entries(1, 1, vec![Some(2), None]).is_err());
        assert!(FunctionTable::from_entries(25, 1, vec![]).is_err());
        let t = FunctionTable::total(1, 2, &[3, 1]).unwrap();
        assert_eq!(t.get(1).unwrap(), Some(1));
        assert!(t.get(2).is_err());
        assert!(t.is_total());
        let m = t.masked(&[0]).unwrap();
        assert_eq!(m.get(0).unwrap(), None);
        assert_eq!(m.support().collect::<Vec<_>>(), vec![1]);
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(v in proptest::option::of(0u64..256), bits in 8u32..12) {
            prop_assert_eq!(decode(encode(v, bits), bits), v);
        }
    }
}
