use serde::{Deserialize, Serialize};

use super::StateError;

/// A named contiguous block of qubits.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl Register {
    pub fn qubits(&self) -> Vec<usize> {
        (self.start..self.start + self.len).collect()
    }

    pub fn contains(&self, qubit: usize) -> bool {
        qubit >= self.start && qubit < self.start + self.len
    }
}

/// Layout of named registers. Registers are allocated back to back and never overlap.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegisterMap {
    registers: Vec<Register>,
    width: usize,
}

impl RegisterMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a register of `len` qubits and returns its qubit indices.
    pub fn alloc(&mut self, name: &str, len: usize) -> Result<Vec<usize>, StateError> {
        if self.get(name).is_some() {
            return Err(StateError::DuplicateRegister(name.to_string()));
        }
        let reg = Register { name: name.to_string(), start: self.width, len };
        self.width += len;
        let qubits = reg.qubits();
        self.registers.push(reg);
        Ok(qubits)
    }

    pub fn get(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    pub fn qubits(&self, name: &str) -> Option<Vec<usize>> {
        self.get(name).map(Register::qubits)
    }

    pub fn num_qubits(&self) -> usize {
        self.width
    }

    pub fn iter(&self) -> impl Iterator<Item = &Register> {
        self.registers.iter()
    }

    /// Name of the register holding `qubit`, if any.
    pub fn owner(&self, qubit: usize) -> Option<&str> {
        self.registers.iter().find(|r| r.contains(qubit)).map(|r| r.name.as_str())
    }
}

/// Reads the integer held by `qubits` in basis index `index`; bit `j` of the result is `qubits[j]`.
pub fn extract(index: u128, qubits: &[usize]) -> u64 {
    qubits
        .iter()
        .enumerate()
        .fold(0u64, |acc, (j, &q)| acc | ((((index >> q) & 1) as u64) << j))
}

/// Writes `value` into the positions named by `qubits`, leaving other bits of `index` intact.
pub fn deposit(index: u128, qubits: &[usize], value: u64) -> u128 {
    qubits.iter().enumerate().fold(index, |acc, (j, &q)| {
        let bit = ((value >> j) & 1) as u128;
        (acc & !(1u128 << q)) | (bit << q)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alloc_is_contiguous_and_disjoint() {
        let mut m = RegisterMap::new();
        assert_eq!(m.alloc("x", 3).unwrap(), vec![0, 1, 2]);
        assert_eq!(m.alloc("y", 2).unwrap(), vec![3, 4]);
        assert_eq!(m.num_qubits(), 5);
        assert_eq!(m.owner(4), Some("y"));
        assert!(m.alloc("x", 1).is_err());
    }

    #[test]
    fn extract_deposit_roundtrip() {
        let qubits = [5, 1, 7];
        let idx = deposit(0, &qubits, 0b101);
        assert_eq!(idx, (1 << 5) | (1 << 7));
        assert_eq!(extract(idx, &qubits), 0b101);
    }
}
