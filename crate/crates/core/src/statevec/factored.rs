use std::collections::{BTreeMap, HashMap};

use num_complex::Complex;
use rand::{Rng, RngCore};

use super::{check_qubits, Backend, Gate, QuantumState, StateError, MAX_DENSE_QUBITS};
use crate::scalar::Scalar;

const PRUNE: f64 = 1e-24;
const MAX_BLOCK_QUBITS: usize = 128;

/// Sparse amplitudes over a subset of qubits; local bit `j` is `qubits[j]`. Kept sorted by key.
#[derive(Clone, Debug)]
struct Block<T: Scalar> {
    qubits: Vec<usize>,
    amps: Vec<(u128, Complex<T>)>,
}

/// Pure state stored as a product of definite basis qubits and sparse entangled blocks.
///
/// Qubits in a computational basis state are tracked as plain bits. Gates and oracle calls
/// merge the blocks they touch; qubits that become definite again are split back out. This keeps
/// wide oracle registers cheap whenever the number of populated basis states stays small.
#[derive(Clone, Debug)]
pub struct FactoredState<T: Scalar> {
    width: usize,
    bits: Vec<bool>,
    owner: Vec<Option<usize>>,
    blocks: Vec<Option<Block<T>>>,
    max_support: usize,
}

fn zero<T: Scalar>() -> Complex<T> {
    Complex::new(T::zero(), T::zero())
}

impl<T: Scalar> FactoredState<T> {
    /// All qubits in `|0>`.
    pub fn new(width: usize) -> Self {
        Self {
            width,
            bits: vec![false; width],
            owner: vec![None; width],
            blocks: Vec::new(),
            max_support: 1 << 22,
        }
    }

    /// Caps the number of populated basis states in any one block.
    pub fn with_max_support(mut self, max_support: usize) -> Self {
        self.max_support = max_support;
        self
    }

    pub fn reset(&mut self) {
        *self = Self::new(self.width).with_max_support(self.max_support);
    }

    /// Value of `qubit` if it is in a definite basis state.
    pub fn definite(&self, qubit: usize) -> Option<bool> {
        self.owner[qubit].is_none().then(|| self.bits[qubit])
    }

    /// Number of qubits currently held in entangled blocks.
    pub fn live_qubits(&self) -> usize {
        self.owner.iter().filter(|o| o.is_some()).count()
    }

    /// Largest block support, a proxy for simulation cost.
    pub fn peak_support(&self) -> usize {
        self.blocks.iter().flatten().map(|b| b.amps.len()).max().unwrap_or(1)
    }

    fn block(&self, id: usize) -> &Block<T> {
        self.blocks[id].as_ref().expect("live block")
    }

    fn local(&self, id: usize, qubit: usize) -> usize {
        self.block(id).qubits.iter().position(|&q| q == qubit).expect("member qubit")
    }

    /// Ensures all `qubits` live in a single block and returns its id.
    fn merge(&mut self, qubits: &[usize]) -> Result<usize, StateError> {
        let mut ids: Vec<usize> = qubits.iter().filter_map(|&q| self.owner[q]).collect();
        ids.sort_unstable();
        ids.dedup();
        let free: Vec<usize> = qubits.iter().copied().filter(|&q| self.owner[q].is_none()).collect();
        if ids.len() == 1 && free.is_empty() {
            return Ok(ids[0]);
        }
        let mut members = Vec::new();
        let mut amps = vec![(0u128, Complex::new(T::one(), T::zero()))];
        for &id in &ids {
            let b = self.blocks[id].take().expect("live block");
            let shift = members.len();
            if amps.len().saturating_mul(b.amps.len()) > self.max_support {
                return Err(StateError::SupportTooLarge(self.max_support));
            }
            amps = amps
                .iter()
                .flat_map(|&(k1, a1)| b.amps.iter().map(move |&(k2, a2)| (k1 | (k2 << shift), a1 * a2)))
                .collect();
            members.extend(b.qubits);
        }
        for q in free {
            if self.bits[q] {
                let bit = 1u128 << members.len();
                amps.iter_mut().for_each(|(k, _)| *k |= bit);
            }
            members.push(q);
        }
        if members.len() > MAX_BLOCK_QUBITS {
            return Err(StateError::TooManyQubits(members.len()));
        }
        amps.sort_unstable_by_key(|(k, _)| *k);
        let id = self.blocks.len();
        for &q in &members {
            self.owner[q] = Some(id);
        }
        self.blocks.push(Some(Block { qubits: members, amps }));
        Ok(id)
    }

    /// Splits definite qubits out of block `id`.
    fn compact(&mut self, id: usize) {
        let b = self.blocks[id].as_ref().expect("live block");
        let len = b.qubits.len();
        let (mut all, mut any) = (u128::MAX, 0u128);
        for (k, _) in &b.amps {
            all &= k;
            any |= k;
        }
        let full = if len == 128 { u128::MAX } else { (1u128 << len) - 1 };
        let constant = !(all ^ any) & full;
        if constant == 0 {
            return;
        }
        let b = self.blocks[id].take().expect("live block");
        let keep: Vec<usize> = (0..len).filter(|j| constant >> j & 1 == 0).collect();
        for j in 0..len {
            if constant >> j & 1 == 1 {
                let q = b.qubits[j];
                self.owner[q] = None;
                self.bits[q] = all >> j & 1 == 1;
            }
        }
        if keep.is_empty() {
            return;
        }
        let qubits: Vec<usize> = keep.iter().map(|&j| b.qubits[j]).collect();
        let amps = b
            .amps
            .into_iter()
            .map(|(k, a)| {
                let nk = keep.iter().enumerate().fold(0u128, |acc, (i, &j)| acc | (((k >> j) & 1) << i));
                (nk, a)
            })
            .collect::<Vec<_>>();
        let mut amps = amps;
        amps.sort_unstable_by_key(|(k, _)| *k);
        self.blocks[id] = Some(Block { qubits, amps });
    }

    fn finish(&mut self, id: usize, out: HashMap<u128, Complex<T>>) -> Result<(), StateError> {
        if out.len() > self.max_support {
            return Err(StateError::SupportTooLarge(self.max_support));
        }
        let mut amps: Vec<(u128, Complex<T>)> =
            out.into_iter().filter(|(_, a)| a.norm_sqr().as_f64() > PRUNE).collect();
        amps.sort_unstable_by_key(|(k, _)| *k);
        self.blocks[id].as_mut().expect("live block").amps = amps;
        self.compact(id);
        Ok(())
    }

    /// Dense state of `qubits` when they are unentangled with every other qubit; `None` otherwise.
    /// Qubit `qubits[j]` becomes bit `j` of the dense index.
    pub fn subsystem(&self, qubits: &[usize]) -> Result<Option<QuantumState<T>>, StateError> {
        check_qubits(qubits, self.width)?;
        if qubits.len() > MAX_DENSE_QUBITS {
            return Err(StateError::TooManyQubits(qubits.len()));
        }
        let index_of: BTreeMap<usize, usize> = qubits.iter().enumerate().map(|(j, &q)| (q, j)).collect();
        let mut ids: Vec<usize> = qubits.iter().filter_map(|&q| self.owner[q]).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.iter().any(|&id| self.block(id).qubits.iter().any(|q| !index_of.contains_key(q))) {
            return Ok(None);
        }
        let base = qubits
            .iter()
            .enumerate()
            .filter(|(_, &q)| self.owner[q].is_none() && self.bits[q])
            .fold(0usize, |acc, (j, _)| acc | (1 << j));
        let mut terms = vec![(base, Complex::new(T::one(), T::zero()))];
        let index_of = &index_of;
        for id in ids {
            let b = self.block(id);
            terms = terms
                .iter()
                .flat_map(|&(i, a)| {
                    b.amps.iter().map(move |&(k, x)| {
                        let idx = b.qubits.iter().enumerate().fold(i, |acc, (j, q)| {
                            acc | ((((k >> j) & 1) as usize) << index_of[q])
                        });
                        (idx, a * x)
                    })
                })
                .collect();
        }
        let mut amps = vec![zero::<T>(); 1 << qubits.len()];
        for (i, a) in terms {
            amps[i] = a;
        }
        QuantumState::from_amplitudes(amps).map(Some)
    }

    /// Exact distribution of the register formed by `qubits` (bit `j` of a value is `qubits[j]`).
    pub fn distribution(&self, qubits: &[usize]) -> Result<BTreeMap<u64, T>, StateError> {
        check_qubits(qubits, self.width)?;
        let base = qubits
            .iter()
            .enumerate()
            .filter(|(_, &q)| self.owner[q].is_none() && self.bits[q])
            .fold(0u64, |acc, (j, _)| acc | (1 << j));
        let mut dist = BTreeMap::from([(base, T::one())]);
        let mut ids: Vec<usize> = qubits.iter().filter_map(|&q| self.owner[q]).collect();
        ids.sort_unstable();
        ids.dedup();
        for id in ids {
            let b = self.block(id);
            let picks: Vec<(usize, usize)> = qubits
                .iter()
                .enumerate()
                .filter_map(|(j, q)| b.qubits.iter().position(|x| x == q).map(|l| (l, j)))
                .collect();
            let mut local: BTreeMap<u64, T> = BTreeMap::new();
            for (k, a) in &b.amps {
                let v = picks.iter().fold(0u64, |acc, &(l, j)| acc | ((((k >> l) & 1) as u64) << j));
                let e = local.entry(v).or_insert(T::zero());
                *e = *e + a.norm_sqr();
            }
            let mut next = BTreeMap::new();
            for (v1, p1) in &dist {
                for (v2, p2) in &local {
                    let e = next.entry(v1 | v2).or_insert(T::zero());
                    *e = *e + *p1 * *p2;
                }
            }
            dist = next;
        }
        Ok(dist)
    }

    fn measure_one(&mut self, qubit: usize, rng: &mut dyn RngCore) -> bool {
        let Some(id) = self.owner[qubit] else {
            return self.bits[qubit];
        };
        let j = self.local(id, qubit);
        let b = self.blocks[id].as_mut().expect("live block");
        let (p0, total) = b.amps.iter().fold((0.0, 0.0), |(p0, t), (k, a)| {
            let w = a.norm_sqr().as_f64();
            (if k >> j & 1 == 0 { p0 + w } else { p0 }, t + w)
        });
        let u: f64 = rng.gen::<f64>() * total;
        let outcome = !(u < p0 && p0 > 0.0);
        b.amps.retain(|(k, _)| (k >> j & 1 == 1) == outcome);
        let kept: f64 = b.amps.iter().map(|(_, a)| a.norm_sqr().as_f64()).sum();
        let scale = T::lit(1.0 / kept.sqrt());
        b.amps.iter_mut().for_each(|(_, a)| *a = *a * scale);
        self.compact(id);
        outcome
    }
}

impl<T: Scalar> Backend for FactoredState<T> {
    type Real = T;

    fn num_qubits(&self) -> usize {
        self.width
    }

    fn apply_gate(&mut self, gate: &Gate<T>) -> Result<(), StateError> {
        let targets = gate.targets();
        check_qubits(&targets, self.width)?;
        let id = self.merge(&targets)?;
        let b = self.block(id);
        let mut out: HashMap<u128, Complex<T>> = HashMap::with_capacity(b.amps.len() * 2);
        match gate {
            Gate::Single { qubit, matrix } => {
                let m = 1u128 << self.local(id, *qubit);
                for &(k, a) in &b.amps {
                    let col = usize::from(k & m != 0);
                    for row in 0..2 {
                        let coef = matrix[row * 2 + col];
                        if coef.norm_sqr() > T::zero() {
                            let key = if row == 1 { k | m } else { k & !m };
                            let e = out.entry(key).or_insert_with(zero);
                            *e = *e + coef * a;
                        }
                    }
                }
            }
            Gate::Pair { first, second, matrix } => {
                let mf = 1u128 << self.local(id, *first);
                let ms = 1u128 << self.local(id, *second);
                for &(k, a) in &b.amps {
                    let col = 2 * usize::from(k & mf != 0) + usize::from(k & ms != 0);
                    for row in 0..4 {
                        let coef = matrix[row * 4 + col];
                        if coef.norm_sqr() > T::zero() {
                            let mut key = k & !(mf | ms);
                            if row & 2 != 0 {
                                key |= mf;
                            }
                            if row & 1 != 0 {
                                key |= ms;
                            }
                            let e = out.entry(key).or_insert_with(zero);
                            *e = *e + coef * a;
                        }
                    }
                }
            }
        }
        self.finish(id, out)
    }

    fn permute(&mut self, qubits: &[usize], map: &dyn Fn(u64) -> u64) -> Result<(), StateError> {
        check_qubits(qubits, self.width)?;
        let limit = 1u64.checked_shl(qubits.len() as u32).unwrap_or(0);
        let check = |w: u64| if limit != 0 && w >= limit { Err(StateError::NotPermutation) } else { Ok(w) };
        if qubits.iter().all(|&q| self.owner[q].is_none()) {
            let v = qubits.iter().enumerate().fold(0u64, |acc, (j, &q)| acc | (u64::from(self.bits[q]) << j));
            let w = check(map(v))?;
            for (j, &q) in qubits.iter().enumerate() {
                self.bits[q] = w >> j & 1 == 1;
            }
            return Ok(());
        }
        let id = self.merge(qubits)?;
        let locals: Vec<usize> = qubits.iter().map(|&q| self.local(id, q)).collect();
        let b = self.blocks[id].as_mut().expect("live block");
        let mut amps = Vec::with_capacity(b.amps.len());
        for &(k, a) in &b.amps {
            let v = locals.iter().enumerate().fold(0u64, |acc, (j, &l)| acc | ((((k >> l) & 1) as u64) << j));
            let w = check(map(v))?;
            let key = locals.iter().enumerate().fold(k, |acc, (j, &l)| {
                (acc & !(1u128 << l)) | ((((w >> j) & 1) as u128) << l)
            });
            amps.push((key, a));
        }
        amps.sort_unstable_by_key(|(k, _)| *k);
        if amps.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(StateError::NotPermutation);
        }
        b.amps = amps;
        self.compact(id);
        Ok(())
    }

    fn measure_qubits(&mut self, qubits: &[usize], rng: &mut dyn RngCore) -> Result<Vec<bool>, StateError> {
        check_qubits(qubits, self.width)?;
        Ok(qubits.iter().map(|&q| self.measure_one(q, rng)).collect())
    }

    fn prob_one(&self, qubit: usize) -> Result<T, StateError> {
        check_qubits(&[qubit], self.width)?;
        Ok(match self.owner[qubit] {
            None => {
                if self.bits[qubit] {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Some(id) => {
                let j = self.local(id, qubit);
                self.block(id)
                    .amps
                    .iter()
                    .filter(|(k, _)| k >> j & 1 == 1)
                    .fold(T::zero(), |acc, (_, a)| acc + a.norm_sqr())
            }
        })
    }
}
