use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{HfcError, Result};
use crate::layout::{Spin, SpinLayout};
use crate::pauli::{strip_z_chains, ExcitationLabel, Pauli, PauliString};

/// Where a pool string came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum PoolOrigin {
    Excitation { label: ExcitationLabel },
    /// Supplied directly rather than derived from an excitation.
    Qubit,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolEntry {
    pub string: PauliString,
    pub origin: PoolOrigin,
}

/// Candidate generators for ADAPT; each is used as `exp(-i theta/2 P)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorPool {
    n_qubits: usize,
    entries: Vec<PoolEntry>,
}

impl OperatorPool {
    /// Keeps the first occurrence of each string; rejects the identity.
    pub fn from_entries(n_qubits: usize, entries: Vec<PoolEntry>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for e in entries {
            if e.string.n_qubits() != n_qubits {
                return Err(HfcError::QubitMismatch {
                    expected: n_qubits,
                    found: e.string.n_qubits(),
                });
            }
            if e.string.is_identity() {
                return Err(HfcError::InvalidArgument("identity string in pool".into()));
            }
            if seen.insert(e.string) {
                out.push(e);
            }
        }
        Ok(OperatorPool {
            n_qubits,
            entries: out,
        })
    }

    pub fn from_strings(n_qubits: usize, strings: &[PauliString]) -> Result<Self> {
        OperatorPool::from_entries(
            n_qubits,
            strings
                .iter()
                .map(|&string| PoolEntry {
                    string,
                    origin: PoolOrigin::Qubit,
                })
                .collect(),
        )
    }

    /// Every string on at most `max_weight` qubits with an odd number of Y
    /// factors. These generate all real orthogonal rotations.
    pub fn real_qubit_pool(n_qubits: usize, max_weight: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 20 {
            return Err(HfcError::InvalidArgument(format!(
                "real qubit pool over {n_qubits} qubits is not supported"
            )));
        }
        let mut strings = Vec::new();
        let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let total = 4usize.pow(n_qubits as u32);
        for code in 1..total {
            let mut p = PauliString::identity(n_qubits);
            let mut c = code;
            for q in 0..n_qubits {
                p = p.with_factor(q, letters[c % 4])?;
                c /= 4;
            }
            if p.weight() <= max_weight && p.y_count() % 2 == 1 {
                strings.push(p);
            }
        }
        strings.sort_by_key(|p| (p.weight(), *p));
        OperatorPool::from_strings(n_qubits, &strings)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[PoolEntry] {
        &self.entries
    }

    pub fn string(&self, k: usize) -> PauliString {
        self.entries[k].string
    }

    pub fn contains(&self, p: &PauliString) -> bool {
        self.entries.iter().any(|e| e.string == *p)
    }
}

fn push_strings(entries: &mut Vec<PoolEntry>, label: ExcitationLabel, n: usize) -> Result<()> {
    for string in strip_z_chains(&label.generator(n)?) {
        entries.push(PoolEntry {
            string,
            origin: PoolOrigin::Excitation { label },
        });
    }
    Ok(())
}

/// Z-stripped strings of all spin-conserving singles and doubles on the blocked layout.
///
/// Singles pair two orbitals of one spin block. Doubles take any four qubits
/// meeting each block an even number of times, which is exactly when some
/// pairing of the four indices conserves both spin counts.
pub fn build_pool(layout: &SpinLayout) -> Result<OperatorPool> {
    let n = layout.n_qubits();
    let mut entries = Vec::new();
    for spin in Spin::BOTH {
        for v in 0..layout.n_act() {
            for w in v + 1..layout.n_act() {
                let label = ExcitationLabel::single(layout.qubit(spin, v), layout.qubit(spin, w))?;
                push_strings(&mut entries, label, n)?;
            }
        }
    }
    let alpha = layout.block_mask(Spin::Alpha);
    for i in 0..n {
        for j in i + 1..n {
            for a in j + 1..n {
                for b in a + 1..n {
                    let set: u64 = (1 << i) | (1 << j) | (1 << a) | (1 << b);
                    if (set & alpha).count_ones() % 2 != 0 {
                        continue;
                    }
                    push_strings(&mut entries, ExcitationLabel::double(i, j, a, b)?, n)?;
                }
            }
        }
    }
    OperatorPool::from_entries(n, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pool_sizes() {
        assert!(build_pool(&SpinLayout::new(1).unwrap()).unwrap().is_empty());
        let p = build_pool(&SpinLayout::new(3).unwrap()).unwrap();
        assert_eq!(p.len(), 84);
        for s in ["Y0 X2", "X0 Y2"] {
            assert!(p.contains(&PauliString::parse(6, s).unwrap()), "{s}");
        }
        for e in p.entries() {
            assert_eq!(e.string.z_mask() & !e.string.x_mask(), 0, "{}", e.string);
            assert_eq!(e.string.y_count() % 2, 1);
        }
    }

    #[test]
    fn real_pool_counts() {
        // 4 single-qubit Y plus 6 pairs times {XY, YX, ZY, YZ}
        let p = OperatorPool::real_qubit_pool(4, 2).unwrap();
        assert_eq!(p.len(), 28);
    }

    #[test]
    fn duplicates_are_merged() {
        let s = PauliString::parse(2, "X0 Y1").unwrap();
        let p = OperatorPool::from_strings(2, &[s, s]).unwrap();
        assert_eq!(p.len(), 1);
    }
}
