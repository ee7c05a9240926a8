use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{HfcError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Alpha,
    Beta,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Alpha, Spin::Beta];

    pub fn symbol(self) -> char {
        match self {
            Spin::Alpha => 'a',
            Spin::Beta => 'b',
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Alpha => "alpha",
            Spin::Beta => "beta",
        })
    }
}

/// Blocked spin-orbital layout: alpha orbitals on qubits `0..n_act`,
/// beta orbitals on `n_act..2 n_act`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinLayout {
    n_act: usize,
}

impl SpinLayout {
    pub fn new(n_act: usize) -> Result<Self> {
        if n_act == 0 || 2 * n_act > 64 {
            return Err(HfcError::InvalidArgument(format!(
                "active space of {n_act} orbitals is not supported"
            )));
        }
        Ok(SpinLayout { n_act })
    }

    pub fn n_act(&self) -> usize {
        self.n_act
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_act
    }

    pub fn qubit(&self, spin: Spin, orbital: usize) -> usize {
        debug_assert!(orbital < self.n_act);
        match spin {
            Spin::Alpha => orbital,
            Spin::Beta => self.n_act + orbital,
        }
    }

    pub fn block_mask(&self, spin: Spin) -> u64 {
        let low = (1u64 << self.n_act) - 1;
        match spin {
            Spin::Alpha => low,
            Spin::Beta => low << self.n_act,
        }
    }

    /// Number of electrons of `spin` in basis state `b`.
    pub fn count(&self, b: u64, spin: Spin) -> u32 {
        (b & self.block_mask(spin)).count_ones()
    }

    pub fn conserves(&self, b: u64, n_alpha: u32, n_beta: u32) -> bool {
        self.count(b, Spin::Alpha) == n_alpha && self.count(b, Spin::Beta) == n_beta
    }
}
