//! Jordan-Wigner images of fermionic operators.
//!
//! Spin orbital `p` sits on qubit `p`, occupied means `|1>`, and
//! `a_p = Z_0 ... Z_{p-1} (X_p + i Y_p) / 2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::string::{Pauli, PauliString};
use super::sum::PauliSum;
use crate::error::{HfcError, Result};

fn z_chain(n: usize, from: usize, to_exclusive: usize) -> u64 {
    let mut m = 0u64;
    for q in from..to_exclusive {
        m |= 1 << q;
    }
    debug_assert!(to_exclusive <= n);
    m
}

fn string_with_chain(n: usize, chain: u64, letters: &[(usize, Pauli)]) -> Result<PauliString> {
    let mut p = PauliString::new(n, 0, chain)?;
    for &(q, f) in letters {
        p = p.with_factor(q, f)?;
    }
    Ok(p)
}

/// Generator `a†_a a_i - h.c.` written as `(i/2) Z(i+1..a-1) (Y_i X_a - X_i Y_a)`.
pub fn jw_single(i: usize, a: usize, n: usize) -> Result<PauliSum> {
    if !(i < a && a < n) {
        return Err(HfcError::IndexOrder(format!(
            "single excitation needs 0 <= i < a < n, got i={i}, a={a}, n={n}"
        )));
    }
    let chain = z_chain(n, i + 1, a);
    let half_i = Complex64::new(0.0, 0.5);
    let mut s = PauliSum::zero(n);
    s.add_term(
        string_with_chain(n, chain, &[(i, Pauli::Y), (a, Pauli::X)])?,
        half_i,
    )?;
    s.add_term(
        string_with_chain(n, chain, &[(i, Pauli::X), (a, Pauli::Y)])?,
        -half_i,
    )?;
    Ok(s)
}

/// Letter patterns on `(i, j, a, b)` and their signs in the double generator.
const DOUBLE_PATTERNS: [([Pauli; 4], f64); 8] = {
    use Pauli::{X, Y};
    [
        ([X, X, Y, X], 1.0),
        ([Y, X, Y, Y], 1.0),
        ([X, Y, Y, Y], 1.0),
        ([X, X, X, Y], 1.0),
        ([Y, X, X, X], -1.0),
        ([X, Y, X, X], -1.0),
        ([Y, Y, Y, X], -1.0),
        ([Y, Y, X, Y], -1.0),
    ]
};

/// Generator `a†_b a†_a a_j a_i - h.c.` as the eight-term sum with prefactor `i/8`.
pub fn jw_double(i: usize, j: usize, a: usize, b: usize, n: usize) -> Result<PauliSum> {
    if !(i < j && j < a && a < b && b < n) {
        return Err(HfcError::IndexOrder(format!(
            "double excitation needs 0 <= i < j < a < b < n, got ({i},{j},{a},{b}), n={n}"
        )));
    }
    let chain = z_chain(n, i + 1, j) | z_chain(n, a + 1, b);
    let mut s = PauliSum::zero(n);
    for (letters, sign) in DOUBLE_PATTERNS {
        let p = string_with_chain(
            n,
            chain,
            &[
                (i, letters[0]),
                (j, letters[1]),
                (a, letters[2]),
                (b, letters[3]),
            ],
        )?;
        s.add_term(p, Complex64::new(0.0, sign / 8.0))?;
    }
    Ok(s)
}

/// Distinct strings of `s` with every `Z` factor removed, in term order.
pub fn strip_z_chains(s: &PauliSum) -> Vec<PauliString> {
    let mut out: Vec<PauliString> = Vec::new();
    for (p, _) in s.iter() {
        let stripped = p.strip_z();
        if !out.contains(&stripped) {
            out.push(stripped);
        }
    }
    out
}

/// Spin-orbital indices of a single or double excitation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExcitationLabel {
    Single { i: usize, a: usize },
    Double { i: usize, j: usize, a: usize, b: usize },
}

impl ExcitationLabel {
    pub fn single(i: usize, a: usize) -> Result<Self> {
        if i >= a {
            return Err(HfcError::IndexOrder(format!("single ({i},{a})")));
        }
        Ok(ExcitationLabel::Single { i, a })
    }

    pub fn double(i: usize, j: usize, a: usize, b: usize) -> Result<Self> {
        if !(i < j && j < a && a < b) {
            return Err(HfcError::IndexOrder(format!("double ({i},{j},{a},{b})")));
        }
        Ok(ExcitationLabel::Double { i, j, a, b })
    }

    pub fn generator(&self, n: usize) -> Result<PauliSum> {
        match *self {
            ExcitationLabel::Single { i, a } => jw_single(i, a, n),
            ExcitationLabel::Double { i, j, a, b } => jw_double(i, j, a, b, n),
        }
    }
}

/// Jordan-Wigner image of `a_p` (or `a†_p` when `dagger`).
pub fn ladder(p: usize, dagger: bool, n: usize) -> Result<PauliSum> {
    if p >= n {
        return Err(HfcError::QubitOutOfRange {
            qubit: p,
            n_qubits: n,
        });
    }
    let chain = z_chain(n, 0, p);
    let x = string_with_chain(n, chain, &[(p, Pauli::X)])?;
    let y = string_with_chain(n, chain, &[(p, Pauli::Y)])?;
    let y_sign = if dagger { -0.5 } else { 0.5 };
    PauliSum::from_terms(
        n,
        [
            (x, Complex64::new(0.5, 0.0)),
            (y, Complex64::new(0.0, y_sign)),
        ],
    )
}

/// Product of ladder operators, leftmost first: `[(p, true), (q, false)]` is `a†_p a_q`.
pub fn fermion_product(ops: &[(usize, bool)], n: usize) -> Result<PauliSum> {
    let mut acc = PauliSum::from_string(PauliString::identity(n), Complex64::new(1.0, 0.0));
    for &(p, dagger) in ops {
        acc = acc.mul(&ladder(p, dagger, n)?)?;
    }
    Ok(acc)
}
