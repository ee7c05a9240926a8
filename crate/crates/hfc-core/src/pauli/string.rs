use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HfcError, Result};

/// Single-qubit Pauli factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Power of `i`: the value is `i^k` for `k` in `0..4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Phase(u8);

impl Phase {
    pub const ONE: Phase = Phase(0);
    pub const I: Phase = Phase(1);
    pub const MINUS_ONE: Phase = Phase(2);
    pub const MINUS_I: Phase = Phase(3);

    pub fn from_exponent(k: u32) -> Phase {
        Phase((k % 4) as u8)
    }

    pub fn exponent(self) -> u32 {
        self.0 as u32
    }

    pub fn to_complex(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;
    fn mul(self, rhs: Phase) -> Phase {
        Phase((self.0 + rhs.0) % 4)
    }
}

/// Hermitian Pauli string in symplectic form.
///
/// The operator is `i^{popcount(x & z)} X^x Z^z`, so a qubit with both bits
/// set carries a `Y` factor and the string never has a stray phase.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "PauliStringRepr", into = "PauliStringRepr")]
pub struct PauliString {
    n_qubits: usize,
    x: u64,
    z: u64,
}

#[derive(Serialize, Deserialize)]
struct PauliStringRepr {
    n_qubits: usize,
    factors: String,
}

impl TryFrom<PauliStringRepr> for PauliString {
    type Error = HfcError;
    fn try_from(r: PauliStringRepr) -> Result<Self> {
        PauliString::parse(r.n_qubits, &r.factors)
    }
}

impl From<PauliString> for PauliStringRepr {
    fn from(p: PauliString) -> Self {
        PauliStringRepr {
            n_qubits: p.n_qubits,
            factors: p.to_string(),
        }
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

impl PauliString {
    pub fn new(n_qubits: usize, x_mask: u64, z_mask: u64) -> Result<Self> {
        if n_qubits > 64 {
            return Err(HfcError::TooManyQubits(n_qubits));
        }
        let outside = (x_mask | z_mask) & !full_mask(n_qubits);
        if outside != 0 {
            return Err(HfcError::QubitOutOfRange {
                qubit: 63 - outside.leading_zeros() as usize,
                n_qubits,
            });
        }
        Ok(PauliString {
            n_qubits,
            x: x_mask,
            z: z_mask,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        PauliString {
            n_qubits,
            x: 0,
            z: 0,
        }
    }

    pub fn from_factors(n_qubits: usize, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut p = PauliString::new(n_qubits, 0, 0)?;
        for &(q, f) in factors {
            p = p.with_factor(q, f)?;
        }
        Ok(p)
    }

    /// Replaces the factor on qubit `q`.
    pub fn with_factor(mut self, q: usize, f: Pauli) -> Result<Self> {
        if q >= self.n_qubits {
            return Err(HfcError::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            });
        }
        let (xb, zb) = f.bits();
        let bit = 1u64 << q;
        self.x = (self.x & !bit) | if xb { bit } else { 0 };
        self.z = (self.z & !bit) | if zb { bit } else { 0 };
        Ok(self)
    }

    /// Parses factors such as `"X0 Y3 Z5"` or `"Y0X2"`; `"I"` is the identity.
    pub fn parse(n_qubits: usize, text: &str) -> Result<Self> {
        let mut p = PauliString::new(n_qubits, 0, 0)?;
        let trimmed = text.trim();
        if trimmed.is_empty() || trimmed == "I" {
            return Ok(p);
        }
        let mut chars = trimmed.chars().filter(|c| !c.is_whitespace()).peekable();
        while let Some(c) = chars.next() {
            let f = match c {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => {
                    return Err(HfcError::Parse(format!(
                        "unexpected character '{other}' in Pauli string '{text}'"
                    )))
                }
            };
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            if digits.is_empty() {
                return Err(HfcError::Parse(format!(
                    "factor '{c}' lacks a qubit index in '{text}'"
                )));
            }
            let q: usize = digits
                .parse()
                .map_err(|_| HfcError::Parse(format!("bad qubit index '{digits}'")))?;
            if p.factor(q.min(63)) != Pauli::I && q < n_qubits {
                return Err(HfcError::Parse(format!(
                    "qubit {q} appears twice in '{text}'"
                )));
            }
            p = p.with_factor(q, f)?;
        }
        Ok(p)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn support(&self) -> u64 {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support().count_ones() as usize
    }

    pub fn is_identity(&self) -> bool {
        self.support() == 0
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    pub fn factor(&self, q: usize) -> Pauli {
        if q >= 64 {
            return Pauli::I;
        }
        Pauli::from_bits(self.x >> q & 1 == 1, self.z >> q & 1 == 1)
    }

    /// Qubits carrying a non-identity factor, ascending.
    pub fn support_qubits(&self) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|&q| self.support() >> q & 1 == 1)
            .collect()
    }

    /// Full (not qubit-wise) commutation via the symplectic form.
    pub fn commutes(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Product `self * other = phase * r`.
    pub fn multiply(&self, other: &PauliString) -> Result<(Phase, PauliString)> {
        self.check_size(other)?;
        let rx = self.x ^ other.x;
        let rz = self.z ^ other.z;
        let y_r = (rx & rz).count_ones();
        let k = self.y_count() + other.y_count() + 4 - (y_r % 4) + 2 * (self.z & other.x).count_ones();
        Ok((
            Phase::from_exponent(k),
            PauliString {
                n_qubits: self.n_qubits,
                x: rx,
                z: rz,
            },
        ))
    }

    /// Drops every `Z` factor, keeping `X` and `Y` factors in place.
    pub fn strip_z(&self) -> PauliString {
        PauliString {
            n_qubits: self.n_qubits,
            x: self.x,
            z: self.z & self.x,
        }
    }

    /// Action on a computational basis state: `P|b> = phase |b'>`.
    #[inline]
    pub fn act_on_basis(&self, b: u64) -> (Complex64, u64) {
        let k = self.y_count() + 2 * (b & self.z).count_ones();
        (Phase::from_exponent(k).to_complex(), b ^ self.x)
    }

    pub(crate) fn check_size(&self, other: &PauliString) -> Result<()> {
        if self.n_qubits != other.n_qubits {
            return Err(HfcError::QubitMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(())
    }

    /// Same factors on a register of `n_qubits` qubits.
    pub fn resized(&self, n_qubits: usize) -> Result<PauliString> {
        PauliString::new(n_qubits, self.x, self.z)
    }
}

/// True iff on every qubit the factors agree or one of them is the identity.
pub fn qubitwise_commutes(p: &PauliString, q: &PauliString) -> Result<bool> {
    p.check_size(q)?;
    let both = p.support() & q.support();
    Ok((p.x ^ q.x) & both == 0 && (p.z ^ q.z) & both == 0)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_identity() {
            return write!(f, "I");
        }
        let mut first = true;
        for q in self.support_qubits() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{}{}", self.factor(q).letter(), q)?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString[{}]({})", self.n_qubits, self)
    }
}

/// Parses with the register size inferred from the highest index.
impl FromStr for PauliString {
    type Err = HfcError;
    fn from_str(s: &str) -> Result<Self> {
        let probe = PauliString::parse(64, s)?;
        let n = 64 - probe.support().leading_zeros() as usize;
        PauliString::new(n.max(1), probe.x, probe.z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn x_times_z_is_minus_i_y() {
        let x = PauliString::parse(1, "X0").unwrap();
        let z = PauliString::parse(1, "Z0").unwrap();
        let (ph, r) = x.multiply(&z).unwrap();
        assert_eq!(ph, Phase::MINUS_I);
        assert_eq!(r, PauliString::parse(1, "Y0").unwrap());
    }

    #[test]
    fn square_is_identity() {
        let p = PauliString::parse(4, "X0 Y1 Z3").unwrap();
        let (ph, r) = p.multiply(&p).unwrap();
        assert_eq!(ph, Phase::ONE);
        assert!(r.is_identity());
    }

    #[test]
    fn parse_and_print_round_trip() {
        for text in ["X0 Y3 Z5", "I", "Y0 X2", "Z1"] {
            let p = PauliString::parse(6, text).unwrap();
            assert_eq!(p.to_string(), text);
        }
        assert_eq!(
            PauliString::parse(6, "Y0X2").unwrap(),
            PauliString::parse(6, "Y0 X2").unwrap()
        );
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(PauliString::parse(4, "X4").is_err());
        assert!(PauliString::parse(4, "Q0").is_err());
        assert!(PauliString::parse(4, "X").is_err());
        assert!(PauliString::parse(4, "X0 Y0").is_err());
    }

    #[test]
    fn masks_cannot_exceed_register() {
        assert!(PauliString::new(3, 0b1000, 0).is_err());
        assert!(PauliString::new(65, 0, 0).is_err());
    }

    #[test]
    fn qubitwise_examples() {
        let a = PauliString::parse(3, "Z0 Z1").unwrap();
        let b = PauliString::parse(3, "Z1 Z2").unwrap();
        assert!(qubitwise_commutes(&a, &b).unwrap());
        let x = PauliString::parse(3, "X0").unwrap();
        let z = PauliString::parse(3, "Z0").unwrap();
        assert!(!qubitwise_commutes(&x, &z).unwrap());
        assert!(qubitwise_commutes(&x, &PauliString::parse(2, "X0").unwrap()).is_err());
    }

    #[test]
    fn all_z_strings_qubitwise_commute() {
        let n = 4;
        for a in 0..16u64 {
            for b in 0..16u64 {
                let p = PauliString::new(n, 0, a).unwrap();
                let q = PauliString::new(n, 0, b).unwrap();
                assert!(qubitwise_commutes(&p, &q).unwrap());
            }
        }
    }

    #[test]
    fn strip_keeps_xy_factors() {
        let p = PauliString::parse(6, "Y0 Z1 Z2 X3").unwrap();
        assert_eq!(p.strip_z().to_string(), "Y0 X3");
    }

    #[test]
    fn serde_uses_text_factors() {
        let p = PauliString::parse(4, "X0 Y2").unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"n_qubits":4,"factors":"X0 Y2"}"#);
        let back: PauliString = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
    }
}
