use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::string::PauliString;
use crate::error::{HfcError, Result};

/// Coefficients below this magnitude are dropped by [`PauliSum::prune`].
pub const ZERO_THRESHOLD: f64 = 1e-14;

/// Weighted sum of Pauli strings over one register.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        PauliSum {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_string(p: PauliString, coeff: Complex64) -> Self {
        let mut s = PauliSum::zero(p.n_qubits());
        s.terms.insert(p, coeff);
        s.prune();
        s
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PauliString, Complex64)>,
    {
        let mut s = PauliSum::zero(n_qubits);
        for (p, c) in terms {
            s.add_term(p, c)?;
        }
        s.prune();
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PauliString, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    /// Accumulates `c * p`. Call [`prune`](Self::prune) to drop cancelled terms.
    pub fn add_term(&mut self, p: PauliString, c: Complex64) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(HfcError::QubitMismatch {
                expected: self.n_qubits,
                found: p.n_qubits(),
            });
        }
        *self.terms.entry(p).or_default() += c;
        Ok(())
    }

    pub fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > ZERO_THRESHOLD);
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= factor;
        }
        out.prune();
        out
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        let mut out = self.clone();
        for (p, c) in &other.terms {
            out.add_term(*p, *c)?;
        }
        out.prune();
        Ok(out)
    }

    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.n_qubits != other.n_qubits {
            return Err(HfcError::QubitMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        let mut out = PauliSum::zero(self.n_qubits);
        for (p, a) in &self.terms {
            for (q, b) in &other.terms {
                let (ph, r) = p.multiply(q)?;
                *out.terms.entry(r).or_default() += ph.to_complex() * a * b;
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(p, c)| (*p, c.conj())).collect(),
        }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    /// `self * other - other * self`.
    pub fn commutator(&self, other: &PauliSum) -> Result<PauliSum> {
        let ab = self.mul(other)?;
        let ba = other.mul(self)?;
        ab.add(&ba.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Parses the text format: one term per line as `coeff factors`.
    ///
    /// Coefficients are real numbers or `(re,im)` pairs; blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse(n_qubits: usize, text: &str) -> Result<PauliSum> {
        let mut s = PauliSum::zero(n_qubits);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (coeff_text, factors) = split_coefficient(line)
                .ok_or_else(|| HfcError::Parse(format!("line {}: '{line}'", lineno + 1)))?;
            let c = parse_coefficient(coeff_text)
                .ok_or_else(|| HfcError::Parse(format!("line {}: bad coefficient", lineno + 1)))?;
            let p = PauliString::parse(n_qubits, factors)?;
            s.add_term(p, c)?;
        }
        s.prune();
        Ok(s)
    }
}

fn split_coefficient(line: &str) -> Option<(&str, &str)> {
    if line.starts_with('(') {
        let close = line.find(')')?;
        Some((&line[..=close], line[close + 1..].trim()))
    } else {
        let mut it = line.splitn(2, char::is_whitespace);
        let c = it.next()?;
        Some((c, it.next().unwrap_or("I").trim()))
    }
}

fn parse_coefficient(text: &str) -> Option<Complex64> {
    if let Some(inner) = text.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        let (re, im) = inner.split_once(',')?;
        Some(Complex64::new(re.trim().parse().ok()?, im.trim().parse().ok()?))
    } else {
        Some(Complex64::new(text.parse().ok()?, 0.0))
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (p, c) in &self.terms {
            if c.im == 0.0 {
                writeln!(f, "{:e} {}", c.re, p)?;
            } else {
                writeln!(f, "({:e},{:e}) {}", c.re, c.im, p)?;
            }
        }
        Ok(())
    }
}
