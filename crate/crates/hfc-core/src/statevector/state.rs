use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{HfcError, Result};
use crate::pauli::{Pauli, PauliString, PauliSum};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 28;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Dense state vector. Bit `i` of an amplitude index is the occupation of qubit `i`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

/// Ket label of a basis index with qubit 0 leftmost.
pub fn bitstring(index: u64, n_qubits: usize) -> String {
    (0..n_qubits)
        .map(|q| if index >> q & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Inverse of [`bitstring`].
pub fn parse_bitstring(text: &str) -> Result<u64> {
    let text = text.trim().trim_start_matches('|').trim_end_matches('>');
    if text.is_empty() || text.len() > 64 {
        return Err(HfcError::Parse(format!("bad bitstring '{text}'")));
    }
    let mut index = 0u64;
    for (q, c) in text.chars().enumerate() {
        match c {
            '0' => {}
            '1' => index |= 1 << q,
            _ => return Err(HfcError::Parse(format!("bad bitstring '{text}'"))),
        }
    }
    Ok(index)
}

fn check_register(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_QUBITS {
        return Err(HfcError::TooManyQubits(n_qubits));
    }
    Ok(())
}

impl StateVector {
    pub fn zero_state(n_qubits: usize) -> Result<Self> {
        Self::basis_state(n_qubits, 0)
    }

    pub fn basis_state(n_qubits: usize, index: u64) -> Result<Self> {
        check_register(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index as usize >= dim {
            return Err(HfcError::Dimension(format!(
                "basis index {index} outside a {n_qubits}-qubit register"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Wraps raw amplitudes without normalizing them.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_register(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(HfcError::Dimension(format!(
                "{} amplitudes for {n_qubits} qubits",
                amps.len()
            )));
        }
        Ok(StateVector { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: u64) -> Complex64 {
        self.amps[index as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            for a in &mut self.amps {
                *a /= n;
            }
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_qubits(other.n_qubits)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    fn check_qubits(&self, n: usize) -> Result<()> {
        if n != self.n_qubits {
            return Err(HfcError::QubitMismatch {
                expected: self.n_qubits,
                found: n,
            });
        }
        Ok(())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(HfcError::QubitOutOfRange {
                qubit: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    pub fn apply_x(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        for b in 0..self.amps.len() {
            if b & bit == 0 {
                self.amps.swap(b, b | bit);
            }
        }
        Ok(())
    }

    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        for b in 0..self.amps.len() {
            if b & bit == 0 {
                let (a0, a1) = (self.amps[b], self.amps[b | bit]);
                self.amps[b] = (a0 + a1) * FRAC_1_SQRT_2;
                self.amps[b | bit] = (a0 - a1) * FRAC_1_SQRT_2;
            }
        }
        Ok(())
    }

    /// Phase gate `S† = diag(1, -i)`.
    pub fn apply_sdg(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let bit = 1usize << q;
        let minus_i = Complex64::new(0.0, -1.0);
        for (b, a) in self.amps.iter_mut().enumerate() {
            if b & bit != 0 {
                *a *= minus_i;
            }
        }
        Ok(())
    }

    /// Maps the eigenbasis of `p` onto the computational basis: `H` for each
    /// `X` factor, `H S†` for each `Y` factor, nothing for `Z`.
    pub fn apply_basis_change(&mut self, p: &PauliString) -> Result<()> {
        self.check_qubits(p.n_qubits())?;
        for q in p.support_qubits() {
            match p.factor(q) {
                Pauli::X => self.apply_h(q)?,
                Pauli::Y => {
                    self.apply_sdg(q)?;
                    self.apply_h(q)?;
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Multiplies the state by the Pauli operator `p`.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.check_qubits(p.n_qubits())?;
        let x = p.x_mask() as usize;
        if x == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                *a *= p.act_on_basis(b as u64).0;
            }
            return Ok(());
        }
        let low = x & x.wrapping_neg();
        for b in 0..self.amps.len() {
            if b & low == 0 {
                let b2 = b ^ x;
                let (ph_b, _) = p.act_on_basis(b as u64);
                let (ph_b2, _) = p.act_on_basis(b2 as u64);
                let (a, a2) = (self.amps[b], self.amps[b2]);
                self.amps[b2] = ph_b * a;
                self.amps[b] = ph_b2 * a2;
            }
        }
        Ok(())
    }

    /// In place `exp(-i theta/2 P)`.
    pub fn apply_rotation(&mut self, p: &PauliString, theta: f64) -> Result<()> {
        self.check_qubits(p.n_qubits())?;
        if theta == 0.0 {
            return Ok(());
        }
        let (s, c) = (theta / 2.0).sin_cos();
        let mis = Complex64::new(0.0, -s);
        let x = p.x_mask() as usize;
        if x == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                let ph = p.act_on_basis(b as u64).0;
                *a *= c + mis * ph;
            }
            return Ok(());
        }
        let low = x & x.wrapping_neg();
        for b in 0..self.amps.len() {
            if b & low == 0 {
                let b2 = b ^ x;
                let (ph_b, _) = p.act_on_basis(b as u64);
                let (ph_b2, _) = p.act_on_basis(b2 as u64);
                let (a, a2) = (self.amps[b], self.amps[b2]);
                self.amps[b] = a * c + mis * ph_b2 * a2;
                self.amps[b2] = a2 * c + mis * ph_b * a;
            }
        }
        Ok(())
    }

    /// `<self| P |self>`.
    pub fn expectation_string(&self, p: &PauliString) -> Result<Complex64> {
        self.check_qubits(p.n_qubits())?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            let (ph, b2) = p.act_on_basis(b as u64);
            acc += self.amps[b2 as usize].conj() * ph * a;
        }
        Ok(acc)
    }

    /// `<self| O |self>`.
    pub fn expectation(&self, o: &PauliSum) -> Result<Complex64> {
        self.check_qubits(o.n_qubits())?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, c) in o.iter() {
            acc += c * self.expectation_string(p)?;
        }
        Ok(acc)
    }

    /// `O |self>` as a new (unnormalized) vector.
    pub fn apply_sum(&self, o: &PauliSum) -> Result<StateVector> {
        self.check_qubits(o.n_qubits())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (p, c) in o.iter() {
            for (b, a) in self.amps.iter().enumerate() {
                let (ph, b2) = p.act_on_basis(b as u64);
                out[b2 as usize] += c * ph * a;
            }
        }
        Ok(StateVector {
            n_qubits: self.n_qubits,
            amps: out,
        })
    }

    /// One `bitstring real imag` line per amplitude with modulus above 1e-15.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (b, a) in self.amps.iter().enumerate() {
            if a.norm() > 1e-15 {
                let _ = writeln!(
                    out,
                    "{} {:.12e} {:.12e}",
                    bitstring(b as u64, self.n_qubits),
                    a.re,
                    a.im
                );
            }
        }
        out
    }

    /// Reads the [`dump`](Self::dump) format; missing bitstrings are zero.
    pub fn parse_dump(text: &str) -> Result<StateVector> {
        let mut entries = Vec::new();
        let mut n = None;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(HfcError::Parse(format!("bad state line '{line}'")));
            }
            let width = parts[0].len();
            if *n.get_or_insert(width) != width {
                return Err(HfcError::Parse("inconsistent bitstring widths".into()));
            }
            let re: f64 = parts[1]
                .parse()
                .map_err(|_| HfcError::Parse(format!("bad real part in '{line}'")))?;
            let im: f64 = parts[2]
                .parse()
                .map_err(|_| HfcError::Parse(format!("bad imaginary part in '{line}'")))?;
            entries.push((parse_bitstring(parts[0])?, Complex64::new(re, im)));
        }
        let n = n.ok_or_else(|| HfcError::Parse("empty state dump".into()))?;
        check_register(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        for (b, a) in entries {
            amps[b as usize] = a;
        }
        Ok(StateVector { n_qubits: n, amps })
    }
}

/// Functional form of [`StateVector::apply_rotation`].
pub fn apply_pauli_rotation(s: &StateVector, p: &PauliString, theta: f64) -> Result<StateVector> {
    let mut out = s.clone();
    out.apply_rotation(p, theta)?;
    Ok(out)
}
