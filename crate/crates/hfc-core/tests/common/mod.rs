#![allow(dead_code)]

use hfc_core::pauli::{Pauli, PauliString, PauliSum};
use hfc_core::rng::stream;
use hfc_core::statevector::StateVector;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

/// Random 2-local Hamiltonian: every string of weight 1 or 2 with a
/// coefficient in [-1, 1]. With `real` set, strings with odd Y count are
/// dropped so the matrix is real symmetric.
pub fn random_two_local(n: usize, seed: u64, real: bool) -> PauliSum {
    let mut rng = stream(seed, 100);
    let mut h = PauliSum::zero(n);
    for code in 1..4usize.pow(n as u32) {
        let mut p = PauliString::identity(n);
        let mut c = code;
        for q in 0..n {
            p = p.with_factor(q, LETTERS[c % 4]).unwrap();
            c /= 4;
        }
        if p.weight() > 2 || (real && p.y_count() % 2 == 1) {
            continue;
        }
        h.add_term(p, Complex64::new(rng.random_range(-1.0..1.0), 0.0)).unwrap();
    }
    h
}

pub fn random_string(n: usize, rng: &mut impl Rng) -> PauliString {
    loop {
        let mut p = PauliString::identity(n);
        for q in 0..n {
            p = p.with_factor(q, LETTERS[rng.random_range(0..4)]).unwrap();
        }
        if !p.is_identity() {
            return p;
        }
    }
}

pub fn random_state(n: usize, seed: u64) -> StateVector {
    let mut rng = stream(seed, 101);
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut s = StateVector::from_amplitudes(n, amps).unwrap();
    s.normalize();
    s
}

/// Real integrals over `m` orbitals with the symmetries of `(pq|rs)`:
/// p<->q, r<->s and (pq)<->(rs).
pub fn random_integrals(m: usize, seed: u64) -> (DMatrix<f64>, Vec<f64>) {
    let mut rng = stream(seed, 102);
    let a = DMatrix::from_fn(m, m, |_, _| rng.random_range(-1.0..1.0));
    let h = (&a + a.transpose()) * 0.5;
    let raw: Vec<f64> = (0..m.pow(4)).map(|_| rng.random_range(-0.5..0.5)).collect();
    let at = |p: usize, q: usize, r: usize, s: usize| raw[((p * m + q) * m + r) * m + s];
    let mut g = vec![0.0; m.pow(4)];
    for p in 0..m {
        for q in 0..m {
            for r in 0..m {
                for s in 0..m {
                    g[((p * m + q) * m + r) * m + s] = (at(p, q, r, s)
                        + at(q, p, r, s)
                        + at(p, q, s, r)
                        + at(q, p, s, r)
                        + at(r, s, p, q)
                        + at(s, r, p, q)
                        + at(r, s, q, p)
                        + at(s, r, q, p))
                        / 8.0;
                }
            }
        }
    }
    (h, g)
}

pub fn random_antisymmetric(n: usize, seed: u64, scale: f64) -> DMatrix<f64> {
    let mut rng = stream(seed, 103);
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-scale..scale));
    &a - a.transpose()
}
