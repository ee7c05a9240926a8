use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{HfcError, Result};
use crate::layout::{Spin, SpinLayout};
use crate::pauli::{fermion_product, PauliString, PauliSum};

/// One- and two-electron integrals over `n` spin orbitals.
///
/// Index convention: `g[p,q,r,s]` couples the charge distribution `p q` of
/// electron 1 with `r s` of electron 2, so that
/// `H = sum h_pq a†_p a_q + 1/2 sum g_pqrs a†_p a†_r a_s a_q + core`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegralTensors {
    n: usize,
    h: Vec<f64>,
    /// Row-major over `(p, q, r, s)`.
    g: Vec<f64>,
}

impl IntegralTensors {
    pub fn new(h: &DMatrix<f64>, g: Vec<f64>) -> Result<Self> {
        let n = h.nrows();
        if h.ncols() != n || g.len() != n.pow(4) {
            return Err(HfcError::Dimension(format!(
                "h is {}x{} and g has {} entries",
                h.nrows(),
                h.ncols(),
                g.len()
            )));
        }
        let dev = (h - h.transpose()).abs().max();
        if dev > 1e-10 {
            return Err(HfcError::InvalidArgument(format!(
                "one-electron integrals are not symmetric (deviation {dev:.3e})"
            )));
        }
        Ok(IntegralTensors {
            n,
            h: (0..n * n).map(|k| h[(k / n, k % n)]).collect(),
            g,
        })
    }

    /// Spin-orbital integrals on the blocked layout from spatial ones; spin is
    /// conserved within each electron's charge distribution.
    pub fn from_spatial(h: &DMatrix<f64>, g: &[f64], layout: &SpinLayout) -> Result<Self> {
        let m = layout.n_act();
        if h.nrows() != m || h.ncols() != m || g.len() != m.pow(4) {
            return Err(HfcError::Dimension(format!(
                "spatial integrals do not match {m} active orbitals"
            )));
        }
        let n = layout.n_qubits();
        let mut hs = DMatrix::zeros(n, n);
        let mut gs = vec![0.0; n.pow(4)];
        for s1 in Spin::BOTH {
            for p in 0..m {
                for q in 0..m {
                    hs[(layout.qubit(s1, p), layout.qubit(s1, q))] = h[(p, q)];
                    for s2 in Spin::BOTH {
                        for r in 0..m {
                            for s in 0..m {
                                let idx = [
                                    layout.qubit(s1, p),
                                    layout.qubit(s1, q),
                                    layout.qubit(s2, r),
                                    layout.qubit(s2, s),
                                ];
                                gs[((idx[0] * n + idx[1]) * n + idx[2]) * n + idx[3]] =
                                    g[((p * m + q) * m + r) * m + s];
                            }
                        }
                    }
                }
            }
        }
        IntegralTensors::new(&hs, gs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self, p: usize, q: usize) -> f64 {
        self.h[p * self.n + q]
    }

    pub fn g(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.g[((p * self.n + q) * self.n + r) * self.n + s]
    }

    pub fn h_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.h)
    }

    pub fn g_slice(&self) -> &[f64] {
        &self.g
    }

    /// Largest entrywise difference to `other`.
    pub fn max_difference(&self, other: &IntegralTensors) -> f64 {
        self.h
            .iter()
            .zip(&other.h)
            .chain(self.g.iter().zip(&other.g))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Jordan-Wigner image of the fermionic Hamiltonian.
    pub fn hamiltonian(&self, core: f64) -> Result<PauliSum> {
        let n = self.n;
        let mut out = PauliSum::zero(n);
        out.add_term(PauliString::identity(n), Complex64::new(core, 0.0))?;
        for p in 0..n {
            for q in 0..n {
                let c = self.h(p, q);
                if c != 0.0 {
                    out = out.add(&fermion_product(&[(p, true), (q, false)], n)?.scale(c.into()))?;
                }
            }
        }
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let c = self.g(p, q, r, s);
                        if c == 0.0 || p == r || q == s {
                            continue;
                        }
                        let term = fermion_product(&[(p, true), (r, true), (s, false), (q, false)], n)?;
                        out = out.add(&term.scale((0.5 * c).into()))?;
                    }
                }
            }
        }
        out.prune();
        Ok(out)
    }
}

/// `N_sigma = sum_v a†_v a_v` over one spin block.
pub fn number_operator(layout: &SpinLayout, spin: Spin) -> Result<PauliSum> {
    let n = layout.n_qubits();
    let mut out = PauliSum::zero(n);
    for v in 0..layout.n_act() {
        let q = layout.qubit(spin, v);
        out = out.add(&fermion_product(&[(q, true), (q, false)], n)?)?;
    }
    Ok(out)
}

/// `exp(kappa)` for an antisymmetric `kappa`.
pub fn rotation_matrix(kappa: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !kappa.is_square() {
        return Err(HfcError::Dimension("kappa must be square".into()));
    }
    let deviation = (kappa + kappa.transpose()).abs().max();
    if deviation > 1e-12 {
        return Err(HfcError::NotAntisymmetric { deviation });
    }
    Ok(kappa.clone().exp())
}

/// Rotates the orbitals by `U = exp(kappa)`: `h' = U h U^T` and every index of
/// `g` is contracted with `U` in the same way.
pub fn rotate_integrals(t: &IntegralTensors, kappa: &DMatrix<f64>) -> Result<IntegralTensors> {
    let n = t.n;
    if kappa.nrows() != n {
        return Err(HfcError::Dimension(format!(
            "kappa is {}x{} for {n} spin orbitals",
            kappa.nrows(),
            kappa.ncols()
        )));
    }
    let u = rotation_matrix(kappa)?;
    let h = &u * t.h_matrix() * u.transpose();
    // one index at a time: g'[..a..] = sum_b U[a,b] g[..b..]
    let mut g = t.g.clone();
    let stride = [n * n * n, n * n, n, 1];
    for &st in &stride {
        let mut next = vec![0.0; g.len()];
        for (idx, out) in next.iter_mut().enumerate() {
            let a = (idx / st) % n;
            let base = idx - a * st;
            let mut acc = 0.0;
            for b in 0..n {
                acc += u[(a, b)] * g[base + b * st];
            }
            *out = acc;
        }
        g = next;
    }
    IntegralTensors::new(&h, g)
}

/// Spin-orbital generator on the blocked layout from singlet and triplet
/// rotation amplitudes `(p, q, kappa)` with `p > q` over spatial orbitals.
///
/// The singlet part rotates both spins by `kappa`; the triplet part by
/// `+kappa/sqrt 2` for alpha and `-kappa/sqrt 2` for beta.
pub fn spin_adapted_kappa(
    layout: &SpinLayout,
    singlet: &[(usize, usize, f64)],
    triplet: &[(usize, usize, f64)],
) -> Result<DMatrix<f64>> {
    let n = layout.n_qubits();
    let mut k = DMatrix::zeros(n, n);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for (terms, coef) in [(singlet, [1.0, 1.0]), (triplet, [r, -r])] {
        for &(p, q, value) in terms {
            if p <= q || p >= layout.n_act() {
                return Err(HfcError::IndexOrder(format!(
                    "rotation ({p}, {q}) needs {} > p > q",
                    layout.n_act()
                )));
            }
            for (spin, c) in Spin::BOTH.into_iter().zip(coef) {
                let (a, b) = (layout.qubit(spin, p), layout.qubit(spin, q));
                k[(a, b)] += c * value;
                k[(b, a)] -= c * value;
            }
        }
    }
    Ok(k)
}
