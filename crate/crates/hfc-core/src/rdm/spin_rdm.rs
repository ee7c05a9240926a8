use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{HfcError, Result};
use crate::layout::{Spin, SpinLayout};
use crate::statevector::StateVector;

/// Spin-resolved one-electron reduced density matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinRdm {
    n_act: usize,
    alpha: DMatrix<f64>,
    beta: DMatrix<f64>,
}

pub(crate) fn symmetrize(d: &DMatrix<f64>) -> DMatrix<f64> {
    (d + d.transpose()) * 0.5
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(HfcError::Dimension("matrix rows must form a square".into()));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub(crate) fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

/// Descending eigenvalues of a symmetric matrix.
pub fn sorted_eigenvalues(d: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(d)).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

impl SpinRdm {
    /// Builds an RDM from two square blocks, symmetrizing each.
    pub fn new(alpha: DMatrix<f64>, beta: DMatrix<f64>) -> Result<Self> {
        let n = alpha.nrows();
        if alpha.ncols() != n || beta.nrows() != n || beta.ncols() != n {
            return Err(HfcError::Dimension(format!(
                "alpha {}x{}, beta {}x{}",
                alpha.nrows(),
                alpha.ncols(),
                beta.nrows(),
                beta.ncols()
            )));
        }
        Ok(SpinRdm {
            n_act: n,
            alpha: symmetrize(&alpha),
            beta: symmetrize(&beta),
        })
    }

    pub fn zeros(n_act: usize) -> Self {
        SpinRdm {
            n_act,
            alpha: DMatrix::zeros(n_act, n_act),
            beta: DMatrix::zeros(n_act, n_act),
        }
    }

    pub fn n_act(&self) -> usize {
        self.n_act
    }

    pub fn block(&self, spin: Spin) -> &DMatrix<f64> {
        match spin {
            Spin::Alpha => &self.alpha,
            Spin::Beta => &self.beta,
        }
    }

    pub fn alpha(&self) -> &DMatrix<f64> {
        &self.alpha
    }

    pub fn beta(&self) -> &DMatrix<f64> {
        &self.beta
    }

    pub fn with_block(&self, spin: Spin, d: DMatrix<f64>) -> Result<SpinRdm> {
        match spin {
            Spin::Alpha => SpinRdm::new(d, self.beta.clone()),
            Spin::Beta => SpinRdm::new(self.alpha.clone(), d),
        }
    }

    pub fn trace(&self, spin: Spin) -> f64 {
        self.block(spin).trace()
    }

    /// Elementwise `self - other`.
    pub fn difference(&self, other: &SpinRdm) -> Result<SpinRdm> {
        if self.n_act != other.n_act {
            return Err(HfcError::Dimension(format!(
                "RDMs over {} and {} orbitals",
                self.n_act, other.n_act
            )));
        }
        Ok(SpinRdm {
            n_act: self.n_act,
            alpha: &self.alpha - &other.alpha,
            beta: &self.beta - &other.beta,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.alpha
            .iter()
            .chain(self.beta.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// Occupation numbers (descending eigenvalues) of each spin block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Occupations {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Occupations {
    pub fn block(&self, spin: Spin) -> &[f64] {
        match spin {
            Spin::Alpha => &self.alpha,
            Spin::Beta => &self.beta,
        }
    }
}

pub fn occupation_numbers(d: &SpinRdm) -> Occupations {
    Occupations {
        alpha: sorted_eigenvalues(&d.alpha),
        beta: sorted_eigenvalues(&d.beta),
    }
}

#[derive(Serialize, Deserialize)]
struct SpinRdmRepr {
    n_act: usize,
    alpha: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
}

impl Serialize for SpinRdm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpinRdmRepr {
            n_act: self.n_act,
            alpha: matrix_to_rows(&self.alpha),
            beta: matrix_to_rows(&self.beta),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpinRdm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = SpinRdmRepr::deserialize(d)?;
        let a = matrix_from_rows(&r.alpha).map_err(serde::de::Error::custom)?;
        let b = matrix_from_rows(&r.beta).map_err(serde::de::Error::custom)?;
        if a.nrows() != r.n_act {
            return Err(serde::de::Error::custom("n_act does not match matrix size"));
        }
        SpinRdm::new(a, b).map_err(serde::de::Error::custom)
    }
}

/// `<s| a†_v a_w |s>` for every pair in each spin block, evaluated directly on
/// the amplitudes with Jordan-Wigner signs. Only the real part is kept.
pub fn exact_rdm(s: &StateVector, layout: &SpinLayout) -> Result<SpinRdm> {
    if s.n_qubits() != layout.n_qubits() {
        return Err(HfcError::QubitMismatch {
            expected: layout.n_qubits(),
            found: s.n_qubits(),
        });
    }
    let n = layout.n_act();
    let amps = s.amplitudes();
    let mut blocks = [DMatrix::zeros(n, n), DMatrix::zeros(n, n)];
    for (k, spin) in Spin::BOTH.into_iter().enumerate() {
        for v in 0..n {
            for w in v..n {
                let qv = layout.qubit(spin, v);
                let qw = layout.qubit(spin, w);
                let mut acc = 0.0;
                for (b, a) in amps.iter().enumerate() {
                    let b = b as u64;
                    if b >> qw & 1 == 0 || a.norm_sqr() == 0.0 {
                        continue;
                    }
                    let mid = b ^ (1 << qw);
                    if qv != qw && mid >> qv & 1 == 1 {
                        continue;
                    }
                    let target = mid | (1 << qv);
                    let sign_w = (b & ((1 << qw) - 1)).count_ones();
                    let sign_v = (mid & ((1 << qv) - 1)).count_ones();
                    let sign = if (sign_w + sign_v) % 2 == 0 { 1.0 } else { -1.0 };
                    acc += sign * (amps[target as usize].conj() * a).re;
                }
                blocks[k][(v, w)] = acc;
                blocks[k][(w, v)] = acc;
            }
        }
    }
    let [alpha, beta] = blocks;
    SpinRdm::new(alpha, beta)
}
