use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::confusion::{ConfusionMatrix, MAX_CONDITION};
use crate::error::{HfcError, Result};
use crate::layout::{Spin, SpinLayout};
use crate::rdm::{sorted_eigenvalues, symmetrize, SpinRdm};
use crate::statevector::CountsHistogram;

/// Real vector over basis states summing to one; entries may be negative.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiProbability(Vec<f64>);

impl QuasiProbability {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let s: f64 = values.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(HfcError::InvalidArgument(format!(
                "quasi-probabilities sum to {s}, not 1"
            )));
        }
        Ok(QuasiProbability(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn negative_mass(&self) -> f64 {
        self.0.iter().filter(|x| **x < 0.0).map(|x| -x).sum()
    }
}

fn check_distribution(m: &ConfusionMatrix, p: &[f64]) -> Result<()> {
    if p.len() != m.matrix().ncols() {
        return Err(HfcError::Dimension(format!(
            "distribution of length {} for a {}-state confusion matrix",
            p.len(),
            m.matrix().ncols()
        )));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(HfcError::InvalidArgument(format!(
            "raw distribution sums to {s}, not 1"
        )));
    }
    Ok(())
}

/// Solves `M x = p_raw` by LU with partial pivoting.
pub fn mitigate(m: &ConfusionMatrix, p_raw: &[f64]) -> Result<QuasiProbability> {
    check_distribution(m, p_raw)?;
    if !(m.condition() <= MAX_CONDITION) {
        return Err(HfcError::IllConditioned {
            condition: m.condition(),
        });
    }
    let x = m
        .matrix()
        .clone()
        .lu()
        .solve(&DVector::from_column_slice(p_raw))
        .ok_or(HfcError::IllConditioned {
            condition: f64::INFINITY,
        })?;
    renormalized(x)
}

/// Minimum-norm least-squares solution of `M x = p_raw` for matrices that
/// [`mitigate`] refuses.
pub fn mitigate_least_squares(m: &ConfusionMatrix, p_raw: &[f64]) -> Result<QuasiProbability> {
    check_distribution(m, p_raw)?;
    let svd = m.matrix().clone().svd(true, true);
    let x = svd
        .solve(&DVector::from_column_slice(p_raw), 1e-12)
        .map_err(|e| HfcError::InvalidArgument(e.to_string()))?;
    renormalized(x)
}

fn renormalized(x: DVector<f64>) -> Result<QuasiProbability> {
    // 1^T M = 1^T, so the solution already sums to one up to rounding
    let s = x.sum();
    QuasiProbability::new(x.iter().map(|v| v / s).collect())
}

/// Keeps bitstrings with exactly `n_alpha` and `n_beta` electrons in the two spin blocks.
pub fn post_select(
    counts: &CountsHistogram,
    n_alpha: u32,
    n_beta: u32,
    layout: &SpinLayout,
) -> Result<CountsHistogram> {
    if counts.n_qubits() != layout.n_qubits() {
        return Err(HfcError::QubitMismatch {
            expected: layout.n_qubits(),
            found: counts.n_qubits(),
        });
    }
    let kept = counts.retain(|b| layout.conserves(b, n_alpha, n_beta));
    if kept.total_shots() == 0 {
        return Err(HfcError::NothingRetained);
    }
    Ok(kept)
}

/// Zeroes non-conforming entries and rescales the remainder to unit sum.
pub fn post_select_quasi(
    q: &QuasiProbability,
    n_alpha: u32,
    n_beta: u32,
    layout: &SpinLayout,
) -> Result<QuasiProbability> {
    if q.0.len() != 1 << layout.n_qubits() {
        return Err(HfcError::Dimension(format!(
            "quasi-probability of length {} for {} qubits",
            q.0.len(),
            layout.n_qubits()
        )));
    }
    let mut out: Vec<f64> = q
        .0
        .iter()
        .enumerate()
        .map(|(b, &x)| if layout.conserves(b as u64, n_alpha, n_beta) { x } else { 0.0 })
        .collect();
    let mass: f64 = out.iter().sum();
    if !(mass > 0.0) {
        return Err(HfcError::NothingRetained);
    }
    for x in &mut out {
        *x /= mass;
    }
    QuasiProbability::new(out)
}

/// Rescales the eigenvalues of one spin block so they sum to `n_sigma`.
///
/// With `D = V L V^T` the result is `V (n_sigma / sum L) L V^T`, which is the
/// symmetrized block times the same constant. Returns the block and the constant.
pub fn purify_block(d: &DMatrix<f64>, n_sigma: f64) -> Result<(DMatrix<f64>, f64)> {
    let sym = symmetrize(d);
    let trace = sym.trace();
    if trace.abs() < 1e-6 {
        return Err(HfcError::DegenerateTrace { trace });
    }
    let c = n_sigma / trace;
    Ok((sym * c, c))
}

/// Purified RDM and the per-spin scaling constants.
#[derive(Clone, Debug, PartialEq)]
pub struct Purified {
    pub rdm: SpinRdm,
    pub scale_alpha: f64,
    pub scale_beta: f64,
}

pub fn purify_rdm(d: &SpinRdm, n_alpha: u32, n_beta: u32) -> Result<Purified> {
    let (a, sa) = purify_block(d.alpha(), n_alpha as f64)?;
    let (b, sb) = purify_block(d.beta(), n_beta as f64)?;
    Ok(Purified {
        rdm: SpinRdm::new(a, b)?,
        scale_alpha: sa,
        scale_beta: sb,
    })
}

/// Which side of `[-eps, 1 + eps]` an occupation number fell on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Lower,
    Upper,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub spin: Spin,
    /// Position in the descending occupation list.
    pub index: usize,
    pub eigenvalue: f64,
    pub bound: Bound,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Verdict {
    Accepted,
    Rejected { violations: Vec<Violation> },
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted)
    }
}

/// Default tolerance for [`filter_rdm`].
pub const DEFAULT_EPSILON: f64 = 0.05;

/// Rejects occupation sets with any value outside `[-eps, 1 + eps]`.
pub fn filter_occupations(alpha: &[f64], beta: &[f64], eps: f64) -> Verdict {
    let mut violations = Vec::new();
    for (spin, values) in [(Spin::Alpha, alpha), (Spin::Beta, beta)] {
        for (index, &eigenvalue) in values.iter().enumerate() {
            let bound = if eigenvalue < -eps {
                Bound::Lower
            } else if eigenvalue > 1.0 + eps {
                Bound::Upper
            } else {
                continue;
            };
            violations.push(Violation {
                spin,
                index,
                eigenvalue,
                bound,
            });
        }
    }
    if violations.is_empty() {
        Verdict::Accepted
    } else {
        Verdict::Rejected { violations }
    }
}

pub fn filter_rdm(d: &SpinRdm, eps: f64) -> Verdict {
    filter_occupations(&sorted_eigenvalues(d.alpha()), &sorted_eigenvalues(d.beta()), eps)
}

/// Per-spin electron count check on the diagonal of a post-selected RDM.
pub fn diagonal_sum(d: &SpinRdm, spin: Spin) -> f64 {
    d.block(spin).diagonal().sum()
}
