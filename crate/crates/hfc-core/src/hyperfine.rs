//! Isotropic hyperfine coupling constants from spin RDMs and
//! amplitude-distribution matrices, with first-order error propagation.

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{HfcError, Result};
use crate::layout::Spin;
use crate::rdm::{matrix_from_rows, matrix_to_rows, SpinRdm};

/// MHz per unit of `g_K / M` times spin density in atomic units.
pub const HFC_CONSTANT_MHZ: f64 = 400.12;

/// Amplitude cutoff that reproduces the tabulated dominant-term approximations.
pub const DEFAULT_DOMINANT_THRESHOLD: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NucleusSpec {
    pub label: String,
    /// Nuclear g-factor.
    pub g: f64,
}

/// Spin-orbital amplitude products at one nucleus, indexed like the qubits of
/// each spin block.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeMatrices {
    alpha: DMatrix<f64>,
    beta: DMatrix<f64>,
}

fn check_symmetric(m: &DMatrix<f64>, what: &str) -> Result<()> {
    if !m.is_square() {
        return Err(HfcError::Dimension(format!("{what} amplitude matrix is not square")));
    }
    let dev = (m - m.transpose()).abs().max();
    if dev > 1e-9 {
        return Err(HfcError::InvalidArgument(format!(
            "{what} amplitude matrix is not symmetric (deviation {dev:.3e})"
        )));
    }
    Ok(())
}

impl AmplitudeMatrices {
    pub fn new(alpha: DMatrix<f64>, beta: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&alpha, "alpha")?;
        check_symmetric(&beta, "beta")?;
        if alpha.shape() != beta.shape() {
            return Err(HfcError::Dimension(format!(
                "alpha is {}x{}, beta is {}x{}",
                alpha.nrows(),
                alpha.ncols(),
                beta.nrows(),
                beta.ncols()
            )));
        }
        Ok(AmplitudeMatrices { alpha, beta })
    }

    pub fn from_rows(alpha: &[Vec<f64>], beta: &[Vec<f64>]) -> Result<Self> {
        AmplitudeMatrices::new(matrix_from_rows(alpha)?, matrix_from_rows(beta)?)
    }

    pub fn n_act(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn block(&self, spin: Spin) -> &DMatrix<f64> {
        match spin {
            Spin::Alpha => &self.alpha,
            Spin::Beta => &self.beta,
        }
    }

    fn check_rdm(&self, d: &SpinRdm) -> Result<()> {
        if d.n_act() != self.n_act() {
            return Err(HfcError::Dimension(format!(
                "RDM over {} orbitals, amplitude matrices over {}",
                d.n_act(),
                self.n_act()
            )));
        }
        Ok(())
    }

    /// `sum_vw (A_a[v,w] D_a[v,w] - A_b[v,w] D_b[v,w])`.
    pub fn spin_density(&self, d: &SpinRdm) -> Result<f64> {
        self.check_rdm(d)?;
        Ok(self.alpha.component_mul(d.alpha()).sum() - self.beta.component_mul(d.beta()).sum())
    }
}

#[derive(Serialize, Deserialize)]
struct AmplitudeRepr {
    alpha: Vec<Vec<f64>>,
    beta: Vec<Vec<f64>>,
}

impl Serialize for AmplitudeMatrices {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AmplitudeRepr {
            alpha: matrix_to_rows(&self.alpha),
            beta: matrix_to_rows(&self.beta),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AmplitudeMatrices {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = AmplitudeRepr::deserialize(d)?;
        AmplitudeMatrices::from_rows(&r.alpha, &r.beta).map_err(serde::de::Error::custom)
    }
}

/// `400.12 g / M` in MHz.
pub fn prefactor(g: f64, m: f64) -> Result<f64> {
    if !g.is_finite() || g == 0.0 {
        return Err(HfcError::InvalidArgument(format!("g-factor {g} must be finite and nonzero")));
    }
    if !m.is_finite() || m == 0.0 {
        return Err(HfcError::InvalidArgument(format!(
            "spin projection {m} must be finite and nonzero"
        )));
    }
    Ok(HFC_CONSTANT_MHZ * g / m)
}

/// Active-space contribution in MHz.
pub fn active_hfc(a: &AmplitudeMatrices, d: &SpinRdm, g: f64, m: f64) -> Result<f64> {
    Ok(prefactor(g, m)? * a.spin_density(d)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HfcResult {
    pub nucleus: String,
    pub active: f64,
    pub inactive: f64,
    pub total: f64,
}

pub fn total_hfc(nucleus: &str, active: f64, inactive: f64) -> HfcResult {
    HfcResult {
        nucleus: nucleus.to_string(),
        active,
        inactive,
        total: inactive + active,
    }
}

/// First-order HFC error for `ΔD = d_exact - d_est`.
pub fn hfc_error_exact(
    a: &AmplitudeMatrices,
    d_exact: &SpinRdm,
    d_est: &SpinRdm,
    g: f64,
    m: f64,
) -> Result<f64> {
    let delta = d_exact.difference(d_est)?;
    active_hfc(a, &delta, g, m)
}

/// Coefficient on one `ΔD_{vσ,wσ}` (`v <= w`), in MHz per unit RDM change.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominantTerm {
    pub spin: Spin,
    pub v: usize,
    pub w: usize,
    /// Signed amplitude coefficient: `±A[v,v]` or `±(A[v,w] + A[w,v])`.
    pub amplitude: f64,
    pub coefficient: f64,
}

/// Linear approximation of the HFC error over the largest amplitude entries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominantErrorForm {
    pub prefactor: f64,
    pub threshold: f64,
    pub terms: Vec<DominantTerm>,
}

impl DominantErrorForm {
    /// `sum_terms coefficient * ΔD[v,w]`, reading the upper triangle of `ΔD`.
    pub fn evaluate(&self, delta: &SpinRdm) -> f64 {
        let (a, b) = self.decompose(delta);
        a + b
    }

    /// Alpha-channel and beta-channel parts of [`DominantErrorForm::evaluate`].
    pub fn decompose(&self, delta: &SpinRdm) -> (f64, f64) {
        let mut out = [0.0, 0.0];
        for t in &self.terms {
            out[t.spin as usize] += t.coefficient * delta.block(t.spin)[(t.v, t.w)];
        }
        (out[0], out[1])
    }

    pub fn term(&self, spin: Spin, v: usize, w: usize) -> Option<&DominantTerm> {
        self.terms.iter().find(|t| t.spin == spin && t.v == v && t.w == w)
    }
}

/// Keeps the `ΔD` elements whose amplitude satisfies `|A[v,w]| >= threshold`.
pub fn hfc_error_dominant(
    a: &AmplitudeMatrices,
    g: f64,
    m: f64,
    threshold: f64,
) -> Result<DominantErrorForm> {
    if !(threshold > 0.0) {
        return Err(HfcError::InvalidArgument(format!("threshold {threshold} must be positive")));
    }
    let pf = prefactor(g, m)?;
    let n = a.n_act();
    let mut terms = Vec::new();
    for spin in Spin::BOTH {
        let sign = match spin {
            Spin::Alpha => 1.0,
            Spin::Beta => -1.0,
        };
        let blk = a.block(spin);
        for v in 0..n {
            for w in v..n {
                if blk[(v, w)].abs() < threshold {
                    continue;
                }
                let amp = if v == w { blk[(v, v)] } else { blk[(v, w)] + blk[(w, v)] };
                terms.push(DominantTerm {
                    spin,
                    v,
                    w,
                    amplitude: sign * amp,
                    coefficient: pf * sign * amp,
                });
            }
        }
    }
    Ok(DominantErrorForm {
        prefactor: pf,
        threshold,
        terms,
    })
}

/// `(alpha_error, beta_error)` in MHz.
pub fn decompose_spin_error(form: &DominantErrorForm, delta: &SpinRdm) -> (f64, f64) {
    form.decompose(delta)
}

/// Bound on `|dominant - exact|`: `|prefactor| * sum_{|A| < threshold} |A| * max|ΔD|`.
pub fn dominant_truncation_bound(a: &AmplitudeMatrices, form: &DominantErrorForm, delta: &SpinRdm) -> f64 {
    let max_delta = delta.max_abs();
    let dropped: f64 = Spin::BOTH
        .iter()
        .map(|&s| {
            a.block(s)
                .iter()
                .filter(|x| x.abs() < form.threshold)
                .map(|x| x.abs())
                .sum::<f64>()
        })
        .sum();
    form.prefactor.abs() * dropped * max_delta
}
