use serde::{Deserialize, Serialize};

use crate::error::{HfcError, Result};
use crate::hyperfine::{active_hfc, hfc_error_dominant, prefactor, AmplitudeMatrices, DEFAULT_DOMINANT_THRESHOLD};
use crate::layout::{Spin, SpinLayout};
use crate::rdm::{exact_rdm, SpinRdm};
use crate::statevector::{build_ansatz, parse_bitstring, CircuitSpec, StateVector};

/// Amplitude tolerance of the load-time self-check.
pub const AMPLITUDE_TOLERANCE: f64 = 1e-4;
/// Relative tolerance on tabulated dominant coefficients.
pub const COEFFICIENT_TOLERANCE: f64 = 0.005;
/// Relative tolerance on tabulated rounded prefactors.
pub const PREFACTOR_TOLERANCE: f64 = 0.001;

/// Names accepted by [`MoleculeDataset::load`].
pub const MOLECULES: [&str; 3] = ["oh", "no", "oh+"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceAmplitude {
    /// Qubit 0 leftmost.
    pub bitstring: String,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TabulatedTerm {
    pub spin: Spin,
    pub v: usize,
    pub w: usize,
    pub coefficient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NucleusData {
    pub label: String,
    pub g: f64,
    pub a_alpha: Vec<Vec<f64>>,
    pub a_beta: Vec<Vec<f64>>,
    /// Total HFC of the reference calculation, MHz.
    pub reference_total: f64,
    /// Reference total minus the exact active contribution, MHz.
    pub inactive_offset: f64,
    /// Tabulated shot-noise standard deviation, MHz.
    pub shot_noise_std: f64,
    pub rounded_prefactor: f64,
    pub dominant_terms: Vec<TabulatedTerm>,
}

impl NucleusData {
    pub fn amplitudes(&self) -> Result<AmplitudeMatrices> {
        AmplitudeMatrices::from_rows(&self.a_alpha, &self.a_beta)
    }
}

/// One shipped molecule: ansatz, parameters, nuclei and reference values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoleculeDataset {
    pub name: String,
    pub display_name: String,
    pub version: u32,
    pub n_act: usize,
    pub n_alpha: u32,
    pub n_beta: u32,
    /// Spin projection `M` of the state.
    pub spin_projection: f64,
    pub shots_per_string: u64,
    pub shot_budget: u64,
    /// Hartree.
    pub reference_energy: f64,
    pub circuit: CircuitSpec,
    pub reference_amplitudes: Vec<ReferenceAmplitude>,
    pub nuclei: Vec<NucleusData>,
}

fn embedded(name: &str) -> Option<&'static str> {
    match name.to_ascii_lowercase().as_str() {
        "oh" => Some(include_str!("../../data/oh.json")),
        "no" => Some(include_str!("../../data/no.json")),
        "oh+" | "ohp" => Some(include_str!("../../data/ohp.json")),
        _ => None,
    }
}

impl MoleculeDataset {
    /// Loads a shipped dataset and runs [`MoleculeDataset::self_check`].
    pub fn load(name: &str) -> Result<Self> {
        let text = embedded(name).ok_or_else(|| HfcError::UnknownMolecule(name.to_string()))?;
        MoleculeDataset::from_json(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let ds: MoleculeDataset = serde_json::from_str(text)?;
        ds.self_check()?;
        Ok(ds)
    }

    pub fn layout(&self) -> SpinLayout {
        SpinLayout::new(self.n_act).expect("checked on load")
    }

    pub fn state(&self) -> Result<StateVector> {
        build_ansatz(&self.circuit, &self.circuit.params)
    }

    pub fn exact_rdm(&self) -> Result<SpinRdm> {
        exact_rdm(&self.state()?, &self.layout())
    }

    pub fn nucleus(&self, label: &str) -> Result<&NucleusData> {
        self.nuclei
            .iter()
            .find(|n| n.label.eq_ignore_ascii_case(label))
            .ok_or_else(|| HfcError::UnknownNucleus {
                molecule: self.name.clone(),
                nucleus: label.to_string(),
            })
    }

    /// Active HFC of `d` at nucleus `n`, MHz.
    pub fn active_hfc(&self, n: &NucleusData, d: &SpinRdm) -> Result<f64> {
        active_hfc(&n.amplitudes()?, d, n.g, self.spin_projection)
    }

    fn fail(&self, reason: String) -> HfcError {
        HfcError::SelfCheck {
            molecule: self.name.clone(),
            reason,
        }
    }

    /// Rebuilds the ansatz and checks it against the stored amplitudes, and
    /// checks the amplitude matrices against the tabulated error coefficients.
    pub fn self_check(&self) -> Result<()> {
        let layout = SpinLayout::new(self.n_act).map_err(|e| self.fail(e.to_string()))?;
        if self.circuit.n_qubits != layout.n_qubits() {
            return Err(self.fail(format!(
                "circuit has {} qubits for {} active orbitals",
                self.circuit.n_qubits, self.n_act
            )));
        }
        if self.circuit.params.len() != self.circuit.n_params() {
            return Err(self.fail(format!(
                "{} parameters stored for {} in the circuit",
                self.circuit.params.len(),
                self.circuit.n_params()
            )));
        }
        if !layout.conserves(self.circuit.hf_index(), self.n_alpha, self.n_beta) {
            return Err(self.fail("reference determinant has the wrong electron counts".into()));
        }
        let s = self.state().map_err(|e| self.fail(e.to_string()))?;
        for r in &self.reference_amplitudes {
            let b = parse_bitstring(&r.bitstring).map_err(|e| self.fail(e.to_string()))?;
            let got = s.amplitude(b);
            let dev = (got.re - r.amplitude).abs().max(got.im.abs());
            if dev > AMPLITUDE_TOLERANCE {
                return Err(self.fail(format!(
                    "amplitude of |{}> is {:.6}, stored {:.6}",
                    r.bitstring, got.re, r.amplitude
                )));
            }
        }
        for n in &self.nuclei {
            let a = n.amplitudes().map_err(|e| self.fail(e.to_string()))?;
            if a.n_act() != self.n_act {
                return Err(self.fail(format!("{} amplitude matrices are not {}-square", n.label, self.n_act)));
            }
            let pf = prefactor(n.g, self.spin_projection).map_err(|e| self.fail(e.to_string()))?;
            if ((pf - n.rounded_prefactor) / n.rounded_prefactor).abs() > PREFACTOR_TOLERANCE {
                return Err(self.fail(format!(
                    "{} prefactor {pf:.2} differs from {}",
                    n.label, n.rounded_prefactor
                )));
            }
            let form = hfc_error_dominant(&a, n.g, self.spin_projection, DEFAULT_DOMINANT_THRESHOLD)
                .map_err(|e| self.fail(e.to_string()))?;
            if form.terms.len() != n.dominant_terms.len() {
                return Err(self.fail(format!(
                    "{}: {} dominant terms, {} tabulated",
                    n.label,
                    form.terms.len(),
                    n.dominant_terms.len()
                )));
            }
            for t in &n.dominant_terms {
                let got = form
                    .term(t.spin, t.v, t.w)
                    .ok_or_else(|| self.fail(format!("{}: no term on ({}, {}, {})", n.label, t.v, t.w, t.spin)))?;
                if ((got.amplitude - t.coefficient) / t.coefficient).abs() > COEFFICIENT_TOLERANCE {
                    return Err(self.fail(format!(
                        "{}: coefficient on ({}, {}, {}) is {:.4}, tabulated {}",
                        n.label, t.v, t.w, t.spin, got.amplitude, t.coefficient
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Frozen inactive-space contribution for a shipped molecule and nucleus, MHz.
pub fn inactive_offset(molecule: &str, nucleus: &str) -> Result<f64> {
    let ds = MoleculeDataset::load(molecule)?;
    Ok(ds.nucleus(nucleus)?.inactive_offset)
}
