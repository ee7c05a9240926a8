use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HfcError, Result};
use crate::noise::{execute_with_twirl, noisy_distribution, pauli_twirl, NoiseModel, TwirlConfig};
use crate::rdm::{matrix_from_rows, matrix_to_rows};
use crate::rng::derive_seed;
use crate::statevector::{Circuit, CircuitSpec};

/// Condition numbers above this make [`mitigate`] refuse to solve.
pub const MAX_CONDITION: f64 = 1e12;

/// Branch-probability cutoff used by exact calibration.
pub const EXACT_PRUNE: f64 = 1e-10;

/// How calibration columns are obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CalibrationShots {
    /// Sampled with this many shots per prepared basis state.
    Shots(u64),
    /// Expected distributions, computed without sampling.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationMeta {
    pub spec_hash: String,
    pub noise_hash: String,
    /// `None` for exact calibration.
    pub shots: Option<u64>,
    pub seed: u64,
    pub twirled: bool,
}

/// Column-stochastic calibration matrix: column `b` is the measured
/// distribution when basis state `b` is prepared and `U(0)` is applied.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfusionMatrix {
    n_qubits: usize,
    m: DMatrix<f64>,
    condition: f64,
    meta: CalibrationMeta,
}

#[derive(Serialize, Deserialize)]
struct ConfusionRepr {
    n_qubits: usize,
    matrix: Vec<Vec<f64>>,
    metadata: CalibrationMeta,
}

impl Serialize for ConfusionMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ConfusionRepr {
            n_qubits: self.n_qubits,
            matrix: matrix_to_rows(&self.m),
            metadata: self.meta.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ConfusionMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ConfusionRepr::deserialize(d)?;
        let m = matrix_from_rows(&r.matrix).map_err(serde::de::Error::custom)?;
        ConfusionMatrix::from_matrix(r.n_qubits, m, r.metadata).map_err(serde::de::Error::custom)
    }
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub(crate) fn short_hash(text: &str) -> String {
    hex::encode(&Sha256::digest(text.as_bytes())[..8])
}

impl ConfusionMatrix {
    pub fn from_matrix(n_qubits: usize, m: DMatrix<f64>, meta: CalibrationMeta) -> Result<Self> {
        let dim = 1usize << n_qubits;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(HfcError::Dimension(format!(
                "confusion matrix is {}x{}, expected {dim}x{dim}",
                m.nrows(),
                m.ncols()
            )));
        }
        for (j, col) in m.column_iter().enumerate() {
            if (col.sum() - 1.0).abs() > 1e-9 || col.iter().any(|&x| x < 0.0) {
                return Err(HfcError::InvalidArgument(format!(
                    "column {j} is not a probability vector"
                )));
            }
        }
        let condition = condition_number(&m);
        Ok(ConfusionMatrix {
            n_qubits,
            m,
            condition,
            meta,
        })
    }

    pub fn identity(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        ConfusionMatrix {
            n_qubits,
            m: DMatrix::identity(dim, dim),
            condition: 1.0,
            meta: CalibrationMeta {
                spec_hash: String::new(),
                noise_hash: NoiseModel::ideal().digest(),
                shots: None,
                seed: 0,
                twirled: false,
            },
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn meta(&self) -> &CalibrationMeta {
        &self.meta
    }

    /// `M p`.
    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.m.ncols() {
            return Err(HfcError::Dimension(format!(
                "vector of length {} for a {}-state confusion matrix",
                p.len(),
                self.m.ncols()
            )));
        }
        Ok((&self.m * DVector::from_column_slice(p)).iter().copied().collect())
    }
}

fn calibration_circuit(spec: &CircuitSpec, rotations: &Circuit, b: u64) -> Result<Circuit> {
    let mut c = Circuit::new(spec.n_qubits);
    for q in 0..spec.n_qubits {
        if b >> q & 1 == 1 {
            c.push_x(q)?;
        }
    }
    c.then(rotations)
}

/// Calibrates `M_U0` without twirling.
pub fn build_confusion_matrix(
    spec: &CircuitSpec,
    nm: &NoiseModel,
    shots: CalibrationShots,
    seed: u64,
) -> Result<ConfusionMatrix> {
    build_confusion_matrix_with(spec, nm, shots, seed, &TwirlConfig::disabled())
}

/// Calibrates `M_U0`: every basis state is prepared with X gates, followed by
/// the zero-parameter rotation circuit, and executed under `nm`.
pub fn build_confusion_matrix_with(
    spec: &CircuitSpec,
    nm: &NoiseModel,
    shots: CalibrationShots,
    seed: u64,
    twirl: &TwirlConfig,
) -> Result<ConfusionMatrix> {
    nm.validate()?;
    let n = spec.n_qubits;
    let dim = 1usize << n;
    let rotations = spec.rotation_circuit()?;
    let zeros = vec![0.0; rotations.n_params()];
    let columns: Vec<Vec<f64>> = (0..dim as u64)
        .into_par_iter()
        .map(|b| -> Result<Vec<f64>> {
            let c = calibration_circuit(spec, &rotations, b)?;
            let job = derive_seed(seed, b);
            match shots {
                CalibrationShots::Shots(k) => {
                    let h = execute_with_twirl(&c, &zeros, nm, k, job, twirl)?;
                    Ok(h.probabilities())
                }
                CalibrationShots::Exact => {
                    if !twirl.enabled || c.rotation_count() == 0 {
                        return Ok(noisy_distribution(&c, &zeros, nm, EXACT_PRUNE)?.probabilities);
                    }
                    let mut acc = vec![0.0; dim];
                    for i in 0..twirl.instances.max(1) as u64 {
                        let tc = pauli_twirl(&c, derive_seed(twirl.seed, derive_seed(job, i)))?;
                        let p = noisy_distribution(&tc, &zeros, nm, EXACT_PRUNE)?.probabilities;
                        for (a, x) in acc.iter_mut().zip(p) {
                            *a += x;
                        }
                    }
                    let k = twirl.instances.max(1) as f64;
                    Ok(acc.into_iter().map(|a| a / k).collect())
                }
            }
        })
        .collect::<Result<_>>()?;
    let mut m = DMatrix::zeros(dim, dim);
    for (j, col) in columns.iter().enumerate() {
        let s: f64 = col.iter().sum();
        for (i, &x) in col.iter().enumerate() {
            m[(i, j)] = x.max(0.0) / s;
        }
    }
    let meta = CalibrationMeta {
        spec_hash: short_hash(&serde_json::to_string(spec)?),
        noise_hash: nm.digest(),
        shots: match shots {
            CalibrationShots::Shots(k) => Some(k),
            CalibrationShots::Exact => None,
        },
        seed,
        twirled: twirl.enabled,
    };
    ConfusionMatrix::from_matrix(n, m, meta)
}
