use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{HfcError, Result};

/// Device noise parameters applied by the trajectory emulator.
///
/// Depolarizing errors follow every noisy gate: `p_dep2` after rotations on two
/// or more qubits, `p_dep1` after single-qubit rotations, preparation `X` gates
/// and on each qubit touched by a measurement basis change. Twirl frames are
/// noiseless. `over_rot` is added to the executed angle of every rotation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Probability that a prepared 0 reads as 1.
    pub p_read_01: f64,
    /// Probability that a prepared 1 reads as 0.
    pub p_read_10: f64,
    pub p_dep1: f64,
    pub p_dep2: f64,
    /// Radians.
    pub over_rot: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel::ideal()
    }
}

/// Names accepted by [`NoiseModel::preset`].
pub const PRESETS: [&str; 3] = ["ideal", "torino-like", "hardware-regime"];

impl NoiseModel {
    pub fn ideal() -> Self {
        NoiseModel {
            p_read_01: 0.0,
            p_read_10: 0.0,
            p_dep1: 0.0,
            p_dep2: 0.0,
            over_rot: 0.0,
        }
    }

    pub fn torino_like() -> Self {
        NoiseModel {
            p_read_01: 0.02,
            p_read_10: 0.02,
            p_dep1: 0.0004,
            p_dep2: 0.004,
            over_rot: 0.01,
        }
    }

    /// Heavier profile whose raw OH trace errors give purification constants near
/// 1.08 (alpha) and 0.866 (beta), as seen on hardware runs.
    pub fn hardware_regime() -> Self {
        NoiseModel {
            p_read_01: 0.07,
            p_read_10: 0.07,
            p_dep1: 0.005,
            p_dep2: 0.05,
            over_rot: 0.02,
        }
    }

    pub fn readout_only(p01: f64, p10: f64) -> Self {
        NoiseModel {
            p_read_01: p01,
            p_read_10: p10,
            ..NoiseModel::ideal()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "ideal" | "none" => Ok(NoiseModel::ideal()),
            "torino-like" => Ok(NoiseModel::torino_like()),
            "hardware-regime" => Ok(NoiseModel::hardware_regime()),
            other => Err(HfcError::InvalidNoise(format!(
                "unknown preset '{other}' (known: {})",
                PRESETS.join(", ")
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_read_01", self.p_read_01),
            ("p_read_10", self.p_read_10),
            ("p_dep1", self.p_dep1),
            ("p_dep2", self.p_dep2),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(HfcError::InvalidNoise(format!("{name} = {p} is not a probability")));
            }
        }
        if !self.over_rot.is_finite() {
            return Err(HfcError::InvalidNoise("over_rot must be finite".into()));
        }
        Ok(())
    }

    pub fn has_readout(&self) -> bool {
        self.p_read_01 > 0.0 || self.p_read_10 > 0.0
    }

    pub fn has_gate_errors(&self) -> bool {
        self.p_dep1 > 0.0 || self.p_dep2 > 0.0
    }

    pub fn is_ideal(&self) -> bool {
        !self.has_readout() && !self.has_gate_errors() && self.over_rot == 0.0
    }

    /// First 16 hex digits of SHA-256 over the JSON form.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(self).expect("noise model serializes");
        hex::encode(&Sha256::digest(text.as_bytes())[..8])
    }
}

/// Pauli twirling settings: each job is split into `instances` randomized copies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwirlConfig {
    pub enabled: bool,
    pub seed: u64,
    #[serde(default = "default_instances")]
    pub instances: usize,
}

fn default_instances() -> usize {
    16
}

impl TwirlConfig {
    pub fn disabled() -> Self {
        TwirlConfig {
            enabled: false,
            seed: 0,
            instances: default_instances(),
        }
    }

    pub fn enabled(seed: u64) -> Self {
        TwirlConfig {
            enabled: true,
            seed,
            instances: default_instances(),
        }
    }
}
