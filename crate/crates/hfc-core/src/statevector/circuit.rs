use serde::{Deserialize, Serialize};

use super::state::StateVector;
use crate::error::{HfcError, Result};
use crate::pauli::PauliString;

/// One circuit instruction.
#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    /// Bit flip used for state preparation.
    X(usize),
    /// `exp(-i (scale * theta[param]) / 2 * P)`.
    Rotation {
        pauli: PauliString,
        param: usize,
        scale: f64,
    },
    /// Pauli frame inserted by twirling; treated as noiseless.
    Frame(PauliString),
    /// Measurement basis rotation onto the eigenbasis of the string.
    BasisChange(PauliString),
}

/// Ordered list of instructions on a fixed register.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    n_params: usize,
    ops: Vec<Op>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            n_params: 0,
            ops: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_params(&self) -> usize {
        self.n_params
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn rotation_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|op| matches!(op, Op::Rotation { .. }))
            .count()
    }

    fn check_string(&self, p: &PauliString) -> Result<()> {
        if p.n_qubits() != self.n_qubits {
            return Err(HfcError::QubitMismatch {
                expected: self.n_qubits,
                found: p.n_qubits(),
            });
        }
        Ok(())
    }

    pub fn push(&mut self, op: Op) -> Result<()> {
        match &op {
            Op::X(q) => {
                if *q >= self.n_qubits {
                    return Err(HfcError::QubitOutOfRange {
                        qubit: *q,
                        n_qubits: self.n_qubits,
                    });
                }
            }
            Op::Rotation { pauli, param, .. } => {
                self.check_string(pauli)?;
                self.n_params = self.n_params.max(param + 1);
            }
            Op::Frame(p) | Op::BasisChange(p) => self.check_string(p)?,
        }
        self.ops.push(op);
        Ok(())
    }

    pub fn push_x(&mut self, q: usize) -> Result<()> {
        self.push(Op::X(q))
    }

    pub fn push_rotation(&mut self, pauli: PauliString, param: usize) -> Result<()> {
        self.push(Op::Rotation {
            pauli,
            param,
            scale: 1.0,
        })
    }

    /// Copy of the circuit followed by `other`; parameter indices are shared.
    pub fn then(&self, other: &Circuit) -> Result<Circuit> {
        let mut out = self.clone();
        for op in &other.ops {
            out.push(op.clone())?;
        }
        Ok(out)
    }

    pub(crate) fn from_parts(n_qubits: usize, n_params: usize, ops: Vec<Op>) -> Circuit {
        Circuit {
            n_qubits,
            n_params,
            ops,
        }
    }

    pub fn check_params(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.n_params {
            return Err(HfcError::ParamCount {
                expected: self.n_params,
                found: theta.len(),
            });
        }
        Ok(())
    }

    /// Applies the circuit to `state` in place.
    pub fn apply(&self, state: &mut StateVector, theta: &[f64]) -> Result<()> {
        self.check_params(theta)?;
        for op in &self.ops {
            apply_op(state, op, theta)?;
        }
        Ok(())
    }

    /// Runs the circuit on `|0...0>`.
    pub fn run(&self, theta: &[f64]) -> Result<StateVector> {
        let mut s = StateVector::zero_state(self.n_qubits)?;
        self.apply(&mut s, theta)?;
        Ok(s)
    }
}

pub(crate) fn apply_op(state: &mut StateVector, op: &Op, theta: &[f64]) -> Result<()> {
    match op {
        Op::X(q) => state.apply_x(*q),
        Op::Rotation {
            pauli,
            param,
            scale,
        } => state.apply_rotation(pauli, scale * theta[*param]),
        Op::Frame(p) => state.apply_pauli(p),
        Op::BasisChange(p) => state.apply_basis_change(p),
    }
}

fn default_scale() -> f64 {
    1.0
}

fn is_unit(x: &f64) -> bool {
    *x == 1.0
}

/// One rotation of a serialized ansatz.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    pub pauli: String,
    pub param: usize,
    /// Multiplier on the parameter; `-1` encodes `exp(+i theta/2 P)` blocks.
    #[serde(default = "default_scale", skip_serializing_if = "is_unit")]
    pub scale: f64,
}

/// Serialized ansatz: Hartree-Fock preparation plus Pauli rotations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    pub n_qubits: usize,
    pub hf_occupied: Vec<usize>,
    pub rotations: Vec<RotationSpec>,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl CircuitSpec {
    pub fn n_params(&self) -> usize {
        self.rotations.iter().map(|r| r.param + 1).max().unwrap_or(0)
    }

    /// Basis index of the Hartree-Fock determinant.
    pub fn hf_index(&self) -> u64 {
        self.hf_occupied.iter().fold(0u64, |acc, &q| acc | 1 << q)
    }

    /// Rotation part `U(theta)` only, without the preparation.
    pub fn rotation_circuit(&self) -> Result<Circuit> {
        let mut c = Circuit::new(self.n_qubits);
        let mut used = vec![false; self.n_params()];
        for r in &self.rotations {
            let p = PauliString::parse(self.n_qubits, &r.pauli)?;
            if p.is_identity() {
                return Err(HfcError::InvalidArgument(
                    "identity rotation in circuit spec".into(),
                ));
            }
            used[r.param] = true;
            c.push(Op::Rotation {
                pauli: p,
                param: r.param,
                scale: r.scale,
            })?;
        }
        if let Some(k) = used.iter().position(|u| !u) {
            return Err(HfcError::InvalidArgument(format!(
                "parameter indices are not contiguous: {k} is never used"
            )));
        }
        Ok(c)
    }

    /// Hartree-Fock X gates followed by the rotations.
    pub fn circuit(&self) -> Result<Circuit> {
        let mut c = Circuit::new(self.n_qubits);
        for &q in &self.hf_occupied {
            c.push_x(q)?;
        }
        c.then(&self.rotation_circuit()?)
    }
}

/// Ansatz state for parameters `theta`.
pub fn build_ansatz(spec: &CircuitSpec, theta: &[f64]) -> Result<StateVector> {
    spec.circuit()?.run(theta)
}
