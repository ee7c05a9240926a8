//! Dense state-vector execution of Pauli-rotation circuits and bitstring sampling.

mod circuit;
mod sampling;
mod state;

pub use circuit::{build_ansatz, Circuit, CircuitSpec, Op, RotationSpec};
pub(crate) use circuit::apply_op;
pub use sampling::{measure_pauli, parity_expectation, sample, sample_distribution, CountsHistogram};
pub use state::{apply_pauli_rotation, bitstring, parse_bitstring, StateVector, MAX_QUBITS};

pub use crate::rdm::exact_rdm;
