//! Emulation workbench for isotropic hyperfine coupling constants estimated
//! from qubit-ADAPT circuits on noisy quantum hardware.

pub mod adapt;
pub mod error;
pub mod hyperfine;
pub mod layout;
pub mod mitigation;
pub mod noise;
pub mod pauli;
pub mod rdm;
pub mod rng;
pub mod statevector;
pub mod workbench;

pub use error::{HfcError, Result};
pub use layout::{Spin, SpinLayout};
