//! Pauli-string algebra and the Jordan-Wigner mapping.

mod jw;
mod string;
mod sum;

pub use jw::{
    fermion_product, jw_double, jw_single, ladder, strip_z_chains, ExcitationLabel,
};
pub use string::{qubitwise_commutes, Pauli, PauliString, Phase};
pub use sum::{PauliSum, ZERO_THRESHOLD};
