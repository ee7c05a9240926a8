//! Qubit-ADAPT ansatz construction and orbital-rotation integral transforms.
//!
//! Orbital-optimized runs compose the pieces by hand: build a Hamiltonian from
//! [`IntegralTensors::hamiltonian`], run [`run_adapt`], pick new rotation
//! amplitudes (for example by a gradient step on the energy), assemble them
//! with [`spin_adapted_kappa`], transform with [`rotate_integrals`], and repeat
//! with the previous angles as a warm start.

mod engine;
mod integrals;
mod pool;

pub use engine::{
    dense_matrix, ground_energy, pool_gradient, run_adapt, AdaptFailure, AdaptOptions,
    AdaptState, AdaptStep, DEFAULT_GRAD_TOL, OPTIMIZER_GRAD_TOL,
};
pub use integrals::{
    number_operator, rotate_integrals, rotation_matrix, spin_adapted_kappa, IntegralTensors,
};
pub use pool::{build_pool, OperatorPool, PoolEntry, PoolOrigin};
