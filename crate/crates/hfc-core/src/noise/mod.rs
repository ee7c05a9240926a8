//! Device-noise emulation: readout flips, depolarizing trajectories, coherent
//! over-rotation and Pauli twirling.

mod execute;
mod model;
mod twirl;

pub use execute::{
    apply_readout, execute_with_twirl, noisy_distribution, noisy_execute, readout_channel,
    ExactDistribution,
};
pub use model::{NoiseModel, TwirlConfig, PRESETS};
pub use twirl::pauli_twirl;
