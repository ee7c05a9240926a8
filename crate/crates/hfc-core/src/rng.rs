//! Seed discipline: every random stream is a ChaCha8 generator keyed by a
//! 64-bit seed plus a stream number, so independent consumers never overlap.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Stream number used for bitstring sampling.
pub const SAMPLING: u64 = 0;
/// Stream number used for gate-error trajectories.
pub const GATE_ERRORS: u64 = 1;
/// Stream number used for readout flips.
pub const READOUT: u64 = 2;
/// Stream number used for twirl draws.
pub const TWIRL: u64 = 3;

pub fn stream(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Child seed for job `index` of a batch seeded with `seed` (splitmix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
