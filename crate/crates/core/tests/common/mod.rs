#![allow(dead_code)]

use chirp_ladder::{PhysicalParams, ResonanceMode, StateVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Quantum two-photon climbing run: `{1e-6, 0.016, 0.05, 0.18}`.
pub fn ladder_params() -> PhysicalParams {
    PhysicalParams::new(1e-6, 0.016, 0.05, 0.18, ResonanceMode::Subharmonic2).unwrap()
}

/// Classical subharmonic autoresonance run: `{1e-4, 0.0016, 0.0155, 1.9}`.
pub fn autoresonance_params() -> PhysicalParams {
    PhysicalParams::new(1e-4, 0.0016, 0.0155, 1.9, ResonanceMode::Subharmonic2).unwrap()
}

pub const LADDER_BASIS: usize = 40;
pub const LADDER_TAU_END: f64 = 25.0;
pub const AUTORESONANCE_BASIS: usize = 250;
pub const AUTORESONANCE_TAU_END: f64 = 6.0;

/// Normalized state with `levels` random complex amplitudes.
pub fn random_state(levels: usize, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..levels).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    StateVector { amps, t: 0.0 }.normalized()
}
