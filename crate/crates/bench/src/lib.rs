//! Fixtures shared by the benchmarks.

use chirp_ladder::{PhysicalParams, ResonanceMode, StateVector};
use num_complex::Complex64;

/// Quantum two-photon ladder parameters.
pub fn ladder_params() -> PhysicalParams {
    PhysicalParams::new(1e-6, 0.016, 0.05, 0.18, ResonanceMode::Subharmonic2).expect("valid parameters")
}

/// Classical two-photon autoresonance parameters.
pub fn autoresonance_params() -> PhysicalParams {
    PhysicalParams::new(1e-4, 0.0016, 0.0155, 1.9, ResonanceMode::Subharmonic2).expect("valid parameters")
}

/// Normalized state with a Gaussian envelope around `center` and a
/// quadratic phase, deterministic in `size`.
pub fn packet(size: usize, center: f64, width: f64) -> StateVector {
    let amps = (0..size)
        .map(|n| {
            let d = (n as f64 - center) / width;
            Complex64::from_polar((-0.5 * d * d).exp(), 0.3 * n as f64 + 0.01 * (n * n) as f64)
        })
        .collect();
    StateVector { amps, t: 0.0 }.normalized()
}
