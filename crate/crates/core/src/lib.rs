//! Simulation of a chirped-driven weakly nonlinear quantum oscillator:
//! two-photon ladder climbing, its classical subharmonic autoresonance
//! limit, and the phase-locking threshold map.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod export;
pub mod model;
pub mod observables;
pub mod propagator;
pub mod threshold;
pub mod wigner;

pub use classical::*;
pub use error::{Error, Result};
pub use model::*;
pub use observables::*;
pub use propagator::*;
pub use threshold::*;
pub use wigner::*;
