use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("basis size {size} too small: {reason}")]
    BasisTooSmall { size: usize, reason: String },

    #[error("norm drift {drift:.3e} exceeds budget {budget:.3e} at tau = {tau:.4}")]
    NormDrift { drift: f64, budget: f64, tau: f64 },

    #[error("stability guard violated: dt * max|E_n| = {product:.4} (limit {limit})")]
    StabilityGuard { product: f64, limit: f64 },

    #[error("basis edge truncation: top-3 level population {population:.3e} exceeds {limit:.1e} at tau = {tau:.4}")]
    BasisTruncation { population: f64, limit: f64, tau: f64 },

    #[error("phase-space grid holds only {mass:.4} of the state (outside mass above {limit})")]
    GridMass { mass: f64, limit: f64 },

    #[error("quadrature did not converge at (x, p) = ({x:.4}, {p:.4})")]
    Quadrature { x: f64, p: f64 },

    #[error("parameters leave the weak-nonlinearity domain: {0}")]
    WeakNonlinearity(String),

    #[error("no bracketing pair found: {0}")]
    NoBracket(String),

    #[error("capture curve non-monotone near threshold: {0}")]
    NonMonotone(String),
}

impl Error {
    /// True for failures of a numerical guard, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self, Error::InvalidParameter(_) | Error::BasisTooSmall { .. } | Error::WeakNonlinearity(_))
    }
}
