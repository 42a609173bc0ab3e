//! Static problem data: the anharmonic spectrum, the banded position-operator
//! couplings, chirp schedules and the dimensionless parameter groups.
//!
//! Everything here is immutable once built. Units are dimensionless with
//! `hbar = 1` and unit linear frequency.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which resonance the chirped drive sweeps through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResonanceMode {
    /// Drive frequency `1 + alpha t`, passing the linear frequency.
    Fundamental,
    /// Drive frequency `(1 + alpha t) / 2`, the two-photon 1:2 resonance.
    Subharmonic2,
    /// Fundamental chirp with the drive amplitude replaced by the effective
    /// two-photon amplitude `(8/9) epsilon^2 lambda`.
    EffectiveFundamental,
}

impl ResonanceMode {
    /// Ratio of the drive frequency to `1 + alpha t`.
    pub fn frequency_ratio(self) -> f64 {
        match self {
            ResonanceMode::Fundamental | ResonanceMode::EffectiveFundamental => 1.0,
            ResonanceMode::Subharmonic2 => 0.5,
        }
    }
}

/// Chirp rate, nonlinearity and drive strength of a single run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub mode: ResonanceMode,
}

impl PhysicalParams {
    pub fn new(alpha: f64, beta: f64, lambda: f64, epsilon: f64, mode: ResonanceMode) -> Result<Self> {
        let params = Self { alpha, beta, lambda, epsilon, mode };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be > 0, got {}", self.alpha)));
        }
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!("epsilon must be >= 0, got {}", self.epsilon)));
        }
        if !self.beta.is_finite() || !self.lambda.is_finite() {
            return Err(Error::InvalidParameter("beta and lambda must be finite".into()));
        }
        Ok(())
    }

    pub fn gamma(&self) -> f64 {
        anharmonicity(self.beta, self.lambda)
    }

    /// Amplitude multiplying `x cos(phi_d)` in the propagated Hamiltonian.
    pub fn drive_amplitude(&self) -> f64 {
        match self.mode {
            ResonanceMode::EffectiveFundamental => effective_drive(self),
            _ => self.epsilon,
        }
    }

    /// The fundamental-resonance twin of a subharmonic run: same chirp rate
    /// and nonlinearity, fundamental chirp, drive `(8/9) epsilon^2 lambda`.
    pub fn effective_twin(&self) -> Self {
        Self { mode: ResonanceMode::EffectiveFundamental, ..*self }
    }

    pub fn with_mode(&self, mode: ResonanceMode) -> Self {
        Self { mode, ..*self }
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..*self }
    }

    pub fn schedule(&self) -> ChirpSchedule {
        ChirpSchedule::new(self.mode, self.alpha, initial_time(self.alpha))
    }
}

/// Start of every run, `t0 = -10 / sqrt(alpha)`, i.e. slow time `tau = -10`.
pub fn initial_time(alpha: f64) -> f64 {
    -10.0 / alpha.sqrt()
}

/// Anharmonicity of the ladder, `(3/8) beta - (5/12) lambda^2`.
pub fn anharmonicity(beta: f64, lambda: f64) -> f64 {
    0.375 * beta - (5.0 / 12.0) * lambda * lambda
}

/// Two-photon effective drive amplitude `(8/9) epsilon^2 lambda`.
pub fn effective_drive(params: &PhysicalParams) -> f64 {
    (8.0 / 9.0) * params.epsilon * params.epsilon * params.lambda
}

/// Dimensionless groups and characteristic times of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    pub p1: f64,
    pub p2: f64,
    pub p1_tilde: f64,
    pub mu: f64,
    pub mu_tilde: f64,
    /// Passage time through the nonlinear shift between the first two gaps.
    pub t_nl: f64,
    /// Inverse Rabi frequency.
    pub t_r: f64,
    /// Sweep time scale.
    pub t_s: f64,
}

/// Evaluates `P1`, `P2`, the rescaled `P1~` and the classical `mu`, `mu~`.
///
/// `epsilon` is always the raw drive amplitude of `params`, so for an
/// [`ResonanceMode::EffectiveFundamental`] set call this on the twin built with
/// [`PhysicalParams::with_epsilon`] if the effective `P1` is wanted.
pub fn dimensionless(params: &PhysicalParams) -> DimensionlessParams {
    let gamma = params.gamma();
    let sqrt_alpha = params.alpha.sqrt();
    let p1 = params.epsilon / (2.0 * params.alpha).sqrt();
    let p2 = 2.0 * gamma / sqrt_alpha;
    let p1_tilde = (8.0 / 9.0) * params.epsilon * params.lambda * p1;
    let sqrt_p2 = p2.abs().sqrt();
    DimensionlessParams {
        p1,
        p2,
        p1_tilde,
        mu: 0.5 * p1 * sqrt_p2,
        mu_tilde: 0.5 * p1_tilde * sqrt_p2,
        t_nl: 2.0 * gamma / params.alpha,
        t_r: std::f64::consts::SQRT_2 / params.epsilon,
        t_s: 1.0 / sqrt_alpha,
    }
}

/// Truncated spectrum `E_0 .. E_{N-1}` of the undriven oscillator.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLadder {
    levels: Vec<f64>,
    gamma: f64,
}

impl EnergyLadder {
    pub fn new(beta: f64, lambda: f64, size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::BasisTooSmall { size, reason: "need at least 2 levels".into() });
        }
        let gamma = anharmonicity(beta, lambda);
        let offset = 0.1875 * beta - (11.0 / 72.0) * lambda * lambda;
        let levels = (0..size)
            .map(|n| {
                let n = n as f64;
                n + 0.5 + gamma * (n * n + n) + offset
            })
            .collect();
        Ok(Self { levels, gamma })
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> f64 {
        self.levels[n]
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.levels.iter().fold(0.0_f64, |m, e| m.max(e.abs()))
    }

    /// Midpoint energy between levels `n` and `n + 1`.
    pub fn mid_riser(&self, n: usize) -> f64 {
        0.5 * (self.levels[n] + self.levels[n + 1])
    }
}

pub fn build_ladder(params: &PhysicalParams, size: usize) -> Result<EnergyLadder> {
    EnergyLadder::new(params.beta, params.lambda, size)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingOrder {
    /// Harmonic matrix elements of `x` only (offsets +-1).
    Linear,
    /// Adds the first-order `lambda Q + beta R` corrections (offsets 0..+-3).
    Full,
}

/// Symmetric banded matrix of `<psi_k| x |psi_n>` with bandwidth 3.
///
/// Only the upper diagonals are stored: `upper[o][i] = entry(i, i + o)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    size: usize,
    order: CouplingOrder,
    upper: [Vec<f64>; 4],
}

pub const BANDWIDTH: usize = 3;

impl CouplingMatrix {
    pub fn new(size: usize, order: CouplingOrder, beta: f64, lambda: f64) -> Result<Self> {
        let min = match order {
            CouplingOrder::Linear => 2,
            CouplingOrder::Full => 4,
        };
        if size < min {
            return Err(Error::BasisTooSmall {
                size,
                reason: format!("{order:?} coupling needs at least {min} levels"),
            });
        }
        let (lambda, beta) = match order {
            CouplingOrder::Linear => (0.0, 0.0),
            CouplingOrder::Full => (lambda, beta),
        };
        let r_scale = 1.0 / (24.0 * std::f64::consts::SQRT_2);
        let mut upper: [Vec<f64>; 4] = Default::default();
        for (o, band) in upper.iter_mut().enumerate() {
            *band = (0..size - o)
                .map(|i| {
                    // entry(k = i, n = i + o)
                    let n = (i + o) as f64;
                    match o {
                        0 => -lambda * (2.0 * n + 1.0) / 2.0,
                        1 => {
                            let linear = (n / 2.0).sqrt();
                            let r = -2.0 * (2.0 * n + 1.0) * n.sqrt() * r_scale;
                            linear + beta * r
                        }
                        2 => lambda * (n * (n - 1.0)).sqrt() / 6.0,
                        _ => beta * 3.0 * (n * (n - 1.0) * (n - 2.0)).sqrt() * r_scale,
                    }
                })
                .collect();
        }
        Ok(Self { size, order, upper })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn order(&self) -> CouplingOrder {
        self.order
    }

    /// `<psi_k| x |psi_n>`; zero outside the band.
    pub fn entry(&self, k: usize, n: usize) -> f64 {
        let (lo, hi) = if k <= n { (k, n) } else { (n, k) };
        let o = hi - lo;
        if o > BANDWIDTH || hi >= self.size {
            0.0
        } else {
            self.upper[o][lo]
        }
    }

    /// Diagonal at signed offset `k - n`, indexed by `min(k, n)`.
    pub fn band(&self, offset: i32) -> &[f64] {
        &self.upper[offset.unsigned_abs() as usize]
    }

    /// Largest absolute row sum, a bound on the spectral radius.
    pub fn max_row_sum(&self) -> f64 {
        (0..self.size)
            .map(|k| {
                let lo = k.saturating_sub(BANDWIDTH);
                let hi = (k + BANDWIDTH).min(self.size - 1);
                (lo..=hi).map(|n| self.entry(k, n).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `y = K x`.
    #[inline]
    pub fn apply<T>(&self, x: &[T], y: &mut [T])
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::AddAssign + Default,
    {
        let n = self.size;
        debug_assert_eq!(x.len(), n);
        debug_assert_eq!(y.len(), n);
        let [d0, d1, d2, d3] = &self.upper;
        for k in 0..n {
            y[k] = x[k] * d0[k];
        }
        for k in 0..n - 1 {
            let a = d1[k];
            let (xk, xn) = (x[k], x[k + 1]);
            y[k] += xn * a;
            y[k + 1] += xk * a;
        }
        if n > 2 {
            for k in 0..n - 2 {
                let a = d2[k];
                let (xk, xn) = (x[k], x[k + 2]);
                y[k] += xn * a;
                y[k + 2] += xk * a;
            }
        }
        if n > 3 {
            for k in 0..n - 3 {
                let a = d3[k];
                let (xk, xn) = (x[k], x[k + 3]);
                y[k] += xn * a;
                y[k + 3] += xk * a;
            }
        }
    }
}

pub fn build_coupling(size: usize, order: CouplingOrder, beta: f64, lambda: f64) -> Result<CouplingMatrix> {
    CouplingMatrix::new(size, order, beta, lambda)
}

/// Drive frequency and phase as closed-form functions of time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChirpSchedule {
    pub mode: ResonanceMode,
    pub alpha: f64,
    pub t0: f64,
    /// Constant added to the phase; zero reproduces `phi_d(t0) = 0`.
    pub phase_offset: f64,
}

impl ChirpSchedule {
    pub fn new(mode: ResonanceMode, alpha: f64, t0: f64) -> Self {
        Self { mode, alpha, t0, phase_offset: 0.0 }
    }

    pub fn with_phase_offset(self, phase_offset: f64) -> Self {
        Self { phase_offset, ..self }
    }

    pub fn omega(&self, t: f64) -> f64 {
        self.mode.frequency_ratio() * (1.0 + self.alpha * t)
    }

    pub fn phase(&self, t: f64) -> f64 {
        let dt = t - self.t0;
        // integral of r (1 + alpha s) ds over [t0, t]
        self.mode.frequency_ratio() * dt * (1.0 + 0.5 * self.alpha * (t + self.t0)) + self.phase_offset
    }
}

/// `(omega_d(t), phi_d(t))`.
pub fn drive_phase(schedule: &ChirpSchedule, t: f64) -> (f64, f64) {
    (schedule.omega(t), schedule.phase(t))
}
