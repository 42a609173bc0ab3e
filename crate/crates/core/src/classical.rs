//! Classical limit: Hamilton's equations of the driven anharmonic oscillator
//! integrated with fixed-step RK4 from rest.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{dimensionless, initial_time, ChirpSchedule, PhysicalParams};
use crate::observables::{boxcar, SMOOTHING_WINDOW};
use crate::threshold::{
    bisect_response, locked_lambda, realize_params, theory_threshold, threshold_tau_end, BisectionConfig, Regime,
    ThresholdPoint, SCAN_ALPHA,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub x: f64,
    pub p: f64,
    pub t: f64,
}

impl ClassicalState {
    pub fn at_rest(t: f64) -> Self {
        Self { x: 0.0, p: 0.0, t }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.p.is_finite()
    }
}

/// `(dx/dt, dp/dt) = (p, -x - lambda x^2 - beta x^3 - eps cos phi_d(t))`.
pub fn classical_rhs(state: &ClassicalState, params: &PhysicalParams, schedule: &ChirpSchedule) -> (f64, f64) {
    let x = state.x;
    let force = -x - params.lambda * x * x - params.beta * x * x * x;
    (state.p, force - params.drive_amplitude() * schedule.phase(state.t).cos())
}

/// Undriven energy `(p^2 + x^2)/2 + lambda x^3/3 + beta x^4/4`.
pub fn classical_energy(state: &ClassicalState, params: &PhysicalParams) -> f64 {
    let (x, p) = (state.x, state.p);
    0.5 * (p * p + x * x) + params.lambda * x * x * x / 3.0 + 0.25 * params.beta * x * x * x * x
}

/// One RK4 step of length `dt`.
pub fn classical_step(
    state: &ClassicalState,
    params: &PhysicalParams,
    schedule: &ChirpSchedule,
    dt: f64,
) -> ClassicalState {
    let at =
        |s: &ClassicalState, dx: f64, dp: f64, h: f64| ClassicalState { x: s.x + h * dx, p: s.p + h * dp, t: s.t + h };
    let k1 = classical_rhs(state, params, schedule);
    let k2 = classical_rhs(&at(state, k1.0, k1.1, 0.5 * dt), params, schedule);
    let k3 = classical_rhs(&at(state, k2.0, k2.1, 0.5 * dt), params, schedule);
    let k4 = classical_rhs(&at(state, k3.0, k3.1, dt), params, schedule);
    ClassicalState {
        x: state.x + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
        p: state.p + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        t: state.t + dt,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConfig {
    pub tau_end: f64,
    /// Upper bound on the time step; the actual step divides each sample interval evenly.
    #[serde(default = "default_classical_dt")]
    pub dt: f64,
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    /// `|x|` beyond this counts as divergence.
    #[serde(default = "default_divergence_limit")]
    pub divergence_limit: f64,
}

fn default_classical_dt() -> f64 {
    0.01
}

fn default_sample_interval() -> f64 {
    0.01
}

fn default_divergence_limit() -> f64 {
    1e6
}

impl ClassicalConfig {
    pub fn new(tau_end: f64) -> Self {
        Self {
            tau_end,
            dt: default_classical_dt(),
            sample_interval: default_sample_interval(),
            divergence_limit: default_divergence_limit(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalRun {
    pub taus: Vec<f64>,
    pub xs: Vec<f64>,
    pub ps: Vec<f64>,
    pub energies: Vec<f64>,
    pub smoothed: Vec<f64>,
    /// `E_ar(tau_end) / 2`.
    pub capture_energy: f64,
    pub diverged: bool,
    pub captured: bool,
}

impl ClassicalRun {
    pub fn final_smoothed(&self) -> f64 {
        self.smoothed.last().copied().unwrap_or(0.0)
    }
}

/// Energy of the ideal frequency-locked solution: `omega(E) = 1 + 2 gamma E`
/// equals the resonant drive frequency when `E = tau / P2`.
pub fn autoresonant_energy(tau: f64, p2: f64) -> f64 {
    tau / p2
}

/// Runs from `(x, p) = (0, 0)` at `tau = -10` and flags capture when the
/// smoothed final energy exceeds half the locked energy.
pub fn classical_capture(params: &PhysicalParams, config: &ClassicalConfig) -> Result<ClassicalRun> {
    params.validate()?;
    let d = dimensionless(params);
    if !(d.p2 > 0.0) {
        return Err(Error::InvalidParameter(format!("classical capture needs P2 > 0, got {}", d.p2)));
    }
    if !(config.dt > 0.0) || !(config.sample_interval > 0.0) {
        return Err(Error::InvalidParameter("dt and sample_interval must be > 0".into()));
    }
    let t0 = initial_time(params.alpha);
    let tau0 = -10.0;
    if !(config.tau_end > tau0) {
        return Err(Error::InvalidParameter(format!("tau_end must exceed {tau0}")));
    }
    let sqrt_alpha = params.alpha.sqrt();
    let schedule = params.schedule();
    let samples = ((config.tau_end - tau0) / config.sample_interval).round().max(1.0) as usize;
    let segment = (config.tau_end - tau0) / samples as f64 / sqrt_alpha;
    let substeps = (segment / config.dt).ceil().max(1.0) as usize;
    let h = segment / substeps as f64;

    let mut state = ClassicalState::at_rest(t0);
    let mut run = ClassicalRun {
        taus: Vec::with_capacity(samples + 1),
        xs: Vec::with_capacity(samples + 1),
        ps: Vec::with_capacity(samples + 1),
        energies: Vec::with_capacity(samples + 1),
        smoothed: Vec::new(),
        capture_energy: 0.5 * autoresonant_energy(config.tau_end, d.p2),
        diverged: false,
        captured: false,
    };
    let record = |state: &ClassicalState, tau: f64, run: &mut ClassicalRun| {
        run.taus.push(tau);
        run.xs.push(state.x);
        run.ps.push(state.p);
        run.energies.push(classical_energy(state, params));
    };
    record(&state, tau0, &mut run);
    for i in 1..=samples {
        for _ in 0..substeps {
            state = classical_step(&state, params, &schedule, h);
        }
        if !state.is_finite() || state.x.abs() > config.divergence_limit {
            run.diverged = true;
            break;
        }
        // pin the clock to the sample grid
        state.t = t0 + i as f64 * segment;
        record(&state, tau0 + i as f64 * segment * sqrt_alpha, &mut run);
    }
    run.smoothed = boxcar(&run.taus, &run.energies, SMOOTHING_WINDOW);
    run.captured = !run.diverged && run.final_smoothed() > run.capture_energy;
    Ok(run)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalScan {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Cubic coefficient; `None` selects [`locked_lambda`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_classical_dt")]
    pub dt: f64,
}

fn default_alpha() -> f64 {
    SCAN_ALPHA
}

fn default_tol() -> f64 {
    0.01
}

impl Default for ClassicalScan {
    fn default() -> Self {
        Self { alpha: default_alpha(), lambda: None, tol: default_tol(), dt: default_classical_dt() }
    }
}

/// Largest `P2` for which the classical limit is trusted.
pub const CLASSICAL_P2_LIMIT: f64 = 0.3;

impl ClassicalScan {
    pub fn captured_at(&self, p1_tilde: f64, p2: f64) -> Result<bool> {
        let lambda = self.lambda.unwrap_or_else(|| locked_lambda(p2, threshold_tau_end(p2)));
        let params = realize_params(p1_tilde, p2, self.alpha, lambda)?;
        let mut config = ClassicalConfig::new(threshold_tau_end(p2));
        config.dt = self.dt;
        Ok(classical_capture(&params, &config)?.captured)
    }
}

/// Bisects the classical capture threshold in `P1~` at fixed `P2`.
pub fn classical_threshold(p2: f64, scan: &ClassicalScan) -> Result<ThresholdPoint> {
    if !(p2 > 0.0 && p2 <= CLASSICAL_P2_LIMIT) {
        return Err(Error::InvalidParameter(format!(
            "classical threshold needs 0 < P2 <= {CLASSICAL_P2_LIMIT}, got {p2}"
        )));
    }
    let theory = theory_threshold(p2)?;
    let cfg = BisectionConfig::new(scan.tol);
    let b = bisect_response(theory.classical, &cfg, |x| Ok(if scan.captured_at(x, p2)? { 1.0 } else { 0.0 }))?;
    Ok(ThresholdPoint { p2, p1_tilde_cr: b.value, capture_curve: b.curve, regime: Regime::classify(b.value, p2) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{drive_phase, ResonanceMode};

    fn params(beta: f64, lambda: f64, epsilon: f64) -> PhysicalParams {
        PhysicalParams::new(1e-4, beta, lambda, epsilon, ResonanceMode::Subharmonic2).unwrap()
    }

    #[test]
    fn rhs_examples() {
        let p = params(0.0, 0.0, 0.0);
        let s = p.schedule();
        assert_eq!(classical_rhs(&ClassicalState { x: 1.0, p: 0.0, t: 0.0 }, &p, &s), (0.0, -1.0));
        let p = params(0.0, 0.05, 0.0);
        let (dx, dp) = classical_rhs(&ClassicalState { x: 2.0, p: 0.0, t: 0.0 }, &p, &s);
        assert_eq!(dx, 0.0);
        assert!((dp + 2.2).abs() < 1e-15);
        // cos(phi_d) = 1 at t0
        let p = params(0.0, 0.0, 0.3);
        let s = p.schedule();
        let t0 = s.t0;
        assert_eq!(drive_phase(&s, t0).1.cos(), 1.0);
        let (dx, dp) = classical_rhs(&ClassicalState::at_rest(t0), &p, &s);
        assert_eq!(dx, 0.0);
        assert!((dp + 0.3).abs() < 1e-15);
    }

    #[test]
    fn undriven_energy_conserved() {
        let p = params(0.0016, 0.0155, 0.0);
        let s = p.schedule();
        let mut st = ClassicalState { x: 1.0, p: 0.0, t: s.t0 };
        let e0 = classical_energy(&st, &p);
        for _ in 0..200_000 {
            st = classical_step(&st, &p, &s, 0.01);
        }
        assert!((classical_energy(&st, &p) - e0).abs() < 1e-8);
    }

    #[test]
    fn zero_drive_stays_at_rest() {
        let run = classical_capture(&params(0.0016, 0.0155, 0.0), &ClassicalConfig::new(0.0)).unwrap();
        assert!(!run.captured);
        assert!(run.energies.iter().all(|&e| e == 0.0));
        assert!((run.taus.last().unwrap() - 0.0).abs() < 1e-9);
    }

    #[test]
    fn threshold_domain_checked() {
        assert!(classical_threshold(1.0, &ClassicalScan::default()).is_err());
        assert!(classical_threshold(0.0, &ClassicalScan::default()).is_err());
    }

    #[test]
    fn autoresonant_energy_is_ideal_ladder() {
        assert_eq!(autoresonant_energy(25.0, 10.0), 2.5);
    }
}
