//! Fixed-step RK4 integration of the energy-basis Schrödinger equation
//!
//! ```text
//! i dc_n/dt = E_n c_n + A cos(phi_d(t)) sum_k K_kn c_k
//! ```
//!
//! without any rotating-wave approximation. In the interaction picture the
//! diagonal phases `exp(-i E_n t)` are factored out analytically and only the
//! drive coupling is stepped, which removes the stiffness set by `max E_n`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    dimensionless, initial_time, ChirpSchedule, CouplingMatrix, CouplingOrder, EnergyLadder, PhysicalParams,
};

/// Amplitudes `c_n` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub amps: Vec<C64>,
    pub t: f64,
}

impl StateVector {
    pub fn ground(size: usize, t: f64) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); size];
        amps[0] = C64::new(1.0, 0.0);
        Self { amps, t }
    }

    /// A single Fock level `n`.
    pub fn fock(size: usize, n: usize, t: f64) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); size];
        amps[n] = C64::new(1.0, 0.0);
        Self { amps, t }
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn populations(&self) -> Vec<f64> {
        self.amps.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn mean_energy(&self, ladder: &EnergyLadder) -> f64 {
        self.amps.iter().zip(ladder.levels()).map(|(c, e)| c.norm_sqr() * e).sum()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        self.amps.iter_mut().for_each(|c| *c /= n);
        self
    }
}

/// Ground-state initial condition at `t0 = -10 / sqrt(alpha)`.
pub fn initial_state(size: usize, alpha: f64) -> Result<StateVector> {
    if size < 2 {
        return Err(Error::BasisTooSmall { size, reason: "need at least 2 levels".into() });
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be > 0, got {alpha}")));
    }
    Ok(StateVector::ground(size, initial_time(alpha)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Picture {
    Schrodinger,
    Interaction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    /// Base step in fast time; `None` selects [`DrivenOscillator::default_dt`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_picture")]
    pub picture: Picture,
    #[serde(default = "default_norm_budget")]
    pub norm_drift_budget: f64,
    /// Slow-time spacing of recorded samples.
    #[serde(default = "default_sample_interval")]
    pub sample_interval: f64,
    pub tau_end: f64,
    /// Population allowed in the top three basis levels before the run is
    /// declared truncated.
    #[serde(default = "default_truncation_limit")]
    pub truncation_limit: f64,
    /// Slow times at which full amplitude snapshots are kept.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshot_taus: Vec<f64>,
}

fn default_picture() -> Picture {
    Picture::Interaction
}
fn default_norm_budget() -> f64 {
    1e-6
}
fn default_sample_interval() -> f64 {
    0.01
}
fn default_truncation_limit() -> f64 {
    1e-3
}

impl IntegratorConfig {
    pub fn new(tau_end: f64) -> Self {
        Self {
            dt: None,
            picture: default_picture(),
            norm_drift_budget: default_norm_budget(),
            sample_interval: default_sample_interval(),
            tau_end,
            truncation_limit: default_truncation_limit(),
            snapshot_taus: Vec::new(),
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = Some(dt);
        self
    }

    pub fn with_picture(mut self, picture: Picture) -> Self {
        self.picture = picture;
        self
    }

    pub fn with_snapshots(mut self, taus: Vec<f64>) -> Self {
        self.snapshot_taus = taus;
        self
    }
}

/// Stability guard for the Schrödinger picture: `dt * max|E_n| < 0.5`.
pub const SCHRODINGER_STABILITY_LIMIT: f64 = 0.5;

/// Diagonal energies, couplings, drive amplitude and chirp of one problem.
#[derive(Debug, Clone)]
pub struct DrivenOscillator {
    pub ladder: EnergyLadder,
    pub coupling: CouplingMatrix,
    pub drive_amp: f64,
    pub schedule: ChirpSchedule,
}

impl DrivenOscillator {
    pub fn new(params: &PhysicalParams, size: usize, order: CouplingOrder) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            ladder: EnergyLadder::new(params.beta, params.lambda, size)?,
            coupling: CouplingMatrix::new(size, order, params.beta, params.lambda)?,
            drive_amp: params.drive_amplitude(),
            schedule: params.schedule(),
        })
    }

    pub fn size(&self) -> usize {
        self.ladder.len()
    }

    pub fn drive(&self, t: f64) -> f64 {
        self.drive_amp * self.schedule.phase(t).cos()
    }

    /// Default step.
    ///
    /// Schrödinger picture: `dt * max E_n <= 0.1`. Interaction picture:
    /// `dt * A * max row sum <= 0.05`, capped so the fastest residual
    /// oscillation `E_{n+3} - E_n + omega_d` is resolved with 0.2 rad per step.
    pub fn default_dt(&self, picture: Picture) -> f64 {
        match picture {
            Picture::Schrodinger => 0.1 / self.ladder.max_abs(),
            Picture::Interaction => {
                let e = self.ladder.levels();
                let n = e.len();
                let gap = (1..=3.min(n - 1)).map(|o| (e[n - 1] - e[n - 1 - o]).abs()).fold(0.0, f64::max);
                let omega = gap + self.schedule.omega(0.0).abs().max(1.0);
                let coupling = self.drive_amp * self.coupling.max_row_sum();
                let by_coupling = if coupling > 0.0 { 0.05 / coupling } else { f64::INFINITY };
                by_coupling.min(0.2 / omega)
            }
        }
    }

    fn check_guard(&self, picture: Picture, dt: f64) -> Result<()> {
        if let Picture::Schrodinger = picture {
            let product = dt.abs() * self.ladder.max_abs();
            if product >= SCHRODINGER_STABILITY_LIMIT {
                return Err(Error::StabilityGuard { product, limit: SCHRODINGER_STABILITY_LIMIT });
            }
        }
        if !(dt.is_finite() && dt != 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be finite and nonzero, got {dt}")));
        }
        Ok(())
    }
}

/// `dc/dt = -i [E c + A cos(phi_d(t)) K c]` at the state's own time.
pub fn rhs(state: &StateVector, system: &DrivenOscillator) -> Vec<C64> {
    let mut out = vec![C64::default(); state.len()];
    schrodinger_rhs(state.t, &state.amps, system, &mut out);
    out
}

fn schrodinger_rhs(t: f64, c: &[C64], system: &DrivenOscillator, out: &mut [C64]) {
    let f = system.drive(t);
    system.coupling.apply(c, out);
    for ((o, &ci), &e) in out.iter_mut().zip(c).zip(system.ladder.levels()) {
        let h = ci * e + *o * f;
        *o = C64::new(h.im, -h.re);
    }
}

/// Reusable RK4 work buffers for a fixed basis size.
#[derive(Debug, Clone)]
pub struct Stepper {
    picture: Picture,
    dt: f64,
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
    scratch: Vec<C64>,
    /// `exp(-i E_n dt / 2)`.
    half_phase: Vec<C64>,
    /// Frame phases `exp(-i E_n s)` at the start, middle and end of a step.
    frame: [Vec<C64>; 3],
}

impl Stepper {
    pub fn new(system: &DrivenOscillator, picture: Picture, dt: f64) -> Result<Self> {
        system.check_guard(picture, dt)?;
        let n = system.size();
        let zeros = vec![C64::default(); n];
        let half_phase = system.ladder.levels().iter().map(|&e| C64::from_polar(1.0, -e * dt / 2.0)).collect();
        Ok(Self {
            picture,
            dt,
            k: [zeros.clone(), zeros.clone(), zeros.clone(), zeros.clone()],
            tmp: zeros.clone(),
            scratch: zeros.clone(),
            half_phase,
            frame: [zeros.clone(), zeros.clone(), zeros],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `state` by `steps` steps of size `dt`.
    pub fn advance(&mut self, state: &mut StateVector, system: &DrivenOscillator, steps: usize) {
        match self.picture {
            Picture::Schrodinger => {
                for _ in 0..steps {
                    self.rk4_schrodinger(state, system);
                }
            }
            Picture::Interaction => self.advance_interaction(state, system, steps),
        }
    }

    fn rk4_schrodinger(&mut self, state: &mut StateVector, system: &DrivenOscillator) {
        let h = self.dt;
        let t = state.t;
        let [k1, k2, k3, k4] = &mut self.k;
        let tmp = &mut self.tmp;
        let c = &mut state.amps;

        schrodinger_rhs(t, c, system, k1);
        axpy_into(tmp, c, k1, h / 2.0);
        schrodinger_rhs(t + h / 2.0, tmp, system, k2);
        axpy_into(tmp, c, k2, h / 2.0);
        schrodinger_rhs(t + h / 2.0, tmp, system, k3);
        axpy_into(tmp, c, k3, h);
        schrodinger_rhs(t + h, tmp, system, k4);
        combine(c, k1, k2, k3, k4, h);
        state.t = t + h;
    }

    /// Interaction-picture stepping with the frame anchored at the current
    /// time, so `b = c` on entry and on exit the frame phases are restored.
    fn advance_interaction(&mut self, state: &mut StateVector, system: &DrivenOscillator, steps: usize) {
        let h = self.dt;
        let t_ref = state.t;
        let [d0, d1, d2] = &mut self.frame;
        d0.iter_mut().for_each(|d| *d = C64::new(1.0, 0.0));
        for j in 0..steps {
            let t = t_ref + j as f64 * h;
            for i in 0..d0.len() {
                d1[i] = d0[i] * self.half_phase[i];
                d2[i] = d1[i] * self.half_phase[i];
            }
            let [k1, k2, k3, k4] = &mut self.k;
            let (tmp, scratch) = (&mut self.tmp, &mut self.scratch);
            let b = &mut state.amps;

            interaction_rhs(system.drive(t), b, d0, system, scratch, k1);
            axpy_into(tmp, b, k1, h / 2.0);
            let f_mid = system.drive(t + h / 2.0);
            interaction_rhs(f_mid, tmp, d1, system, scratch, k2);
            axpy_into(tmp, b, k2, h / 2.0);
            interaction_rhs(f_mid, tmp, d1, system, scratch, k3);
            axpy_into(tmp, b, k3, h);
            interaction_rhs(system.drive(t + h), tmp, d2, system, scratch, k4);
            combine(b, k1, k2, k3, k4, h);

            std::mem::swap(d0, d2);
        }
        // back to Schrödinger amplitudes; the frame phase is evaluated
        // directly rather than taken from the accumulated products in d0
        let s = steps as f64 * h;
        for (c, &e) in state.amps.iter_mut().zip(system.ladder.levels()) {
            *c *= C64::from_polar(1.0, -e * s);
        }
        state.t = t_ref + s;
    }
}

/// `db/dt = -i f D^* K (D b)` with `D = exp(-i E s)`.
#[inline]
fn interaction_rhs(f: f64, b: &[C64], d: &[C64], system: &DrivenOscillator, scratch: &mut [C64], out: &mut [C64]) {
    for ((s, &bi), &di) in scratch.iter_mut().zip(b).zip(d) {
        *s = bi * di;
    }
    system.coupling.apply(scratch, out);
    for (o, &di) in out.iter_mut().zip(d) {
        let v = *o * di.conj() * f;
        *o = C64::new(v.im, -v.re);
    }
}

#[inline]
fn axpy_into(out: &mut [C64], x: &[C64], k: &[C64], a: f64) {
    for ((o, &xi), &ki) in out.iter_mut().zip(x).zip(k) {
        *o = xi + ki * a;
    }
}

#[inline]
fn combine(x: &mut [C64], k1: &[C64], k2: &[C64], k3: &[C64], k4: &[C64], h: f64) {
    let w = h / 6.0;
    for i in 0..x.len() {
        x[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * w;
    }
}

/// One RK4 step of size `dt` in the requested picture.
pub fn step(state: &StateVector, system: &DrivenOscillator, picture: Picture, dt: f64) -> Result<StateVector> {
    let mut stepper = Stepper::new(system, picture, dt)?;
    let mut next = state.clone();
    stepper.advance(&mut next, system, 1);
    Ok(next)
}

/// One recorded point of a trajectory, handed to the observer callback.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub tau: f64,
    pub populations: &'a [f64],
    pub mean_energy: f64,
    pub norm: f64,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub tau: f64,
    pub state: StateVector,
}

/// Sampled run on the slow-time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: PhysicalParams,
    pub order: CouplingOrder,
    pub dt: f64,
    pub taus: Vec<f64>,
    pub norms: Vec<f64>,
    pub energies: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: StateVector,
    pub ladder: EnergyLadder,
    pub max_norm_drift: f64,
}

impl Trajectory {
    pub fn final_tau(&self) -> f64 {
        *self.taus.last().expect("trajectory has at least one sample")
    }

    pub fn p2(&self) -> f64 {
        dimensionless(&self.params).p2
    }

    pub fn snapshot_at(&self, tau: f64) -> Option<&Snapshot> {
        self.snapshots.iter().min_by(|a, b| (a.tau - tau).abs().total_cmp(&(b.tau - tau).abs()))
    }
}

/// Runs from `tau = -10` to `config.tau_end`, sampling every
/// `config.sample_interval` of slow time.
///
/// The sink sees every sample as it is produced; the returned trajectory
/// holds the same data. Fails on norm drift above budget or when the top
/// three levels hold more than `truncation_limit` of the population.
pub fn propagate<F>(
    params: &PhysicalParams,
    size: usize,
    order: CouplingOrder,
    config: &IntegratorConfig,
    mut sink: F,
) -> Result<Trajectory>
where
    F: FnMut(&Sample<'_>),
{
    let system = DrivenOscillator::new(params, size, order)?;
    let sqrt_alpha = params.alpha.sqrt();
    let tau0 = initial_time(params.alpha) * sqrt_alpha;
    if !(config.sample_interval > 0.0) {
        return Err(Error::InvalidParameter("sample_interval must be > 0".into()));
    }
    if !(config.tau_end > tau0) {
        return Err(Error::InvalidParameter(format!("tau_end must exceed {tau0}, got {}", config.tau_end)));
    }
    let samples = ((config.tau_end - tau0) / config.sample_interval).round() as usize;
    let segment = config.sample_interval / sqrt_alpha;
    let dt_target = config.dt.unwrap_or_else(|| system.default_dt(config.picture));
    let substeps = (segment / dt_target).ceil().max(1.0) as usize;
    let dt = segment / substeps as f64;
    let mut stepper = Stepper::new(&system, config.picture, dt)?;

    let snapshot_index: Vec<usize> = config
        .snapshot_taus
        .iter()
        .map(|&tau| {
            let k = ((tau - tau0) / config.sample_interval).round();
            if k < 0.0 || k as usize > samples {
                Err(Error::InvalidParameter(format!("snapshot tau {tau} outside the run")))
            } else {
                Ok(k as usize)
            }
        })
        .collect::<Result<_>>()?;

    let mut state = initial_state(size, params.alpha)?;
    let mut traj = Trajectory {
        params: *params,
        order,
        dt,
        taus: Vec::with_capacity(samples + 1),
        norms: Vec::with_capacity(samples + 1),
        energies: Vec::with_capacity(samples + 1),
        populations: Vec::with_capacity(samples + 1),
        snapshots: Vec::new(),
        final_state: state.clone(),
        ladder: system.ladder.clone(),
        max_norm_drift: 0.0,
    };

    for k in 0..=samples {
        if k > 0 {
            stepper.advance(&mut state, &system, substeps);
            // pin the clock to the grid instead of accumulating rounding
            state.t = (tau0 + k as f64 * config.sample_interval) / sqrt_alpha;
        }
        let tau = tau0 + k as f64 * config.sample_interval;
        let populations = state.populations();
        let norm: f64 = populations.iter().sum();
        let mean_energy = state.mean_energy(&system.ladder);
        let drift = (norm - 1.0).abs();
        traj.max_norm_drift = traj.max_norm_drift.max(drift);
        if !(drift <= config.norm_drift_budget) {
            return Err(Error::NormDrift { drift, budget: config.norm_drift_budget, tau });
        }
        let top: f64 = populations.iter().rev().take(3).sum();
        if top > config.truncation_limit {
            return Err(Error::BasisTruncation { population: top, limit: config.truncation_limit, tau });
        }
        sink(&Sample { tau, populations: &populations, mean_energy, norm });
        if snapshot_index.contains(&k) {
            traj.snapshots.push(Snapshot { tau, state: state.clone() });
        }
        traj.taus.push(tau);
        traj.norms.push(norm);
        traj.energies.push(mean_energy);
        traj.populations.push(populations);
    }
    traj.final_state = state;
    Ok(traj)
}
