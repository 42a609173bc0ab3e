//! Reductions of sampled trajectories: boxcar smoothing, capture
//! probability and ladder step times.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::EnergyLadder;
use crate::propagator::{StateVector, Trajectory};

/// Width of the slow-time average that removes the fast Rabi ripple.
pub const SMOOTHING_WINDOW: f64 = 0.1;

/// Minimum slow-time spacing between consecutive risers for a response to
/// count as a staircase.
pub const MIN_STEP_SPACING: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySeries {
    pub taus: Vec<f64>,
    pub energies: Vec<f64>,
    pub populations: Vec<Vec<f64>>,
}

impl TrajectorySeries {
    pub fn new(taus: Vec<f64>, energies: Vec<f64>, populations: Vec<Vec<f64>>) -> Result<Self> {
        if taus.len() != energies.len() || (!populations.is_empty() && populations.len() != taus.len()) {
            return Err(Error::InvalidParameter("series columns differ in length".into()));
        }
        if taus.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("taus must be strictly increasing".into()));
        }
        Ok(Self { taus, energies, populations })
    }

    pub fn from_trajectory(traj: &Trajectory) -> Self {
        Self { taus: traj.taus.clone(), energies: traj.energies.clone(), populations: traj.populations.clone() }
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    fn min_spacing(&self) -> f64 {
        self.taus.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }
}

/// Centered boxcar average of the piecewise-linear interpolant of `values`.
///
/// Each output is the exact mean over `[tau - w/2, tau + w/2]` clipped to the
/// series range, so the window shrinks to one side at the ends.
pub fn boxcar(taus: &[f64], values: &[f64], window: f64) -> Vec<f64> {
    let n = taus.len();
    if n < 2 {
        return values.to_vec();
    }
    let mut cumulative = Vec::with_capacity(n);
    cumulative.push(0.0);
    for i in 1..n {
        let h = taus[i] - taus[i - 1];
        cumulative.push(cumulative[i - 1] + 0.5 * h * (values[i] + values[i - 1]));
    }
    let integral = |x: f64| -> f64 {
        let j = match taus.partition_point(|&t| t <= x) {
            0 => 0,
            j if j >= n => n - 2,
            j => j - 1,
        };
        let h = taus[j + 1] - taus[j];
        let slope = (values[j + 1] - values[j]) / h;
        let dx = x - taus[j];
        cumulative[j] + dx * (values[j] + 0.5 * slope * dx)
    };
    let (lo, hi) = (taus[0], taus[n - 1]);
    taus.iter()
        .map(|&t| {
            let a = (t - 0.5 * window).max(lo);
            let b = (t + 0.5 * window).min(hi);
            (integral(b) - integral(a)) / (b - a)
        })
        .collect()
}

/// Boxcar-smooths energies and populations over `window` of slow time.
pub fn smooth(series: &TrajectorySeries, window: f64) -> Result<TrajectorySeries> {
    if series.len() >= 2 && !(window >= 2.0 * series.min_spacing() * (1.0 - 1e-9)) {
        return Err(Error::InvalidParameter(format!(
            "smoothing window {window} must cover at least two sample intervals"
        )));
    }
    let energies = boxcar(&series.taus, &series.energies, window);
    let populations = if series.populations.is_empty() {
        Vec::new()
    } else {
        let levels = series.populations[0].len();
        let columns: Vec<Vec<f64>> = (0..levels)
            .map(|n| {
                let col: Vec<f64> = series.populations.iter().map(|row| row[n]).collect();
                boxcar(&series.taus, &col, window)
            })
            .collect();
        (0..series.len()).map(|i| columns.iter().map(|c| c[i]).collect()).collect()
    };
    Ok(TrajectorySeries { taus: series.taus.clone(), energies, populations })
}

/// Which levels count as captured into the climbing wave packet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CaptureRule {
    /// `n >= max(1, ceil(nbar / 2))` with `nbar = tau_f / P2` the ideal
    /// ladder level at the measurement time.
    #[default]
    HalfLadder,
    /// `n >= max(1, ceil(fraction * nbar))`.
    LadderFraction { fraction: f64 },
    /// `n >= level`.
    FixedCutoff { level: usize },
}

impl CaptureRule {
    pub fn cutoff(&self, tau_f: f64, p2: f64) -> usize {
        let nbar = tau_f / p2;
        match *self {
            CaptureRule::HalfLadder => ((0.5 * nbar).ceil() as usize).max(1),
            CaptureRule::LadderFraction { fraction } => ((fraction * nbar).ceil() as usize).max(1),
            CaptureRule::FixedCutoff { level } => level,
        }
    }
}

/// Total population of the levels at or above the rule's cutoff.
pub fn capture_probability(state: &StateVector, tau_f: f64, p2: f64, rule: CaptureRule) -> Result<f64> {
    if !(tau_f > 0.0) {
        return Err(Error::InvalidParameter(format!("capture time must be > 0, got {tau_f}")));
    }
    if !(p2 > 0.0) {
        return Err(Error::InvalidParameter(format!("P2 must be > 0, got {p2}")));
    }
    let cut = rule.cutoff(tau_f, p2);
    if cut >= state.len() {
        return Err(Error::BasisTooSmall {
            size: state.len(),
            reason: format!("capture cutoff level {cut} at tau = {tau_f} is outside the basis"),
        });
    }
    let p: f64 = state.amps[cut..].iter().map(|c| c.norm_sqr()).sum();
    Ok(p.clamp(0.0, 1.0))
}

/// Capture probability at the end of a trajectory, averaged over the final
/// [`SMOOTHING_WINDOW`] of slow time.
///
/// The captured population carries fast dressing oscillations whose size
/// grows with the drive; the instantaneous value at `tau_f` is not a
/// slow-time observable.
pub fn trajectory_capture(traj: &Trajectory, rule: CaptureRule) -> Result<f64> {
    windowed_capture(traj, rule, SMOOTHING_WINDOW)
}

/// Mean over `[tau_f - window, tau_f]` of the piecewise-linear captured
/// population, with the cutoff fixed by `tau_f`. A window of zero gives the
/// instantaneous value.
pub fn windowed_capture(traj: &Trajectory, rule: CaptureRule, window: f64) -> Result<f64> {
    let tau_f = traj.final_tau();
    let last = capture_probability(&traj.final_state, tau_f, traj.p2(), rule)?;
    if !(window > 0.0) || traj.taus.len() < 2 {
        return Ok(last);
    }
    let cut = rule.cutoff(tau_f, traj.p2());
    let start = tau_f - window;
    let first = traj.taus.partition_point(|&t| t < start).saturating_sub(1);
    let taus = &traj.taus[first..];
    let captured: Vec<f64> = traj.populations[first..].iter().map(|p| p[cut..].iter().sum()).collect();
    let mut integral = 0.0;
    for i in 1..taus.len() {
        let (a, b) = (taus[i - 1].max(start), taus[i]);
        if b <= a {
            continue;
        }
        let h = taus[i] - taus[i - 1];
        let at = |t: f64| captured[i - 1] + (captured[i] - captured[i - 1]) * (t - taus[i - 1]) / h;
        integral += 0.5 * (b - a) * (at(a) + at(b));
    }
    let span = tau_f - start.max(taus[0]);
    Ok((integral / span).clamp(0.0, 1.0))
}

/// Slow times of the successive risers `n -> n + 1` of a smoothed staircase.
///
/// With populations available, riser `n` is the first time at which half of
/// the population at or above level `n` sits at or above `n + 1`; population
/// left behind on lower rungs does not bias it. Without populations the
/// smoothed energy is compared against the mid-riser `(E_n + E_{n+1}) / 2`.
///
/// Returns an empty list when the response is not a staircase, i.e. when two
/// consecutive risers are closer than [`MIN_STEP_SPACING`].
pub fn ladder_step_times(smoothed: &TrajectorySeries, ladder: &EnergyLadder) -> Vec<f64> {
    let taus = &smoothed.taus;
    let levels = ladder.len();
    // signed distance past the crossing for riser n at sample i
    let margin = |n: usize, i: usize| -> f64 {
        match smoothed.populations.get(i) {
            Some(p) => {
                let above: f64 = p[n + 1..].iter().sum();
                above - 0.5 * (above + p[n])
            }
            None => smoothed.energies[i] - ladder.mid_riser(n),
        }
    };
    let mut times = Vec::new();
    let mut from = 1;
    for n in 0..levels - 1 {
        let hit = (from..taus.len()).find(|&i| margin(n, i - 1) < 0.0 && margin(n, i) >= 0.0);
        let Some(i) = hit else { break };
        let (m0, m1) = (margin(n, i - 1), margin(n, i));
        let frac = -m0 / (m1 - m0);
        times.push(taus[i - 1] + frac * (taus[i] - taus[i - 1]));
        from = i;
    }
    if times.windows(2).any(|w| w[1] - w[0] < MIN_STEP_SPACING) {
        return Vec::new();
    }
    times
}
