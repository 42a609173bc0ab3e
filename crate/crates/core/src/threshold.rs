//! The phase-locking threshold in the `(P1~, P2)` plane.
//!
//! A target `(P1~, P2)` is realized as physical parameters at a chosen
//! `(alpha, lambda)`; the 50% capture point along `P1~` is bracketed by a
//! geometric pre-scan and then bisected.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{anharmonicity, dimensionless, CouplingOrder, PhysicalParams, ResonanceMode};
use crate::observables::{trajectory_capture, CaptureRule};
use crate::propagator::{propagate, DrivenOscillator, IntegratorConfig, Picture};

/// Classical-limit threshold coefficient: `P1~cr = 0.82 / sqrt(P2)`.
pub const CLASSICAL_COEFFICIENT: f64 = 0.82;
/// Quantum-limit threshold: `P1~cr = 0.79`.
pub const QUANTUM_THRESHOLD: f64 = 0.79;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Classical,
    Quantum,
}

impl Regime {
    /// Classical iff `P2 < P1~ + 1`.
    pub fn classify(p1_tilde: f64, p2: f64) -> Self {
        if p2 < p1_tilde + 1.0 {
            Regime::Classical
        } else {
            Regime::Quantum
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Classical => "classical",
            Regime::Quantum => "quantum",
        }
    }
}

/// Inverts the parameter definitions: returns subharmonic parameters with
/// `P2` and `P1~` equal to the targets for the given `alpha` and `lambda`.
pub fn realize_params(p1_tilde: f64, p2: f64, alpha: f64, lambda: f64) -> Result<PhysicalParams> {
    if !(alpha > 0.0) || !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha and lambda must be > 0, got {alpha}, {lambda}")));
    }
    if !(p1_tilde >= 0.0) || !(p2 > 0.0) {
        return Err(Error::InvalidParameter(format!("targets must be positive, got P1~ = {p1_tilde}, P2 = {p2}")));
    }
    let gamma = 0.5 * p2 * alpha.sqrt();
    let beta = (8.0 / 3.0) * (gamma + (5.0 / 12.0) * lambda * lambda);
    let epsilon = (p1_tilde * (2.0 * alpha).sqrt() * 9.0 / (8.0 * lambda)).sqrt();
    if epsilon * lambda >= 1.0 || beta.abs() >= 1.0 {
        return Err(Error::WeakNonlinearity(format!("epsilon * lambda = {}, beta = {beta}", epsilon * lambda)));
    }
    debug_assert!((anharmonicity(beta, lambda) - gamma).abs() <= 1e-12 * gamma.abs().max(1e-300) + 1e-18);
    PhysicalParams::new(alpha, beta, lambda, epsilon, ResonanceMode::Subharmonic2)
}

/// Both theory lines at one `P2`, with the regime each point falls in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryThreshold {
    pub classical: f64,
    pub quantum: f64,
    pub classical_line_regime: Regime,
    pub quantum_line_regime: Regime,
}

impl TheoryThreshold {
    /// The line whose point lies in its own regime; the smaller value in the
    /// narrow band near the separator where neither does.
    pub fn applicable(&self) -> f64 {
        if self.quantum_line_regime == Regime::Quantum {
            self.quantum
        } else if self.classical_line_regime == Regime::Classical {
            self.classical
        } else {
            self.classical.min(self.quantum)
        }
    }
}

pub fn theory_threshold(p2: f64) -> Result<TheoryThreshold> {
    if !(p2 > 0.0) {
        return Err(Error::InvalidParameter(format!("P2 must be > 0, got {p2}")));
    }
    let classical = CLASSICAL_COEFFICIENT / p2.sqrt();
    Ok(TheoryThreshold {
        classical,
        quantum: QUANTUM_THRESHOLD,
        classical_line_regime: Regime::classify(classical, p2),
        quantum_line_regime: Regime::classify(QUANTUM_THRESHOLD, p2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BisectionConfig {
    /// Final bracket width in `P1~`.
    pub tol: f64,
    #[serde(default = "default_prescan_factor")]
    pub prescan_factor: f64,
    #[serde(default = "default_max_prescan")]
    pub max_prescan: usize,
    /// Capture level that defines the threshold.
    #[serde(default = "default_target")]
    pub target: f64,
    /// Margin around `target` within which repeated crossings are
    /// tolerated before the curve is declared non-monotone.
    #[serde(default = "default_slack")]
    pub monotone_slack: f64,
}

fn default_prescan_factor() -> f64 {
    1.5
}
fn default_max_prescan() -> usize {
    16
}
fn default_target() -> f64 {
    0.5
}
fn default_slack() -> f64 {
    0.05
}

impl BisectionConfig {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            prescan_factor: default_prescan_factor(),
            max_prescan: default_max_prescan(),
            target: default_target(),
            monotone_slack: default_slack(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bisection {
    pub value: f64,
    pub bracket: (f64, f64),
    /// Every evaluated `(P1~, capture)` pair, sorted by `P1~`.
    pub curve: Vec<(f64, f64)>,
}

/// Fails when the evaluated points cross the target more than once by more
/// than `slack`: a point at `target + slack` or above lies left of a point at
/// `target - slack` or below. Ripples on one side of the target do not move
/// the crossing and are accepted.
fn check_single_crossing(curve: &[(f64, f64)], target: f64, slack: f64) -> Result<()> {
    let mut sorted = curve.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut high: Option<(f64, f64)> = None;
    for &(x, c) in &sorted {
        if let Some((xh, ch)) = high {
            if c <= target - slack {
                return Err(Error::NonMonotone(format!(
                    "capture {ch:.3} at P1~ = {xh:.4} but {c:.3} at larger P1~ = {x:.4}"
                )));
            }
        }
        if c >= target + slack && high.is_none() {
            high = Some((x, c));
        }
    }
    Ok(())
}

/// Finds where an increasing response `capture(x)` crosses `config.target`,
/// starting the geometric pre-scan from `start`.
pub fn bisect_response<F>(start: f64, config: &BisectionConfig, mut capture: F) -> Result<Bisection>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(start > 0.0) || !(config.prescan_factor > 1.0) || !(config.tol > 0.0) {
        return Err(Error::InvalidParameter("bisection needs start > 0, factor > 1 and tol > 0".into()));
    }
    let target = config.target;
    let mut curve = Vec::new();
    let mut eval = |x: f64, curve: &mut Vec<(f64, f64)>| -> Result<f64> {
        let c = capture(x)?;
        curve.push((x, c));
        check_single_crossing(curve, target, config.monotone_slack)?;
        Ok(c)
    };

    let c0 = eval(start, &mut curve)?;
    let (mut lo, mut hi) = (start, start);
    let mut bracketed = false;
    for _ in 0..config.max_prescan {
        if c0 < target {
            let x = hi * config.prescan_factor;
            let c = eval(x, &mut curve)?;
            (lo, hi) = (hi, x);
            if c >= target {
                bracketed = true;
                break;
            }
        } else {
            let x = lo / config.prescan_factor;
            let c = eval(x, &mut curve)?;
            (hi, lo) = (lo, x);
            if c < target {
                bracketed = true;
                break;
            }
        }
    }
    if !bracketed {
        return Err(Error::NoBracket(format!(
            "capture stayed on one side of {target} over {} pre-scan points from P1~ = {start}",
            config.max_prescan
        )));
    }

    while hi - lo >= config.tol {
        let mid = 0.5 * (lo + hi);
        if eval(mid, &mut curve)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // bisection alone never sees a relapse, so probe once just above the bracket
    let probe = hi * config.prescan_factor.sqrt();
    if !curve.iter().any(|&(x, _)| x > hi && x <= probe) {
        eval(probe, &mut curve)?;
    }
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(Bisection { value: 0.5 * (lo + hi), bracket: (lo, hi), curve })
}

/// Basis, integrator and capture settings for one propagation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub size: usize,
    #[serde(default = "default_order")]
    pub order: CouplingOrder,
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub rule: CaptureRule,
}

fn default_order() -> CouplingOrder {
    CouplingOrder::Full
}

impl RunSpec {
    pub fn new(size: usize, tau_end: f64) -> Self {
        Self {
            size,
            order: CouplingOrder::Full,
            integrator: IntegratorConfig::new(tau_end),
            rule: CaptureRule::default(),
        }
    }

    /// Propagates `params` and returns the capture probability at the end.
    pub fn capture(&self, params: &PhysicalParams) -> Result<f64> {
        if params.drive_amplitude() == 0.0 {
            // nothing leaves the ground state
            return Ok(0.0);
        }
        let traj = propagate(params, self.size, self.order, &self.integrator, |_| {})?;
        trajectory_capture(&traj, self.rule)
    }
}

/// Settings for a quantum threshold column scan.
///
/// A column at fixed `P2` is realized at one `(alpha, lambda)`; the two
/// dimensionless groups only describe the dynamics once the realized drive
/// is weak, which needs a slow chirp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThresholdScan {
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Cubic coefficient; `None` selects [`locked_lambda`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default = "default_order")]
    pub order: CouplingOrder,
    #[serde(default)]
    pub rule: CaptureRule,
    #[serde(default = "default_picture")]
    pub picture: Picture,
    #[serde(default = "default_norm_budget")]
    pub norm_drift_budget: f64,
    #[serde(default = "default_bisection")]
    pub bisection: BisectionConfig,
    /// Largest basis tried when a run reports truncation.
    #[serde(default = "default_max_basis")]
    pub max_basis: usize,
}

/// Chirp rate used to realize threshold columns.
pub const SCAN_ALPHA: f64 = 1e-6;

/// Upper bound on `lambda * sqrt(2 E_ar)`, the cubic correction at the
/// amplitude of the locked solution.
pub const LOCKED_CUBIC_LIMIT: f64 = 0.25;

/// Largest cubic coefficient at most 0.05 that keeps the locked solution
/// weakly nonlinear up to `tau_end`.
pub fn locked_lambda(p2: f64, tau_end: f64) -> f64 {
    let amplitude = (2.0 * tau_end / p2).sqrt();
    (LOCKED_CUBIC_LIMIT / amplitude).min(0.05)
}

fn default_alpha() -> f64 {
    SCAN_ALPHA
}
fn default_picture() -> Picture {
    Picture::Interaction
}
fn default_norm_budget() -> f64 {
    1e-6
}
fn default_bisection() -> BisectionConfig {
    BisectionConfig::new(0.05)
}
fn default_max_basis() -> usize {
    400
}

impl Default for ThresholdScan {
    fn default() -> Self {
        Self {
            alpha: default_alpha(),
            lambda: None,
            order: default_order(),
            rule: CaptureRule::default(),
            picture: default_picture(),
            norm_drift_budget: default_norm_budget(),
            bisection: default_bisection(),
            max_basis: default_max_basis(),
        }
    }
}

/// Measurement time for threshold runs: at least three rungs or the
/// classical locking transient must have completed.
pub fn threshold_tau_end(p2: f64) -> f64 {
    (3.0 * p2).max(10.0)
}

/// Initial basis size for a run that should reach ladder level `tau / P2`;
/// truncated runs are retried in a larger basis.
pub fn basis_for(p2: f64, tau_end: f64) -> usize {
    let nbar = tau_end / p2;
    ((1.25 * nbar).ceil() as usize + 30).max(40)
}

impl ThresholdScan {
    pub fn run_spec(&self, p2: f64) -> RunSpec {
        let tau_end = threshold_tau_end(p2);
        let mut integrator = IntegratorConfig::new(tau_end).with_picture(self.picture);
        integrator.norm_drift_budget = self.norm_drift_budget;
        RunSpec { size: basis_for(p2, tau_end), order: self.order, integrator, rule: self.rule }
    }

    pub fn lambda_for(&self, p2: f64) -> f64 {
        self.lambda.unwrap_or_else(|| locked_lambda(p2, threshold_tau_end(p2)))
    }

    pub fn realize(&self, p1_tilde: f64, p2: f64) -> Result<PhysicalParams> {
        realize_params(p1_tilde, p2, self.alpha, self.lambda_for(p2))
    }

    /// Capture at one `(P1~, P2)` point, growing the basis on truncation and
    /// halving the step (at most twice) when the norm guard trips.
    pub fn capture_at(&self, p1_tilde: f64, p2: f64) -> Result<f64> {
        let params = self.realize(p1_tilde, p2)?;
        let mut spec = self.run_spec(p2);
        let mut refinements = 0;
        loop {
            match spec.capture(&params) {
                Err(Error::BasisTruncation { .. }) if spec.size < self.max_basis => {
                    spec.size = (spec.size * 3 / 2).min(self.max_basis);
                }
                Err(Error::NormDrift { .. }) if refinements < 2 => {
                    let dt = match spec.integrator.dt {
                        Some(dt) => dt,
                        None => {
                            DrivenOscillator::new(&params, spec.size, spec.order)?.default_dt(spec.integrator.picture)
                        }
                    };
                    spec.integrator.dt = Some(dt / 2.0);
                    refinements += 1;
                }
                other => return other,
            }
        }
    }
}

/// Bisected threshold of one `P2` column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdPoint {
    pub p2: f64,
    pub p1_tilde_cr: f64,
    pub capture_curve: Vec<(f64, f64)>,
    pub regime: Regime,
}

pub fn bisect_threshold(p2: f64, scan: &ThresholdScan) -> Result<ThresholdPoint> {
    let theory = theory_threshold(p2)?;
    let b = bisect_response(theory.applicable(), &scan.bisection, |x| scan.capture_at(x, p2))?;
    Ok(ThresholdPoint { p2, p1_tilde_cr: b.value, regime: Regime::classify(b.value, p2), capture_curve: b.curve })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsomorphismReport {
    pub capture_sh: f64,
    pub capture_effective: f64,
    /// `capture_effective - capture_sh`.
    pub delta: f64,
}

/// Runs a subharmonic problem and its fundamental twin with drive
/// `(8/9) epsilon^2 lambda` under the same run settings.
pub fn isomorphism_check(params: &PhysicalParams, run: &RunSpec) -> Result<IsomorphismReport> {
    if params.mode != ResonanceMode::Subharmonic2 {
        return Err(Error::InvalidParameter(format!(
            "isomorphism check needs a subharmonic run, got {:?}",
            params.mode
        )));
    }
    let capture_sh = run.capture(params)?;
    let capture_effective = run.capture(&params.effective_twin())?;
    Ok(IsomorphismReport { capture_sh, capture_effective, delta: capture_effective - capture_sh })
}

/// `P1~` and `P2` of a parameter set, the coordinates of the threshold map.
pub fn map_coordinates(params: &PhysicalParams) -> (f64, f64) {
    let d = dimensionless(params);
    (d.p1_tilde, d.p2)
}
