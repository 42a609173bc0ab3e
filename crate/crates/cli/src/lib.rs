//! Command implementations behind the `chirp-ladder` binary.

// `!(x > 0.0)` guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use chirp_ladder::export::{
    write_amplitudes_csv, write_capture_curve_csv, write_classical_csv, write_json, write_threshold_csv,
    write_trajectory_csv, write_wigner_csv, RunSummary, ThresholdRow, WignerMeta,
};
use chirp_ladder::{
    bisect_threshold, classical_capture, classical_threshold, ladder_step_times, propagate, smooth, trajectory_capture,
    wigner_from_state, ClassicalConfig, Error, PhaseSpaceGrid, PhysicalParams, ResonanceMode, Trajectory,
    TrajectorySeries, SMOOTHING_WINDOW,
};
use rayon::prelude::*;
use serde::Serialize;

pub use config::{ConfigError, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Model(Error),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Model(e)
    }
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical guards, 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Model(e) if e.is_numerical() => 3,
            CliError::Model(_) => 2,
            CliError::Io(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn create(dir: &Path, name: &str) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_file(
    dir: &Path,
    name: &str,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> CliResult<PathBuf> {
    let mut w = create(dir, name)?;
    f(&mut w)?;
    w.flush()?;
    Ok(dir.join(name))
}

fn prepare_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn run_trajectory(config: &RunConfig, params: &PhysicalParams) -> CliResult<Trajectory> {
    Ok(propagate(params, config.basis.size, config.basis.order, &config.integrator, |_| {})?)
}

fn summarize(config: &RunConfig, traj: &Trajectory) -> CliResult<(RunSummary, Vec<f64>)> {
    let series = TrajectorySeries::from_trajectory(traj);
    let smoothed = smooth(&series, SMOOTHING_WINDOW)?;
    let steps = ladder_step_times(&smoothed, &traj.ladder);
    let capture = trajectory_capture(traj, config.capture)?;
    let summary = RunSummary::new(&traj.params, traj.final_tau(), capture, steps, traj.max_norm_drift);
    Ok((summary, smoothed.energies))
}

fn tau_label(tau: f64) -> String {
    format!("{tau}").replace('-', "m")
}

/// `trajectory.csv`, `summary.json`, `amplitudes_final.csv` and one
/// `amplitudes_tau_<tau>.csv` per requested snapshot.
pub fn cmd_simulate(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    prepare_dir(out)?;
    let traj = run_trajectory(config, &config.params)?;
    let (summary, smoothed) = summarize(config, &traj)?;
    let mut written = vec![
        write_file(out, "trajectory.csv", |w| write_trajectory_csv(w, &traj, &smoothed))?,
        write_file(out, "summary.json", |w| write_json(w, &summary))?,
        write_file(out, "amplitudes_final.csv", |w| write_amplitudes_csv(w, &traj.final_state))?,
    ];
    for snap in &traj.snapshots {
        let name = format!("amplitudes_tau_{}.csv", tau_label(snap.tau));
        written.push(write_file(out, &name, |w| write_amplitudes_csv(w, &snap.state))?);
    }
    Ok(written)
}

/// `wigner.csv` (rows = p) and `wigner.json` at the configured snapshot time.
pub fn cmd_wigner(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let tau = config.wigner.tau.unwrap_or(config.integrator.tau_end);
    if !(-10.0..=config.integrator.tau_end).contains(&tau) {
        return Err(CliError::Usage(format!(
            "snapshot tau {tau} is outside the run [-10, {}]",
            config.integrator.tau_end
        )));
    }
    prepare_dir(out)?;
    let mut run = config.clone();
    run.integrator.snapshot_taus = vec![tau];
    let traj = run_trajectory(&run, &run.params)?;
    let snap = traj.snapshot_at(tau).ok_or_else(|| CliError::Usage(format!("no snapshot recorded at tau {tau}")))?;
    let grid = match config.wigner.half_width {
        Some(l) => PhaseSpaceGrid::square(l, config.wigner.points)?,
        None => PhaseSpaceGrid::for_state(&snap.state, config.wigner.points)?,
    };
    let field = wigner_from_state(&snap.state, &grid)?;
    let meta = WignerMeta::new(&field, snap.tau);
    Ok(vec![
        write_file(out, "wigner.csv", |w| write_wigner_csv(w, &field))?,
        write_file(out, "wigner.json", |w| write_json(w, &meta))?,
    ])
}

fn curve_name(p2: f64) -> String {
    format!("capture_curve_p2_{p2}.csv")
}

/// `threshold.csv` plus one capture-curve CSV per successful column. Failed
/// columns are recorded and the scan continues.
pub fn cmd_threshold(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let columns = &config.threshold.p2;
    if columns.is_empty() {
        return Err(CliError::Usage("threshold needs a non-empty threshold.p2 list".into()));
    }
    if let Some(bad) = columns.iter().find(|p| !(**p > 0.0)) {
        return Err(CliError::Usage(format!("P2 values must be > 0, got {bad}")));
    }
    prepare_dir(out)?;
    let scan = &config.threshold.scan;
    let results: Vec<_> = columns.par_iter().map(|&p2| bisect_threshold(p2, scan)).collect();
    let rows: Vec<ThresholdRow> =
        columns.iter().zip(&results).map(|(&p2, r)| ThresholdRow::from_result(p2, r)).collect();
    let mut written = vec![write_file(out, "threshold.csv", |w| write_threshold_csv(w, &rows))?];
    for (p2, result) in columns.iter().zip(&results) {
        if let Ok(point) = result {
            written.push(write_file(out, &curve_name(*p2), |w| write_capture_curve_csv(w, &point.capture_curve))?);
        }
    }
    written.push(write_file(out, "threshold.json", |w| write_json(w, &rows))?);
    Ok(written)
}

#[derive(Debug, Serialize)]
struct IsomorphismOutput {
    capture_sh: f64,
    capture_effective: f64,
    delta: f64,
}

/// Runs the subharmonic configuration and its effective fundamental twin;
/// writes both summaries and the pair.
pub fn cmd_isomorphism(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    if config.params.mode != ResonanceMode::Subharmonic2 {
        return Err(CliError::Usage(format!("isomorphism needs mode = subharmonic2, got {:?}", config.params.mode)));
    }
    prepare_dir(out)?;
    let sh = run_trajectory(config, &config.params)?;
    let twin = run_trajectory(config, &config.params.effective_twin())?;
    let (sh_summary, _) = summarize(config, &sh)?;
    let (twin_summary, _) = summarize(config, &twin)?;
    let pair = IsomorphismOutput {
        capture_sh: sh_summary.capture_probability,
        capture_effective: twin_summary.capture_probability,
        delta: twin_summary.capture_probability - sh_summary.capture_probability,
    };
    Ok(vec![
        write_file(out, "summary_subharmonic.json", |w| write_json(w, &sh_summary))?,
        write_file(out, "summary_effective.json", |w| write_json(w, &twin_summary))?,
        write_file(out, "isomorphism.json", |w| write_json(w, &pair))?,
    ])
}

#[derive(Debug, Serialize)]
struct ClassicalSummary {
    captured: bool,
    diverged: bool,
    final_smoothed_energy: f64,
    capture_energy: f64,
}

/// Classical trace for the configured parameters, plus a classical
/// threshold map when `classical.p2` is non-empty.
pub fn cmd_classical(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    prepare_dir(out)?;
    let mut cc = ClassicalConfig::new(config.integrator.tau_end);
    cc.dt = config.classical.dt;
    cc.sample_interval = config.integrator.sample_interval;
    let run = classical_capture(&config.params, &cc)?;
    let summary = ClassicalSummary {
        captured: run.captured,
        diverged: run.diverged,
        final_smoothed_energy: run.final_smoothed(),
        capture_energy: run.capture_energy,
    };
    let mut written = vec![
        write_file(out, "classical_trace.csv", |w| write_classical_csv(w, &run))?,
        write_file(out, "classical_summary.json", |w| write_json(w, &summary))?,
    ];
    let columns = &config.classical.p2;
    if !columns.is_empty() {
        let results: Vec<_> = columns.par_iter().map(|&p2| classical_threshold(p2, &config.classical.scan)).collect();
        let rows: Vec<ThresholdRow> =
            columns.iter().zip(&results).map(|(&p2, r)| ThresholdRow::from_result(p2, r)).collect();
        written.push(write_file(out, "classical_threshold.csv", |w| write_threshold_csv(w, &rows))?);
    }
    Ok(written)
}
