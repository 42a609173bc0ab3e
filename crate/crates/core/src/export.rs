//! Deterministic CSV and JSON writers. Floats in CSV files use 17
//! significant digits so that every value round-trips exactly.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::classical::ClassicalRun;
use crate::model::{dimensionless, PhysicalParams};
use crate::propagator::{StateVector, Trajectory};
use crate::threshold::{theory_threshold, ThresholdPoint};
use crate::wigner::{PhaseSpaceGrid, WignerField};

/// `v` with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_row<W: Write>(w: &mut W, cells: impl IntoIterator<Item = String>) -> io::Result<()> {
    let line = cells.into_iter().collect::<Vec<_>>().join(",");
    writeln!(w, "{line}")
}

/// Columns `tau, norm, mean_energy, smoothed_energy, p_0 .. p_{N-1}`.
#[allow(clippy::needless_range_loop)]
pub fn write_trajectory_csv<W: Write>(w: &mut W, traj: &Trajectory, smoothed_energy: &[f64]) -> io::Result<()> {
    let n = traj.final_state.len();
    let header = ["tau", "norm", "mean_energy", "smoothed_energy"].into_iter().map(String::from);
    write_row(w, header.chain((0..n).map(|k| format!("p_{k}"))))?;
    for i in 0..traj.taus.len() {
        let lead = [traj.taus[i], traj.norms[i], traj.energies[i], smoothed_energy[i]];
        write_row(w, lead.iter().chain(&traj.populations[i]).map(|&v| fmt_f64(v)))?;
    }
    Ok(())
}

/// Columns `n, re, im`.
pub fn write_amplitudes_csv<W: Write>(w: &mut W, state: &StateVector) -> io::Result<()> {
    writeln!(w, "n,re,im")?;
    for (n, c) in state.amps.iter().enumerate() {
        writeln!(w, "{n},{},{}", fmt_f64(c.re), fmt_f64(c.im))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub params: PhysicalParams,
    #[serde(rename = "P1")]
    pub p1: f64,
    #[serde(rename = "P2")]
    pub p2: f64,
    #[serde(rename = "P1_tilde")]
    pub p1_tilde: f64,
    pub tau_f: f64,
    pub capture_probability: f64,
    pub step_times: Vec<f64>,
    pub max_norm_drift: f64,
}

impl RunSummary {
    pub fn new(
        params: &PhysicalParams,
        tau_f: f64,
        capture_probability: f64,
        step_times: Vec<f64>,
        max_norm_drift: f64,
    ) -> Self {
        let d = dimensionless(params);
        Self {
            params: *params,
            p1: d.p1,
            p2: d.p2,
            p1_tilde: d.p1_tilde,
            tau_f,
            capture_probability,
            step_times,
            max_norm_drift,
        }
    }
}

pub fn write_json<W: Write, T: Serialize>(w: &mut W, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
    writeln!(w)
}

/// Matrix with one row per `p` sample and one column per `x` sample.
pub fn write_wigner_csv<W: Write>(w: &mut W, field: &WignerField) -> io::Result<()> {
    for j in 0..field.grid.np {
        write_row(w, field.row(j).iter().map(|&v| fmt_f64(v)))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerMeta {
    pub grid: PhaseSpaceGrid,
    pub tau: f64,
    pub mass: f64,
    pub purity: f64,
    pub min: f64,
    pub max: f64,
}

impl WignerMeta {
    pub fn new(field: &WignerField, tau: f64) -> Self {
        let (min, max) =
            field.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        Self { grid: field.grid, tau, mass: field.mass(), purity: field.purity(), min, max }
    }
}

/// One row of the threshold map; `p1_tilde_cr` is `None` when the column failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub p2: f64,
    pub p1_tilde_cr: Option<f64>,
    pub regime: Option<String>,
    pub error: Option<String>,
}

impl ThresholdRow {
    pub fn from_result(p2: f64, result: &crate::Result<ThresholdPoint>) -> Self {
        match result {
            Ok(pt) => {
                Self { p2, p1_tilde_cr: Some(pt.p1_tilde_cr), regime: Some(pt.regime.as_str().into()), error: None }
            }
            Err(e) => Self { p2, p1_tilde_cr: None, regime: None, error: Some(e.to_string()) },
        }
    }
}

/// Columns `P2, P1_tilde_cr, theory_classical, theory_quantum, regime`.
/// Failed columns leave `P1_tilde_cr` empty and put `error` in the regime cell.
pub fn write_threshold_csv<W: Write>(w: &mut W, rows: &[ThresholdRow]) -> io::Result<()> {
    writeln!(w, "P2,P1_tilde_cr,theory_classical,theory_quantum,regime")?;
    for row in rows {
        let theory = theory_threshold(row.p2).map_err(io::Error::other)?;
        let cr = row.p1_tilde_cr.map(fmt_f64).unwrap_or_default();
        let regime = row.regime.clone().unwrap_or_else(|| "error".into());
        writeln!(w, "{},{cr},{},{},{regime}", fmt_f64(row.p2), fmt_f64(theory.classical), fmt_f64(theory.quantum))?;
    }
    Ok(())
}

/// Columns `P1_tilde, capture` in evaluation order.
pub fn write_capture_curve_csv<W: Write>(w: &mut W, curve: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, "P1_tilde,capture")?;
    for &(x, c) in curve {
        writeln!(w, "{},{}", fmt_f64(x), fmt_f64(c))?;
    }
    Ok(())
}

/// Columns `tau, x, p, energy, smoothed_energy`.
pub fn write_classical_csv<W: Write>(w: &mut W, run: &ClassicalRun) -> io::Result<()> {
    writeln!(w, "tau,x,p,energy,smoothed_energy")?;
    for i in 0..run.taus.len() {
        write_row(w, [run.taus[i], run.xs[i], run.ps[i], run.energies[i], run.smoothed[i]].map(fmt_f64))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64 as C64;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn amplitude_csv_layout() {
        let s = StateVector { amps: vec![C64::new(0.6, 0.0), C64::new(0.0, -0.8)], t: 0.0 };
        let mut buf = Vec::new();
        write_amplitudes_csv(&mut buf, &s).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,re,im");
        assert_eq!(lines.len(), 3);
        let cells: Vec<f64> = lines[2].split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells, vec![1.0, 0.0, -0.8]);
    }

    #[test]
    fn threshold_csv_marks_failures() {
        let rows = [
            ThresholdRow { p2: 1.0, p1_tilde_cr: Some(0.9), regime: Some("classical".into()), error: None },
            ThresholdRow { p2: 2.0, p1_tilde_cr: None, regime: None, error: Some("no bracket".into()) },
        ];
        let mut buf = Vec::new();
        write_threshold_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "P2,P1_tilde_cr,theory_classical,theory_quantum,regime");
        let first: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(first[2].parse::<f64>().unwrap(), 0.82);
        assert_eq!(first[4], "classical");
        assert!(lines[2].contains(",,") && lines[2].ends_with("error"));
    }
}
