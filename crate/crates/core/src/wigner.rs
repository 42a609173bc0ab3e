//! Wigner quasi-probability of a state given in the oscillator number basis.
//!
//! The production path sums the closed-form cross-Wigner functions of
//! harmonic-oscillator eigenstates,
//!
//! ```text
//! W_{m,m+k}(x, p) = (-1)^m / pi * sqrt(m! / (m+k)!) * (sqrt(2) (x - i p))^k
//!                   * exp(-(x^2 + p^2)) * L_m^(k)(2 (x^2 + p^2))
//! ```
//!
//! with the Laguerre factor carried in a normalized, log-scaled upward
//! recurrence so that high levels neither overflow nor underflow. The
//! direct-integral oracle builds `psi(x)` from Hermite functions and
//! integrates `(1/pi) int psi*(x+s) psi(x-s) exp(2ips) ds` adaptively.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::StateVector;

/// Largest allowed fraction of the state outside the grid.
pub const GRID_MASS_LIMIT: f64 = 0.05;

/// Amplitudes below this magnitude are dropped from the pair sum.
const AMPLITUDE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nx: usize,
    pub np: usize,
}

pub const MIN_GRID_POINTS: usize = 32;

impl PhaseSpaceGrid {
    pub fn new(x_min: f64, x_max: f64, p_min: f64, p_max: f64, nx: usize, np: usize) -> Result<Self> {
        if nx < MIN_GRID_POINTS || np < MIN_GRID_POINTS {
            return Err(Error::InvalidParameter(format!("grid needs at least {MIN_GRID_POINTS} points per axis")));
        }
        if !(x_max > x_min) || !(p_max > p_min) {
            return Err(Error::InvalidParameter("grid extents must be increasing".into()));
        }
        Ok(Self { x_min, x_max, p_min, p_max, nx, np })
    }

    /// `[-half, half]^2` with `n` points per axis.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::new(-half, half, -half, half, n, n)
    }

    /// Default extent `L = sqrt(2 n_occ) + 3`, where `n_occ` is the highest
    /// level holding more than `1e-3` of the population.
    pub fn for_state(state: &StateVector, n: usize) -> Result<Self> {
        let n_occ = state.amps.iter().rposition(|c| c.norm_sqr() > 1e-3).unwrap_or(0);
        Self::square((2.0 * n_occ as f64).sqrt() + 3.0, n)
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ps(&self) -> Vec<f64> {
        (0..self.np).map(|j| self.p(j)).collect()
    }
}

/// Samples `W(x_i, p_j)`, stored row-major with rows indexed by `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerField {
    pub grid: PhaseSpaceGrid,
    pub values: Vec<f64>,
}

impl WignerField {
    pub fn at(&self, ix: usize, ip: usize) -> f64 {
        self.values[ip * self.grid.nx + ix]
    }

    pub fn row(&self, ip: usize) -> &[f64] {
        &self.values[ip * self.grid.nx..(ip + 1) * self.grid.nx]
    }

    /// Riemann sum of `W` over the grid.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx() * self.grid.dp()
    }

    /// `2 pi sum W^2 dx dp`; one for a pure state.
    pub fn purity(&self) -> f64 {
        2.0 * PI * self.values.iter().map(|w| w * w).sum::<f64>() * self.grid.dx() * self.grid.dp()
    }

    /// `sum_j W(x_i, p_j) dp`, the position density.
    pub fn x_marginal(&self) -> Vec<f64> {
        let dp = self.grid.dp();
        (0..self.grid.nx).map(|i| (0..self.grid.np).map(|j| self.at(i, j)).sum::<f64>() * dp).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, w| m.max(w.abs()))
    }
}

/// Closed-form evaluator for one state; holds the pair coefficients and
/// recurrence tables so repeated point evaluations are cheap.
#[derive(Debug, Clone)]
pub struct LaguerreWigner {
    size: usize,
    /// `coef[k][m] = w_k (-1)^m conj(c_m) c_{m+k} / pi`, `w_0 = 1`, `w_k = 2`.
    coef: Vec<Vec<C64>>,
    sqrt_int: Vec<f64>,
    ln_factorial: Vec<f64>,
}

impl LaguerreWigner {
    pub fn new(state: &StateVector) -> Self {
        let size = state.amps.iter().rposition(|c| c.norm() > AMPLITUDE_FLOOR).map_or(1, |n| n + 1);
        let c = &state.amps[..size];
        let coef = (0..size)
            .map(|k| {
                let w = if k == 0 { 1.0 } else { 2.0 } / PI;
                (0..size - k)
                    .map(|m| {
                        let sign = if m % 2 == 0 { w } else { -w };
                        c[m].conj() * c[m + k] * sign
                    })
                    .collect()
            })
            .collect();
        let sqrt_int = (0..=2 * size + 1).map(|j| (j as f64).sqrt()).collect();
        let mut ln_factorial = vec![0.0; size + 1];
        for j in 1..=size {
            ln_factorial[j] = ln_factorial[j - 1] + (j as f64).ln();
        }
        Self { size, coef, sqrt_int, ln_factorial }
    }

    pub fn eval(&self, x: f64, p: f64) -> f64 {
        const BIG: f64 = 1e150;
        let r2 = x * x + p * p;
        let u = 2.0 * r2;
        let ln_u = u.ln();
        // exp(-i theta) with x - i p = r exp(-i theta)
        let r = r2.sqrt();
        let rot = if r > 0.0 { C64::new(x / r, -p / r) } else { C64::new(1.0, 0.0) };
        let s = &self.sqrt_int;
        let mut total = 0.0;
        let mut phase = C64::new(1.0, 0.0);
        for k in 0..self.size {
            if k > 0 {
                phase *= rot;
            }
            if u == 0.0 && k > 0 {
                // u^{k/2} vanishes at the origin
                continue;
            }
            let coef = &self.coef[k];
            let kf = k as f64;
            // l_0^{(k)} = u^{k/2} exp(-u/2) / sqrt(k!), kept as mantissa * exp(scale)
            let mut scale = if k == 0 { -0.5 * u } else { 0.5 * kf * ln_u - 0.5 * u - 0.5 * self.ln_factorial[k] };
            let mut factor = scale.exp();
            let (mut prev, mut cur) = (0.0_f64, 1.0_f64);
            let mut acc = C64::new(0.0, 0.0);
            for (m, &cm) in coef.iter().enumerate() {
                if factor != 0.0 {
                    acc += cm * (cur * factor);
                }
                if m + 1 == coef.len() {
                    break;
                }
                // l_{m+1} = [(2m + 1 + k - u) l_m - sqrt(m (m+k)) l_{m-1}] / sqrt((m+1)(m+k+1))
                let mf = m as f64;
                let next = ((2.0 * mf + 1.0 + kf - u) * cur - s[m] * s[m + k] * prev) / (s[m + 1] * s[m + k + 1]);
                prev = cur;
                cur = next;
                if cur.abs() > BIG {
                    prev /= BIG;
                    cur /= BIG;
                    scale += BIG.ln();
                    factor = scale.exp();
                }
            }
            total += (acc * phase).re;
        }
        total
    }
}

fn check_mass(field: &WignerField) -> Result<()> {
    let mass = field.mass();
    if 1.0 - mass > GRID_MASS_LIMIT {
        return Err(Error::GridMass { mass, limit: GRID_MASS_LIMIT });
    }
    Ok(())
}

/// Wigner function on `grid` by the closed-form Laguerre pair sum.
///
/// Fails when the grid's Riemann mass falls short of one by more than
/// [`GRID_MASS_LIMIT`].
pub fn wigner_from_state(state: &StateVector, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    let w = LaguerreWigner::new(state);
    let mut values = Vec::with_capacity(grid.nx * grid.np);
    for j in 0..grid.np {
        let p = grid.p(j);
        values.extend((0..grid.nx).map(|i| w.eval(grid.x(i), p)));
    }
    let field = WignerField { grid: *grid, values };
    check_mass(&field)?;
    Ok(field)
}

/// Normalized Hermite functions `phi_0(y) .. phi_{n-1}(y)`.
pub fn hermite_functions(n: usize, y: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(PI.powf(-0.25) * (-0.5 * y * y).exp());
    if n > 1 {
        out.push(std::f64::consts::SQRT_2 * y * out[0]);
    }
    for j in 1..n.saturating_sub(1) {
        let jf = j as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * y * out[j] - (jf / (jf + 1.0)).sqrt() * out[j - 1];
        out.push(next);
    }
    out
}

/// `psi(y) = sum_n c_n phi_n(y)`.
pub fn wavefunction(state: &StateVector, y: f64) -> C64 {
    hermite_functions(state.len(), y).iter().zip(&state.amps).map(|(h, c)| c * h).sum()
}

// Gauss-Kronrod 7/15 nodes and weights.
const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G_WEIGHTS: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gauss_kronrod<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * K_WEIGHTS[7];
    let mut gauss = fc * G_WEIGHTS[3];
    for i in 0..7 {
        let d = h * GK_NODES[i];
        let pair = f(c - d) + f(c + d);
        kronrod += pair * K_WEIGHTS[i];
        if i % 2 == 1 {
            gauss += pair * G_WEIGHTS[i / 2];
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).norm())
}

/// Adaptive Gauss-Kronrod integral of a complex integrand over `[a, b]`.
pub fn integrate<F: Fn(f64) -> C64>(f: F, a: f64, b: f64, panels: usize, tol: f64) -> Option<C64> {
    const MAX_DEPTH: u32 = 30;
    let mut stack: Vec<(f64, f64, u32)> = Vec::new();
    let width = (b - a) / panels as f64;
    for i in (0..panels).rev() {
        stack.push((a + i as f64 * width, a + (i + 1) as f64 * width, 0));
    }
    let per_unit = tol / (b - a);
    let mut total = C64::new(0.0, 0.0);
    while let Some((lo, hi, depth)) = stack.pop() {
        let (value, err) = gauss_kronrod(&f, lo, hi);
        if err <= per_unit * (hi - lo) || err < 1e-15 * value.norm() {
            total += value;
        } else if depth >= MAX_DEPTH {
            return None;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Some(total)
}

/// `(1/pi) int psi*(x+s) psi(x-s) exp(2ips) ds`, complex so that the
/// vanishing imaginary part can be checked.
pub fn direct_wigner_point(state: &StateVector, x: f64, p: f64) -> Result<C64> {
    // Hermite functions are negligible beyond the turning point plus a margin
    let reach = (2.0 * state.len() as f64 + 1.0).sqrt() + 9.0;
    let (a, b) = (-reach - x.abs(), reach + x.abs());
    let integrand = |s: f64| {
        let left = wavefunction(state, x + s).conj();
        let right = wavefunction(state, x - s);
        left * right * C64::from_polar(1.0, 2.0 * p * s)
    };
    let panels = (((b - a) * (1.0 + p.abs())) as usize).max(16);
    integrate(integrand, a, b, panels, 1e-12).map(|v| v / PI).ok_or(Error::Quadrature { x, p })
}

/// Wigner function by direct quadrature of the defining integral. Slow;
/// intended as an independent check for small bases.
pub fn direct_wigner_oracle(state: &StateVector, grid: &PhaseSpaceGrid) -> Result<WignerField> {
    let mut values = Vec::with_capacity(grid.nx * grid.np);
    for j in 0..grid.np {
        for i in 0..grid.nx {
            values.push(direct_wigner_point(state, grid.x(i), grid.p(j))?.re);
        }
    }
    Ok(WignerField { grid: *grid, values })
}

/// Angular average of `W` on a circle of radius `r`, which keeps only the
/// diagonal `|c_n|^2 W_nn` terms.
pub fn radial_profile(state: &StateVector, radii: &[f64]) -> Vec<f64> {
    let pops: Vec<f64> = state.populations();
    let diag = StateVector { amps: pops.iter().map(|p| C64::new(p.sqrt(), 0.0)).collect(), t: state.t };
    // cross terms vanish under the angular average, so evaluate the diagonal
    // part alone along one ray
    let mut w = LaguerreWigner::new(&diag);
    for row in w.coef.iter_mut().skip(1) {
        row.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
    }
    radii.iter().map(|&r| w.eval(r, 0.0)).collect()
}
