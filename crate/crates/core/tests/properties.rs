//! Property tests for the model, propagator, observables and Wigner invariants.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use chirp_ladder::{
    boxcar, build_coupling, build_ladder, capture_probability, dimensionless, direct_wigner_point, drive_phase,
    effective_drive, initial_time, wavefunction, wigner_from_state, CaptureRule, ChirpSchedule, CouplingOrder,
    DrivenOscillator, LaguerreWigner, PhaseSpaceGrid, PhysicalParams, Picture, ResonanceMode, StateVector, Stepper,
};
use common::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn mode() -> impl Strategy<Value = ResonanceMode> {
    prop_oneof![
        Just(ResonanceMode::Fundamental),
        Just(ResonanceMode::Subharmonic2),
        Just(ResonanceMode::EffectiveFundamental)
    ]
}

fn order() -> impl Strategy<Value = CouplingOrder> {
    prop_oneof![Just(CouplingOrder::Linear), Just(CouplingOrder::Full)]
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Evolves `state` for `steps` steps of `dt` under `system`.
fn evolve(system: &DrivenOscillator, state: &StateVector, picture: Picture, dt: f64, steps: usize) -> StateVector {
    let mut s = state.clone();
    Stepper::new(system, picture, dt).unwrap().advance(&mut s, system, steps);
    s
}

fn ladder_system(size: usize) -> DrivenOscillator {
    DrivenOscillator::new(&ladder_params(), size, CouplingOrder::Full).unwrap()
}

proptest! {
    #[test]
    fn coupling_is_symmetric(size in 4usize..60, beta in -0.05..0.05f64, lambda in 0.0..0.1f64, order in order()) {
        let k = build_coupling(size, order, beta, lambda).unwrap();
        for i in 0..size {
            for j in 0..size {
                prop_assert_eq!(k.entry(i, j), k.entry(j, i));
            }
        }
    }

    #[test]
    fn linear_coupling_is_full_without_nonlinearity(size in 4usize..60) {
        let lin = build_coupling(size, CouplingOrder::Linear, 0.0, 0.0).unwrap();
        let full = build_coupling(size, CouplingOrder::Full, 0.0, 0.0).unwrap();
        for i in 0..size {
            for j in 0..size {
                prop_assert_eq!(lin.entry(i, j), full.entry(i, j));
            }
        }
    }

    #[test]
    fn ladder_spacing(beta in -0.05..0.05f64, lambda in 0.0..0.1f64, size in 2usize..300) {
        let ladder = build_ladder(&PhysicalParams::new(1e-4, beta, lambda, 0.1, ResonanceMode::Fundamental).unwrap(), size).unwrap();
        let gamma = ladder.gamma();
        for n in 0..size - 1 {
            let gap = ladder.level(n + 1) - ladder.level(n);
            prop_assert!((gap - (1.0 + 2.0 * gamma * (n + 1) as f64)).abs() <= 1e-12 * ladder.level(n + 1).abs().max(1.0));
        }
    }

    #[test]
    fn twin_drive_reproduces_p1_tilde(alpha in 1e-7..1e-3f64, beta in 0.0..0.05f64, lambda in 0.001..0.1f64, eps in 0.01..2.0f64) {
        let p = PhysicalParams::new(alpha, beta, lambda, eps, ResonanceMode::Subharmonic2).unwrap();
        let twin = dimensionless(&p.with_mode(ResonanceMode::Fundamental).with_epsilon(effective_drive(&p)));
        let original = dimensionless(&p);
        prop_assert!((twin.p1 - original.p1_tilde).abs() <= 1e-14 * original.p1_tilde);
    }

    #[test]
    fn drive_phase_is_the_integrated_frequency(alpha in 1e-7..1e-3f64, mode in mode(), span in 0.0..2.0f64) {
        let t0 = initial_time(alpha);
        let schedule = ChirpSchedule::new(mode, alpha, t0);
        let t = t0 + span * (-t0);
        // composite Simpson over a linear frequency
        let panels = 64;
        let h = (t - t0) / panels as f64;
        let mut sum = schedule.omega(t0) + schedule.omega(t);
        for i in 1..panels {
            sum += if i % 2 == 1 { 4.0 } else { 2.0 } * schedule.omega(t0 + i as f64 * h);
        }
        let quad = sum * h / 3.0;
        let (omega, phase) = drive_phase(&schedule, t);
        prop_assert_eq!(omega, schedule.omega(t));
        prop_assert!((phase - quad).abs() <= 1e-10 * quad.abs().max(1.0));
    }

    #[test]
    fn boxcar_commutes_with_affine_maps(
        values in prop::collection::vec(-10.0..10.0f64, 3..80),
        a in -5.0..5.0f64,
        b in -5.0..5.0f64,
        window in 0.0..3.0f64,
    ) {
        let taus: Vec<f64> = (0..values.len()).map(|i| 0.1 * i as f64).collect();
        let mapped: Vec<f64> = values.iter().map(|v| a * v + b).collect();
        let lhs = boxcar(&taus, &mapped, window);
        let rhs: Vec<f64> = boxcar(&taus, &values, window).iter().map(|v| a * v + b).collect();
        for (l, r) in lhs.iter().zip(&rhs) {
            prop_assert!((l - r).abs() <= 1e-10 * (1.0 + r.abs()));
        }
    }

    #[test]
    fn capture_is_a_probability_and_falls_with_cutoff(levels in 3usize..40, seed in any::<u64>()) {
        let state = random_state(levels, seed);
        let mut previous = 1.0;
        for level in 0..levels {
            let c = capture_probability(&state, 1.0, 1.0, CaptureRule::FixedCutoff { level }).unwrap();
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert!(c <= previous + 1e-15);
            previous = c;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn global_phase_changes_no_population(theta in 0.0..(2.0 * PI), seed in any::<u64>(), picture in prop_oneof![Just(Picture::Schrodinger), Just(Picture::Interaction)]) {
        let system = ladder_system(20);
        let mut start = random_state(20, seed);
        start.t = initial_time(1e-6);
        let rotated = StateVector { amps: start.amps.iter().map(|c| c * C64::from_polar(1.0, theta)).collect(), t: start.t };
        let dt = 0.01;
        let a = evolve(&system, &start, picture, dt, 5_000);
        let b = evolve(&system, &rotated, picture, dt, 5_000);
        for (pa, pb) in a.populations().iter().zip(b.populations()) {
            prop_assert!((pa - pb).abs() < 1e-12);
        }
    }

    #[test]
    fn undriven_run_is_reversible(seed in any::<u64>(), steps in 1_000usize..5_000, picture in prop_oneof![Just(Picture::Schrodinger), Just(Picture::Interaction)]) {
        let free = DrivenOscillator::new(&ladder_params().with_epsilon(0.0), 40, CouplingOrder::Full).unwrap();
        let start = random_state(40, seed);
        // RK4 loses y^6 / 72 of a level's norm per step at y = dt E
        let dt = 0.02 / free.ladder.max_abs();
        let there = evolve(&free, &start, picture, dt, steps);
        let back = evolve(&free, &there, picture, -dt, steps);
        prop_assert!(max_diff(&back.amps, &start.amps) < 1e-8);
    }

    #[test]
    fn pictures_agree(seed in any::<u64>()) {
        let system = ladder_system(30);
        let mut start = random_state(8, seed);
        start.amps.resize(30, C64::new(0.0, 0.0));
        start.t = initial_time(1e-6);
        let a = evolve(&system, &start, Picture::Schrodinger, 0.001, 20_000);
        let b = evolve(&system, &start, Picture::Interaction, 0.001, 20_000);
        prop_assert!(max_diff(&a.amps, &b.amps) < 1e-6);
    }
}

#[test]
fn rk4_converges_at_fourth_order() {
    let system = DrivenOscillator::new(&autoresonance_params(), 12, CouplingOrder::Full).unwrap();
    let mut start = StateVector::ground(12, initial_time(1e-4));
    start.amps[1] = C64::new(0.3, 0.2);
    let start = start.normalized();
    let span = 10.0;
    let run = |steps: usize| evolve(&system, &start, Picture::Schrodinger, span / steps as f64, steps);
    let reference = run(6400);
    let coarse = max_diff(&run(400).amps, &reference.amps);
    let fine = max_diff(&run(800).amps, &reference.amps);
    let order = (coarse / fine).log2();
    assert!((order - 4.0).abs() < 0.3, "observed order {order:.3} ({coarse:.2e} -> {fine:.2e})");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn laguerre_path_matches_the_oracle(seed in any::<u64>(), x in -3.0..3.0f64, p in -3.0..3.0f64) {
        let state = random_state(5, seed);
        let fast = LaguerreWigner::new(&state).eval(x, p);
        let slow = direct_wigner_point(&state, x, p).unwrap();
        prop_assert!((fast - slow.re).abs() < 1e-6);
        prop_assert!(slow.im.abs() < 1e-9);
    }

    #[test]
    fn marginal_and_purity(seed in any::<u64>(), levels in 1usize..=10) {
        let state = random_state(levels, seed);
        let grid = PhaseSpaceGrid::square(7.0, 141).unwrap();
        let field = wigner_from_state(&state, &grid).unwrap();
        for (i, m) in field.x_marginal().iter().enumerate() {
            prop_assert!((m - wavefunction(&state, grid.x(i)).norm_sqr()).abs() < 1e-3);
        }
        prop_assert!((field.purity() - 1.0).abs() < 2e-2);
        prop_assert!((field.mass() - 1.0).abs() < 1e-2);
        prop_assert!(field.max_abs() <= 1.0 / PI + 1e-12);
    }

    #[test]
    fn quarter_period_rotates_phase_space(seed in any::<u64>(), x in -3.0..3.0f64, p in -3.0..3.0f64) {
        // harmonic ladder: E_n = n + 1/2
        let state = random_state(8, seed);
        let rotated = StateVector {
            amps: state.amps.iter().enumerate().map(|(n, c)| c * C64::from_polar(1.0, -(n as f64 + 0.5) * FRAC_PI_2)).collect(),
            t: FRAC_PI_2,
        };
        let w0 = LaguerreWigner::new(&state);
        let wt = LaguerreWigner::new(&rotated);
        prop_assert!((wt.eval(x, p) - w0.eval(-p, x)).abs() < 1e-12);
    }
}
