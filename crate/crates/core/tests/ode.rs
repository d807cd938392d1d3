use std::f64::consts::{PI, TAU};

use entrain::fourier::grid;
use entrain::ode::{
    find_limit_cycle, integrate_final, CycleOptions, HhParameters, HodgkinHuxley, RadialClock,
    VectorField,
};
use entrain::phase::{monodromy, prc_adjoint, prc_projection, PrcOptions};

/// Harmonic oscillator `ẋ = y`, `ẏ = −x + u`.
struct Harmonic;

impl VectorField for Harmonic {
    fn dimension(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64], u: f64, dx: &mut [f64]) {
        dx[0] = x[1];
        dx[1] = -x[0] + u;
    }
}

fn error_at(dt: f64) -> f64 {
    let steps = (TAU / dt).round() as usize;
    let x = integrate_final(&Harmonic, &[1.0, 0.0], |_| 0.0, TAU / steps as f64, steps).unwrap();
    ((x[0] - 1.0).powi(2) + x[1].powi(2)).sqrt()
}

#[test]
fn rk4_converges_at_fourth_order() {
    let (e1, e2) = (error_at(0.1), error_at(0.05));
    let order = (e1 / e2).log2();
    assert!((order - 4.0).abs() < 0.2, "observed order {order}");
}

#[test]
fn forced_harmonic_oscillator_matches_closed_form() {
    // x'' + x = cos(2t), x(0) = 0, x'(0) = 0  =>  x = (cos t − cos 2t)/3
    let dt = 1e-3;
    let steps = 3000;
    let x = integrate_final(&Harmonic, &[0.0, 0.0], |t| (2.0 * t).cos(), dt, steps).unwrap();
    let t = dt * steps as f64;
    assert!((x[0] - (t.cos() - (2.0 * t).cos()) / 3.0).abs() < 1e-10);
}

#[test]
fn radial_clock_cycle_and_multipliers() {
    let lc = find_limit_cycle(&RadialClock, &[0.5, 0.0], &CycleOptions::default()).unwrap();
    assert!((lc.period() - TAU).abs() < 1e-6, "{}", lc.period());
    let m = monodromy(&RadialClock, &lc, 0.0).unwrap();
    assert!((m.unit_multiplier().re - 1.0).abs() < 1e-6);
    // Liouville: det Φ(T) = exp(∮ div f) = exp(−4π) on the unit circle.
    assert!(
        (m.determinant() / (-4.0 * PI).exp() - 1.0).abs() < 1e-5,
        "{}",
        m.determinant()
    );
}

#[test]
fn monodromy_spectrum_does_not_depend_on_start_phase() {
    let lc = find_limit_cycle(&RadialClock, &[0.5, 0.0], &CycleOptions::default()).unwrap();
    let a = monodromy(&RadialClock, &lc, 0.0).unwrap();
    let b = monodromy(&RadialClock, &lc, 2.0).unwrap();
    for (x, y) in a.multipliers.iter().zip(&b.multipliers) {
        assert!((x - y).norm() < 1e-6, "{x} vs {y}");
    }
}

#[test]
fn planar_prc_is_minus_sine_by_both_methods() {
    let lc = find_limit_cycle(&RadialClock, &[0.5, 0.0], &CycleOptions::default()).unwrap();
    let opts = PrcOptions {
        n_phases: 128,
        ..Default::default()
    };
    let proj = prc_projection(&RadialClock, &lc, &opts).unwrap();
    let adj = prc_adjoint(&RadialClock, &lc, &opts).unwrap();
    for m in [proj, adj] {
        let err = grid(2048)
            .map(|t| (m.prc().eval(t) + t.sin()).abs())
            .fold(0.0, f64::max);
        assert!(err < 2e-3, "{err}");
        assert!((m.omega() - 1.0).abs() < 1e-6);
    }
}

#[test]
fn hh_cycle_closes_and_is_step_converged() {
    let hh = HodgkinHuxley::nominal();
    let x0 = HodgkinHuxley::default_initial_state();
    let coarse = find_limit_cycle(
        &hh,
        &x0,
        &CycleOptions {
            dt: 0.002,
            resolution: 512,
            ..Default::default()
        },
    )
    .unwrap();
    let fine = find_limit_cycle(
        &hh,
        &x0,
        &CycleOptions {
            dt: 0.0002,
            resolution: 512,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(
        (coarse.period() - fine.period()).abs() < 1e-6,
        "{} vs {}",
        coarse.period(),
        fine.period()
    );
    assert!(fine.closure_error() < 1e-6, "{}", fine.closure_error());
    assert!(fine.interval_spread() < 1e-6);
}

#[test]
fn hh_period_responds_to_bias_current() {
    let opts = CycleOptions {
        dt: 0.002,
        resolution: 512,
        ..Default::default()
    };
    let x0 = HodgkinHuxley::default_initial_state();
    let nominal = find_limit_cycle(&HodgkinHuxley::nominal(), &x0, &opts)
        .unwrap()
        .period();
    let p = HhParameters::default();
    let hh = HodgkinHuxley::new(HhParameters {
        i_b: p.i_b * 1.02,
        ..p
    })
    .unwrap();
    let driven = find_limit_cycle(&hh, &x0, &opts).unwrap().period();
    assert!(driven < nominal, "{driven} vs {nominal}");
}

#[test]
fn invalid_step_is_rejected() {
    assert!(integrate_final(&Harmonic, &[1.0, 0.0], |_| 0.0, 0.0, 10).is_err());
    assert!(integrate_final(&Harmonic, &[1.0], |_| 0.0, 0.1, 10).is_err());
}
