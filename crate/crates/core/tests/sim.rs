use std::f64::consts::SQRT_2;

use entrain::arnold::{linear_grid, single_tongue};
use entrain::ode::{find_limit_cycle, CycleOptions, RadialClock};
use entrain::phase::{prc_projection, PrcOptions};
use entrain::sim::{
    boundary_jobs, empirical_tongue, integrate_phase, phase_rate_experiment, tongue_sweep,
    BisectionOptions, PhaseLockTest, RateWindow, StateLockTest,
};
use entrain::synthesis::{fast_waveform, min_energy_single};
use entrain::{Execution, FourierSeries, PhaseModel, SubharmonicRatio};

fn sine_model() -> PhaseModel {
    PhaseModel::new(1.0, FourierSeries::sine(1, -1.0)).unwrap()
}

fn one() -> SubharmonicRatio {
    SubharmonicRatio::new(1, 1).unwrap()
}

#[test]
fn phase_integration_is_deterministic() {
    let m = sine_model();
    let w = min_energy_single(&m, one(), 1.01)
        .unwrap()
        .with_rms(0.05)
        .unwrap();
    let a = integrate_phase(&m, &w, 0.2, 100).unwrap();
    let b = integrate_phase(&m, &w, 0.2, 100).unwrap();
    assert_eq!(a, b);
}

#[test]
fn parallel_and_sequential_sweeps_agree_bitwise() {
    let m = sine_model();
    let shape = FourierSeries::cosine(1, SQRT_2);
    let theory = single_tongue(&m, one(), &shape, &linear_grid(1.0, 0.01, 5)).unwrap();
    let jobs = boundary_jobs(&theory);
    let test = PhaseLockTest {
        steps_per_period: 64,
        ..PhaseLockTest::fixed()
    };
    let lock = |f: f64, p: f64| test.locked(&m, &shape, one(), f, p);
    let opts = BisectionOptions::default();
    let seq = tongue_sweep(&jobs, &lock, &opts, Execution::Sequential);
    let par = tongue_sweep(&jobs, &lock, &opts, Execution::Parallel);
    assert_eq!(seq, par);
    assert!(seq.iter().all(|r| r.power.is_some()));
}

#[test]
fn sinusoidal_tongue_is_recovered_by_simulation() {
    // Z = −sin θ, ṽ = √2 cos: Λ = (√2/2)·sin φ, both edges at |Δω|·√2
    let m = sine_model();
    let shape = FourierSeries::cosine(1, SQRT_2);
    let theory = single_tongue(&m, one(), &shape, &[0.995, 1.005]).unwrap();
    let lock = |f: f64, p: f64| {
        PhaseLockTest {
            steps_per_period: 64,
            ..Default::default()
        }
        .locked(&m, &shape, one(), f, p)
    };
    let (emp, failures) = empirical_tongue(
        &theory,
        &lock,
        &BisectionOptions::default(),
        Execution::Parallel,
    );
    assert_eq!(failures, 0);
    for (t, e) in theory.points.iter().zip(&emp.points) {
        let (pt, pe) = (t.p_min().unwrap(), e.p_min().unwrap());
        assert!((pt - 0.005 * SQRT_2).abs() < 1e-12);
        assert!((pe / pt - 1.0).abs() < 0.03, "{pe} vs {pt}");
    }
}

#[test]
fn fast_waveform_rate_on_phase_model() {
    let m = sine_model();
    let f = fast_waveform(&m, one(), 1.002, Some(2e-4)).unwrap();
    let est = phase_rate_experiment(&m, &f.waveform, 0.3, 80, 64, &RateWindow::default()).unwrap();
    assert!(
        (est.kappa / f.predicted_rate - 1.0).abs() < 0.1,
        "{} vs {}",
        est.kappa,
        f.predicted_rate
    );
}

#[test]
fn radial_clock_locks_above_its_boundary_only() {
    let lc = find_limit_cycle(&RadialClock, &[0.5, 0.0], &CycleOptions::default()).unwrap();
    let model = prc_projection(
        &RadialClock,
        &lc,
        &PrcOptions {
            n_phases: 128,
            ..Default::default()
        },
    )
    .unwrap();
    let shape = FourierSeries::cosine(1, SQRT_2);
    let omega_f = 1.01;
    let theory = single_tongue(&model, one(), &shape, &[omega_f])
        .unwrap()
        .points[0]
        .p_min()
        .unwrap();
    let test = StateLockTest {
        dt: 0.02,
        ..Default::default()
    };
    assert!(test
        .locked(&RadialClock, &lc, &shape, one(), omega_f, 1.3 * theory)
        .unwrap());
    assert!(!test
        .locked(&RadialClock, &lc, &shape, one(), omega_f, 0.7 * theory)
        .unwrap());
}
