//! Forced phase-model simulation and the phase-model lock test.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::{EntrainmentVerdict, InputTable};
use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::interaction::{fixed_points, interaction, SubharmonicRatio};
use crate::phase::PhaseModel;
use crate::synthesis::Waveform;

/// RK4 steps per entrained period `T_e`.
pub const DEFAULT_STEPS: usize = 256;

/// Integrates `φ̇ = Δω + Z(φ + Ωt) v(Ω_f t)` for the slow phase and calls
/// `observe(k, φ_k)` at every `t = k T_e`; stops early when it returns false.
fn run_slow(
    model: &PhaseModel,
    w: &Waveform,
    phi0: f64,
    cycles: usize,
    steps: usize,
    mut observe: impl FnMut(usize, f64) -> bool,
) -> Vec<f64> {
    let z = model.prc();
    let dw = model.omega() - w.target();
    let h = w.target_period() / steps as f64;
    let table = InputTable::new(w.series(), w.ratio(), steps);
    let half = 2 * steps;
    let angle = |j: usize| TAU * (j % half) as f64 / half as f64;
    let mut phi = phi0;
    let mut out = Vec::with_capacity(cycles + 1);
    out.push(phi);
    if !observe(0, phi) {
        return out;
    }
    for k in 1..=cycles {
        for s in 0..steps {
            let [u0, um, u1] = table.step((k - 1) * steps + s);
            let j = 2 * s;
            let (t0, tm, t1) = (angle(j), angle(j + 1), angle(j + 2));
            let k1 = dw + z.eval(phi + t0) * u0;
            let k2 = dw + z.eval(phi + 0.5 * h * k1 + tm) * um;
            let k3 = dw + z.eval(phi + 0.5 * h * k2 + tm) * um;
            let k4 = dw + z.eval(phi + h * k3 + t1) * u1;
            phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        out.push(phi);
        if !observe(k, phi) {
            break;
        }
    }
    out
}

/// Samples `ψ_k = ψ(k T_e)`, `k = 0..=cycles`, of `ψ̇ = ω + Z(ψ) v(Ω_f t)`.
pub fn integrate_phase(
    model: &PhaseModel,
    w: &Waveform,
    psi0: f64,
    cycles: usize,
) -> Result<Vec<f64>> {
    integrate_phase_with(model, w, psi0, cycles, DEFAULT_STEPS)
}

pub fn integrate_phase_with(
    model: &PhaseModel,
    w: &Waveform,
    psi0: f64,
    cycles: usize,
    steps: usize,
) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(Error::InvalidParameter(
            "need at least one step per period".into(),
        ));
    }
    let phi = run_slow(model, w, psi0, cycles, steps, |_, _| true);
    Ok(to_psi(&phi))
}

fn to_psi(phi: &[f64]) -> Vec<f64> {
    phi.iter()
        .enumerate()
        .map(|(k, p)| p + TAU * k as f64)
        .collect()
}

fn window_spread(phi: &[f64], from: usize) -> f64 {
    phi[from..]
        .iter()
        .map(|p| (p - phi[from]).abs())
        .fold(0.0, f64::max)
}

/// Fixed-window rule: with `φ_k = ψ_k − Ω k T_e`, locked iff
/// `max_{k=46..50} |φ_k − φ_46| ≤ 0.1`.
pub fn detect_entrainment_phase(series: &[f64], target: f64) -> Result<EntrainmentVerdict> {
    if series.len() < 51 {
        return Err(Error::InsufficientData {
            needed: 51,
            got: series.len(),
        });
    }
    let te = TAU / target;
    let phi: Vec<f64> = series[..51]
        .iter()
        .enumerate()
        .map(|(k, p)| p - target * k as f64 * te)
        .collect();
    let locked = window_spread(&phi, 46) <= 0.1;
    Ok(EntrainmentVerdict {
        locked,
        series: series.to_vec(),
        asymptote: locked.then_some(phi[50]),
    })
}

/// Everything a phase-model lock run produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseRun {
    pub verdict: EntrainmentVerdict,
    pub horizon: usize,
    pub start: f64,
    pub slipped: bool,
}

/// Phase-model lock test. The fixed rule checks samples 46..50; with a
/// `margin` the horizon grows to three passage times through the
/// saddle-node bottleneck at `P = (1 − margin)·P*`, since slow passages near
/// the boundary otherwise read as locked.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhaseLockTest {
    pub steps_per_period: usize,
    pub tolerance: f64,
    pub min_cycles: usize,
    pub max_cycles: usize,
    pub margin: Option<f64>,
}

impl Default for PhaseLockTest {
    fn default() -> Self {
        Self {
            steps_per_period: DEFAULT_STEPS,
            tolerance: 0.1,
            min_cycles: 50,
            max_cycles: 40_000,
            margin: Some(0.002),
        }
    }
}

impl PhaseLockTest {
    /// The plain 50-period rule.
    pub fn fixed() -> Self {
        Self {
            margin: None,
            ..Self::default()
        }
    }

    /// Runs the lock test for `u(t) = power · shape(Ω_f t)`.
    pub fn run(
        &self,
        model: &PhaseModel,
        shape: &FourierSeries,
        ratio: SubharmonicRatio,
        omega_f: f64,
        power: f64,
    ) -> Result<PhaseRun> {
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "power must be nonnegative, got {power}"
            )));
        }
        let target = ratio.target_frequency(omega_f);
        let w = Waveform::custom(shape.scale(power), ratio, target)?;
        let dw = model.omega() - target;
        let unit = interaction(model.prc(), shape, ratio);
        let bottleneck = if dw < 0.0 {
            unit.phi_plus
        } else {
            unit.phi_minus
        };
        let lam = interaction(model.prc(), w.series(), ratio);
        let fp = fixed_points(&lam, dw);
        let start = fp.stable.first().copied().unwrap_or(bottleneck);

        let mut horizon = self.min_cycles;
        if let Some(r) = self.margin {
            let curv = 0.5 * unit.lambda.derivative().derivative().eval(bottleneck).abs() * power;
            let gap = r * dw.abs();
            if curv * gap > 0.0 {
                let passage = PI / (curv * gap).sqrt();
                let cycles = (3.0 * passage / w.target_period()).ceil() + 10.0;
                horizon = horizon.max(cycles.min(self.max_cycles as f64) as usize);
            }
        }
        let horizon = horizon.min(self.max_cycles.max(self.min_cycles));

        let slip = TAU / ratio.n() as f64;
        let mut slipped = false;
        let phi = run_slow(model, &w, start, horizon, self.steps_per_period, |_, p| {
            slipped = (p - start).abs() > slip;
            !slipped
        });
        let locked = !slipped
            && phi.len() == horizon + 1
            && window_spread(&phi, horizon - 4) <= self.tolerance;
        let asymptote = locked.then(|| phi[horizon]);
        Ok(PhaseRun {
            verdict: EntrainmentVerdict {
                locked,
                series: to_psi(&phi),
                asymptote,
            },
            horizon,
            start,
            slipped,
        })
    }

    pub fn locked(
        &self,
        model: &PhaseModel,
        shape: &FourierSeries,
        ratio: SubharmonicRatio,
        omega_f: f64,
        power: f64,
    ) -> Result<bool> {
        Ok(self
            .run(model, shape, ratio, omega_f, power)?
            .verdict
            .locked)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    fn sine() -> (PhaseModel, SubharmonicRatio) {
        (
            PhaseModel::new(1.0, FourierSeries::sine(1, SQRT_2)).unwrap(),
            SubharmonicRatio::new(1, 1).unwrap(),
        )
    }

    #[test]
    fn unforced_phase_drifts_linearly() {
        let (m, r) = sine();
        let w = Waveform::custom(FourierSeries::zero(), r, 1.1).unwrap();
        let psi = integrate_phase(&m, &w, 0.3, 20).unwrap();
        let te = w.target_period();
        for (k, p) in psi.iter().enumerate() {
            assert!((p - (0.3 + k as f64 * te)).abs() < 1e-8);
        }
    }

    #[test]
    fn forced_phase_settles_at_analytic_root() {
        // Λ = P cos φ with P = 0.001, Δω = −0.0005: stable root at φ = π/3
        let (m, r) = sine();
        let w = Waveform::custom(FourierSeries::sine(1, SQRT_2 * 0.001), r, 1.0005).unwrap();
        let psi = integrate_phase_with(&m, &w, 0.0, 3000, 64).unwrap();
        assert!(
            detect_entrainment_phase(&psi[2950..], 1.0005)
                .unwrap()
                .locked
        );
        let phi_end = (psi[3000] - TAU * 3000.0).rem_euclid(TAU);
        assert!((phi_end - PI / 3.0).abs() < 1e-3, "{}", phi_end - PI / 3.0);
    }

    #[test]
    fn fixed_window_rule() {
        let constant: Vec<f64> = (0..51).map(|k| 0.2 + TAU * k as f64).collect();
        assert!(detect_entrainment_phase(&constant, 1.0).unwrap().locked);
        let drifting: Vec<f64> = (0..51).map(|k| 0.2 * k as f64 + TAU * k as f64).collect();
        assert!(!detect_entrainment_phase(&drifting, 1.0).unwrap().locked);
        assert!(matches!(
            detect_entrainment_phase(&constant[..50], 1.0),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn lock_test_brackets_analytic_boundary() {
        // boundary P = |Δω| = 0.002 for Λ = P cos φ
        let (m, r) = sine();
        let shape = FourierSeries::sine(1, SQRT_2);
        let t = PhaseLockTest {
            steps_per_period: 64,
            ..Default::default()
        };
        for omega_f in [1.002, 0.998] {
            assert!(t.locked(&m, &shape, r, omega_f, 0.00202).unwrap());
            assert!(!t.locked(&m, &shape, r, omega_f, 0.00198).unwrap());
        }
        let fixed = PhaseLockTest {
            steps_per_period: 64,
            ..PhaseLockTest::fixed()
        };
        assert_eq!(fixed.run(&m, &shape, r, 1.002, 0.003).unwrap().horizon, 50);
    }
}
