//! Entrainment-rate estimates from log-linear decay of the phase error.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::phase::integrate_phase_with;
use super::state::{cycle_state, forced_peaks};
use crate::error::{Error, Result};
use crate::interaction::fixed_points;
use crate::ode::{LimitCycle, VectorField};
use crate::phase::PhaseModel;
use crate::synthesis::Waveform;

/// Initial slow-phase offset from the lock phase, in radians.
pub const DEFAULT_OFFSET: f64 = 0.4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RateSource {
    Phase,
    State,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    /// Fitted exponential rate (1/time), negative when converging.
    pub kappa: f64,
    pub intercept: f64,
    /// RMS residual of the log fit.
    pub residual: f64,
    pub source: RateSource,
    pub points: usize,
}

/// Which samples enter the log fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RateWindow {
    /// Smallest error magnitude kept.
    pub floor: f64,
    /// Largest magnitude kept, as a fraction of the initial one.
    pub upper_fraction: f64,
    /// Leading fraction of the series discarded as transient.
    pub skip_fraction: f64,
    pub min_points: usize,
}

impl Default for RateWindow {
    fn default() -> Self {
        Self {
            floor: 1e-4,
            upper_fraction: 0.5,
            skip_fraction: 0.1,
            min_points: 8,
        }
    }
}

/// Least-squares line through `(t, ln y)`: returns slope, intercept and the
/// RMS residual.
pub fn fit_log_linear(t: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = t.len() as f64;
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let tm = t.iter().sum::<f64>() / n;
    let lm = ly.iter().sum::<f64>() / n;
    let sxy: f64 = t.iter().zip(&ly).map(|(a, b)| (a - tm) * (b - lm)).sum();
    let sxx: f64 = t.iter().map(|a| (a - tm).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = lm - slope * tm;
    let ss: f64 = t
        .iter()
        .zip(&ly)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    (slope, intercept, (ss / n).sqrt())
}

fn windowed_fit(
    errors: &[f64],
    spacing: f64,
    window: &RateWindow,
    source: RateSource,
) -> Result<RateEstimate> {
    let Some(first) = errors.first() else {
        return Err(Error::InsufficientDecay("empty series".into()));
    };
    let upper = window.upper_fraction * first.abs();
    let skip = (window.skip_fraction * errors.len() as f64).ceil() as usize;
    let (t, y): (Vec<f64>, Vec<f64>) = errors
        .iter()
        .enumerate()
        .skip(skip)
        .filter(|(_, e)| e.abs() >= window.floor && e.abs() <= upper)
        .map(|(k, e)| (k as f64 * spacing, *e))
        .unzip();
    if t.len() < window.min_points.max(2) {
        return Err(Error::InsufficientDecay(format!(
            "{} samples inside [{:e}, {upper:e}], need {}",
            t.len(),
            window.floor,
            window.min_points
        )));
    }
    let (kappa, intercept, residual) = fit_log_linear(&t, &y);
    Ok(RateEstimate {
        kappa,
        intercept,
        residual,
        source,
        points: t.len(),
    })
}

/// κ1 from `ψ_k = ψ(k T_e)`: fits `ln|φ_k − φ*|` against `k T_e`, or the
/// difference form `ln|φ_{k+1} − φ_k|` when the lock phase is not given.
pub fn rate_phase(
    series: &[f64],
    target: f64,
    lock_phase: Option<f64>,
    window: &RateWindow,
) -> Result<RateEstimate> {
    let te = TAU / target;
    let phi: Vec<f64> = series
        .iter()
        .enumerate()
        .map(|(k, p)| p - TAU * k as f64)
        .collect();
    let errors: Vec<f64> = match lock_phase {
        Some(star) => phi
            .iter()
            .map(|p| (p - star + PI).rem_euclid(TAU) - PI)
            .collect(),
        None => phi.windows(2).map(|w| w[1] - w[0]).collect(),
    };
    windowed_fit(&errors, te, window, RateSource::Phase)
}

/// κ2 from successive peak times: `Δφ_j = 2π(T_e − (t_{j+1} − t_j))/T_e`,
/// fitted as `ln|Δφ_j|` against `j T_e`.
pub fn rate_state(peaks: &[f64], target: f64, window: &RateWindow) -> Result<RateEstimate> {
    if peaks.len() < 20 {
        return Err(Error::InsufficientData {
            needed: 20,
            got: peaks.len(),
        });
    }
    let te = TAU / target;
    let inc: Vec<f64> = peaks
        .windows(2)
        .map(|w| TAU * (te - (w[1] - w[0])) / te)
        .collect();
    if inc.iter().all(|d| d.abs() < 1e-12) {
        return Err(Error::InsufficientDecay(
            "peak intervals already match the target period".into(),
        ));
    }
    windowed_fit(&inc, te, window, RateSource::State)
}

fn lock_phase(model: &PhaseModel, w: &Waveform) -> Result<f64> {
    if let Some(p) = w.lock_phase() {
        return Ok(p);
    }
    let lam = w.interaction(model);
    fixed_points(&lam, model.omega() - w.target())
        .stable
        .first()
        .copied()
        .ok_or_else(|| Error::InsufficientDecay("waveform does not lock at this target".into()))
}

/// Phase model started `offset` behind the lock phase; κ1 by the
/// difference form over `cycles` periods.
pub fn phase_rate_experiment(
    model: &PhaseModel,
    w: &Waveform,
    offset: f64,
    cycles: usize,
    steps: usize,
    window: &RateWindow,
) -> Result<RateEstimate> {
    let star = lock_phase(model, w)?;
    let psi = integrate_phase_with(model, w, star - offset, cycles, steps)?;
    rate_phase(&psi, w.target(), None, window)
}

/// Full model started on the cycle `offset` behind the lock phase; κ2 from
/// the spike times of the first variable.
#[allow(clippy::too_many_arguments)]
pub fn state_rate_experiment<F: VectorField + ?Sized>(
    field: &F,
    cycle: &LimitCycle,
    model: &PhaseModel,
    w: &Waveform,
    offset: f64,
    cycles: usize,
    dt: f64,
    window: &RateWindow,
) -> Result<RateEstimate> {
    let star = lock_phase(model, w)?;
    let x0 = cycle_state(field, cycle, star - offset);
    let lo = cycle
        .samples()
        .iter()
        .map(|s| s[0])
        .fold(f64::INFINITY, f64::min);
    let threshold = lo + 0.5 * cycle.scales()[0];
    let peaks = forced_peaks(field, &x0, w, dt, cycles, threshold)?;
    rate_state(&peaks, w.target(), window)
}
