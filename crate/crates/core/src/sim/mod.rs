//! Simulation checks of the averaged theory: lock detection, boundary
//! bisection, tongue sweeps and entrainment-rate estimation.

mod bisection;
mod phase;
mod rate;
mod state;
mod sweep;

use std::f64::consts::TAU;

use serde::Serialize;

pub use bisection::{min_power_bisection, BisectionOptions};
pub use phase::{
    detect_entrainment_phase, integrate_phase, integrate_phase_with, PhaseLockTest, PhaseRun,
};
pub use rate::{
    fit_log_linear, phase_rate_experiment, rate_phase, rate_state, state_rate_experiment,
    RateEstimate, RateSource, RateWindow, DEFAULT_OFFSET,
};
pub use state::{detect_entrainment_state, forced_peaks, StateLockTest};
pub use sweep::{boundary_jobs, empirical_tongue, tongue_sweep, BoundaryJob, Edge, JobResult};

use crate::fourier::FourierSeries;
use crate::interaction::SubharmonicRatio;

/// Outcome of a lock test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntrainmentVerdict {
    pub locked: bool,
    /// Samples inspected: ψ_k (phase model) or y_k (state model).
    pub series: Vec<f64>,
    /// Final slow phase or final y_k when locked.
    pub asymptote: Option<f64>,
}

/// `v(Ω_f t)` at the half steps of `h = T_e/steps` over one repetition
/// `M·T_e` of the forcing, so long runs never evaluate `v` at large angles.
pub(crate) struct InputTable {
    values: Vec<f64>,
}

impl InputTable {
    pub(crate) fn new(v: &FourierSeries, ratio: SubharmonicRatio, steps: usize) -> Self {
        let len = 2 * steps * ratio.m() as usize;
        let n = ratio.n() as f64;
        let values = (0..len)
            .map(|j| v.eval(TAU * n * j as f64 / len as f64))
            .collect();
        Self { values }
    }

    /// Inputs at the start, midpoint and end of step `k`.
    pub(crate) fn step(&self, k: usize) -> [f64; 3] {
        let n = self.values.len();
        let j = (2 * k) % n;
        [self.values[j], self.values[j + 1], self.values[(j + 2) % n]]
    }
}
