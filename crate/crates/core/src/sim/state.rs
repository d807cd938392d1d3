//! Forced state-space simulation: lock test and spike times.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{EntrainmentVerdict, InputTable};
use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::interaction::SubharmonicRatio;
use crate::ode::{refine_root, LimitCycle, Rk4, VectorField};
use crate::synthesis::Waveform;

/// State-space lock test: sample `y_k = x_1(k T_e)` from the unforced cycle
/// point at θ = 0; locked iff `max_{k∈[first, last]} |y_k − y_first|` is at
/// most `tolerance` times the peak-to-peak amplitude of `x_1` on the cycle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StateLockTest {
    /// Largest RK4 step; the actual step divides `T_e` evenly.
    pub dt: f64,
    pub first: usize,
    pub last: usize,
    pub tolerance: f64,
}

impl Default for StateLockTest {
    fn default() -> Self {
        Self {
            dt: 0.01,
            first: 200,
            last: 250,
            tolerance: 1e-2,
        }
    }
}

fn steps_per_period(te: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step must be positive, got {dt}"
        )));
    }
    Ok((te / dt).ceil().max(1.0) as usize)
}

impl StateLockTest {
    pub fn run<F: VectorField + ?Sized>(
        &self,
        field: &F,
        cycle: &LimitCycle,
        w: &Waveform,
    ) -> Result<EntrainmentVerdict> {
        if self.last <= self.first {
            return Err(Error::InvalidParameter("lock window is empty".into()));
        }
        let te = w.target_period();
        let steps = steps_per_period(te, self.dt)?;
        let h = te / steps as f64;
        let table = InputTable::new(w.series(), w.ratio(), steps);
        let mut x = cycle.base_point().to_vec();
        let mut rk = Rk4::new(x.len());
        let mut ys = Vec::with_capacity(self.last + 1);
        ys.push(x[0]);
        for k in 1..=self.last {
            for s in 0..steps {
                let g = (k - 1) * steps + s;
                rk.step_with(field, &mut x, h, table.step(g));
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::IntegrationDiverged {
                        step: g + 1,
                        time: (g + 1) as f64 * h,
                    });
                }
            }
            ys.push(x[0]);
        }
        let y0 = ys[self.first];
        let spread = ys[self.first..]
            .iter()
            .map(|y| (y - y0).abs())
            .fold(0.0, f64::max);
        let locked = spread <= self.tolerance * cycle.scales()[0];
        Ok(EntrainmentVerdict {
            locked,
            asymptote: locked.then_some(ys[self.last]),
            series: ys,
        })
    }

    /// Lock test for `u(t) = power · shape(Ω_f t)`.
    pub fn locked<F: VectorField + ?Sized>(
        &self,
        field: &F,
        cycle: &LimitCycle,
        shape: &FourierSeries,
        ratio: SubharmonicRatio,
        omega_f: f64,
        power: f64,
    ) -> Result<bool> {
        let w = Waveform::custom(shape.scale(power), ratio, ratio.target_frequency(omega_f))?;
        Ok(self.run(field, cycle, &w)?.locked)
    }
}

/// [`StateLockTest::run`] with default settings.
pub fn detect_entrainment_state<F: VectorField + ?Sized>(
    field: &F,
    cycle: &LimitCycle,
    w: &Waveform,
) -> Result<EntrainmentVerdict> {
    StateLockTest::default().run(field, cycle, w)
}

/// Times of maxima of `x_1` above `threshold` under forcing `w`, from `x0`
/// over `cycles` periods `T_e`, refined below the step size.
pub fn forced_peaks<F: VectorField + ?Sized>(
    field: &F,
    x0: &[f64],
    w: &Waveform,
    dt: f64,
    cycles: usize,
    threshold: f64,
) -> Result<Vec<f64>> {
    let te = w.target_period();
    let steps = steps_per_period(te, dt)?;
    let h = te / steps as f64;
    let table = InputTable::new(w.series(), w.ratio(), steps);
    let mut x = x0.to_vec();
    let mut dx = vec![0.0; x.len()];
    let mut rk = Rk4::new(x.len());
    field.eval(&x, table.step(0)[0], &mut dx);
    let mut hist = [(f64::NAN, f64::NAN), (0.0, dx[0])];
    let mut peaks = Vec::new();
    for g in 0..steps * cycles {
        let inputs = table.step(g);
        rk.step_with(field, &mut x, h, inputs);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged {
                step: g + 1,
                time: (g + 1) as f64 * h,
            });
        }
        field.eval(&x, inputs[2], &mut dx);
        let cur = ((g + 1) as f64 * h, dx[0]);
        let [older, prev] = hist;
        hist = [prev, cur];
        if prev.1 > 0.0 && cur.1 <= 0.0 && x[0] > threshold {
            peaks.push(refine_root(older, prev, cur));
        }
    }
    Ok(peaks)
}

/// Initial state on the unforced cycle at phase `theta`.
pub(crate) fn cycle_state<F: VectorField + ?Sized>(
    field: &F,
    cycle: &LimitCycle,
    theta: f64,
) -> Vec<f64> {
    cycle.state_at_phase(field, theta.rem_euclid(TAU))
}
