//! Locating attracting periodic orbits and sampling them on a phase grid.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::field::VectorField;
use super::rk4::{check_setup, Rk4};
use crate::error::{Error, Result};

/// Tuning for [`find_limit_cycle`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CycleOptions {
    /// Integration step.
    pub dt: f64,
    /// Settling time in units of the first observed peak interval.
    pub settle_periods: f64,
    /// Phase samples per cycle.
    pub resolution: usize,
    /// Number of peak intervals averaged for the period.
    pub intervals: usize,
    /// Largest allowed relative spread of those intervals.
    pub interval_tolerance: f64,
    /// Time budget for finding the first peaks.
    pub search_time: f64,
}

impl Default for CycleOptions {
    fn default() -> Self {
        Self {
            dt: 0.001,
            settle_periods: 20.0,
            resolution: 4096,
            intervals: 10,
            interval_tolerance: 1e-6,
            search_time: 2000.0,
        }
    }
}

/// An attracting periodic orbit sampled at `θ_k = 2πk/K`, with phase zero at
/// the maximum of the first state variable.
#[derive(Clone, Debug)]
pub struct LimitCycle {
    period: f64,
    omega: f64,
    samples: Vec<Vec<f64>>,
    scales: Vec<f64>,
    substep: f64,
    dt: f64,
    closure_error: f64,
    interval_spread: f64,
}

impl LimitCycle {
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Natural frequency `2π/T`.
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn resolution(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn base_point(&self) -> &[f64] {
        &self.samples[0]
    }

    pub fn dimension(&self) -> usize {
        self.samples[0].len()
    }

    /// Peak-to-peak range of each component (floored at a tiny positive value).
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    /// Integration step the cycle was located with.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Max over components of `|x(T) − x(0)| / scale` from the resampling pass.
    pub fn closure_error(&self) -> f64 {
        self.closure_error
    }

    /// Relative spread of the measured peak intervals.
    pub fn interval_spread(&self) -> f64 {
        self.interval_spread
    }

    /// Sample time spacing `T/K`.
    pub fn sample_spacing(&self) -> f64 {
        self.period / self.samples.len() as f64
    }

    /// `γ(t)` for any `t`, from the nearest sample below plus RK4 substeps no
    /// longer than the resampling step.
    pub fn state_at_time<F: VectorField + ?Sized>(&self, field: &F, t: f64) -> Vec<f64> {
        let t = t.rem_euclid(self.period);
        let spacing = self.sample_spacing();
        let mut j = (t / spacing).floor() as usize;
        if j >= self.samples.len() {
            j = self.samples.len() - 1;
        }
        let rest = t - j as f64 * spacing;
        let mut x = self.samples[j].clone();
        if rest > 0.0 {
            let n = (rest / self.substep).ceil().max(1.0) as usize;
            let h = rest / n as f64;
            let mut rk = Rk4::new(x.len());
            for _ in 0..n {
                rk.step_free(field, &mut x, h);
            }
        }
        x
    }

    /// `γ(θ/ω)`.
    pub fn state_at_phase<F: VectorField + ?Sized>(&self, field: &F, theta: f64) -> Vec<f64> {
        self.state_at_time(field, theta / self.omega)
    }

    /// Builds a cycle from externally known samples (analytic orbits, tests).
    pub fn from_samples(period: f64, samples: Vec<Vec<f64>>, dt: f64) -> Result<Self> {
        if !(period > 0.0) || samples.len() < 3 {
            return Err(Error::InvalidParameter(
                "cycle needs a positive period and at least 3 samples".into(),
            ));
        }
        let dim = samples[0].len();
        if samples
            .iter()
            .any(|s| s.len() != dim || s.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::InvalidParameter(
                "cycle samples must be finite and of equal dimension".into(),
            ));
        }
        let scales = component_scales(&samples);
        let spacing = period / samples.len() as f64;
        let substep = spacing / (spacing / dt).ceil().max(1.0);
        Ok(Self {
            period,
            omega: TAU / period,
            samples,
            scales,
            substep,
            dt,
            closure_error: 0.0,
            interval_spread: 0.0,
        })
    }
}

fn component_scales(samples: &[Vec<f64>]) -> Vec<f64> {
    let dim = samples[0].len();
    (0..dim)
        .map(|i| {
            let (lo, hi) = samples
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                    (lo.min(s[i]), hi.max(s[i]))
                });
            (hi - lo).max(1e-12)
        })
        .collect()
}

#[derive(Clone, Debug)]
struct Peak {
    time: f64,
    value: f64,
    state: Vec<f64>,
}

/// Streams RK4 steps and reports maxima of the first state variable.
struct PeakTracker<'a, F: VectorField + ?Sized> {
    field: &'a F,
    rk: Rk4,
    x: Vec<f64>,
    dx: Vec<f64>,
    dt: f64,
    step: usize,
    // (time, first-component slope) at the previous two steps
    hist: [(f64, f64); 2],
    prev_x: Vec<f64>,
}

impl<'a, F: VectorField + ?Sized> PeakTracker<'a, F> {
    fn new(field: &'a F, x0: &[f64], dt: f64) -> Self {
        let mut dx = vec![0.0; x0.len()];
        field.eval(x0, 0.0, &mut dx);
        Self {
            field,
            rk: Rk4::new(x0.len()),
            x: x0.to_vec(),
            dx: dx.clone(),
            dt,
            step: 0,
            hist: [(f64::NAN, f64::NAN), (0.0, dx[0])],
            prev_x: x0.to_vec(),
        }
    }

    fn time(&self) -> f64 {
        self.step as f64 * self.dt
    }

    /// One step; returns a refined peak if the slope crossed from + to −.
    fn advance(&mut self) -> Result<Option<Peak>> {
        self.prev_x.copy_from_slice(&self.x);
        self.rk.step_free(self.field, &mut self.x, self.dt);
        self.step += 1;
        if self.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged {
                step: self.step,
                time: self.time(),
            });
        }
        self.field.eval(&self.x, 0.0, &mut self.dx);
        let cur = (self.time(), self.dx[0]);
        let [older, prev] = self.hist;
        self.hist = [prev, cur];
        if prev.1 > 0.0 && cur.1 <= 0.0 {
            let tau = refine_root(older, prev, cur);
            // state at the peak via a fractional step from the previous sample
            let mut xp = self.prev_x.clone();
            let frac = tau - prev.0;
            if frac > 0.0 {
                self.rk.step_free(self.field, &mut xp, frac);
            }
            return Ok(Some(Peak {
                time: tau,
                value: xp[0],
                state: xp,
            }));
        }
        Ok(None)
    }
}

/// Root in `[p.0, c.0]` of the quadratic through three (t, g) points; falls
/// back to linear interpolation when the quadratic misbehaves.
pub(crate) fn refine_root(o: (f64, f64), p: (f64, f64), c: (f64, f64)) -> f64 {
    let linear = p.0 + (c.0 - p.0) * p.1 / (p.1 - c.1);
    if !o.1.is_finite() {
        return linear;
    }
    // g(s) = g_p + B s + C s², with s = t − t_p
    let h0 = p.0 - o.0;
    let h1 = c.0 - p.0;
    let d0 = (p.1 - o.1) / h0;
    let d1 = (c.1 - p.1) / h1;
    let cq = (d1 - d0) / (h0 + h1);
    let bq = d1 - cq * h1;
    let aq = p.1;
    let roots = if cq.abs() < 1e-300 {
        vec![-aq / bq]
    } else {
        let disc = bq * bq - 4.0 * cq * aq;
        if disc < 0.0 {
            return linear;
        }
        let q = -0.5 * (bq + bq.signum() * disc.sqrt());
        vec![q / cq, aq / q]
    };
    roots
        .into_iter()
        .filter(|s| s.is_finite() && *s >= -1e-12 * h1 && *s <= h1 * (1.0 + 1e-12))
        .map(|s| p.0 + s.clamp(0.0, h1))
        .next()
        .unwrap_or(linear)
}

/// Settles onto the attracting orbit through `x0`, measures its period from
/// peak intervals of the first variable, and samples one period.
pub fn find_limit_cycle<F: VectorField + ?Sized>(
    field: &F,
    x0: &[f64],
    opts: &CycleOptions,
) -> Result<LimitCycle> {
    check_setup(field, x0, opts.dt)?;
    if opts.resolution < 3 || opts.intervals < 1 {
        return Err(Error::InvalidParameter(
            "resolution ≥ 3 and at least one interval required".into(),
        ));
    }
    let dt = opts.dt;
    let mut tr = PeakTracker::new(field, x0, dt);

    // first estimate of the period
    let max_steps = (opts.search_time / dt).ceil() as usize;
    let mut first: Vec<Peak> = Vec::new();
    while first.len() < 3 {
        if tr.step >= max_steps {
            return Err(Error::NoLimitCycle(format!(
                "found {} maxima of the first variable within t = {}",
                first.len(),
                opts.search_time
            )));
        }
        if let Some(p) = tr.advance()? {
            first.push(p);
        }
    }
    let estimate = first[2].time - first[1].time;
    log::debug!("initial period estimate {estimate}");

    let settle_steps = (opts.settle_periods * estimate / dt).ceil() as usize;
    for _ in 0..settle_steps {
        tr.advance()?;
    }

    // measure intervals; keep only prominent maxima
    let needed = opts.intervals + 1;
    let budget = tr.step + ((needed as f64 + 5.0) * 2.0 * estimate / dt).ceil() as usize;
    let mut peaks: Vec<Peak> = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    while tr.step < budget {
        lo = lo.min(tr.x[0]);
        hi = hi.max(tr.x[0]);
        if let Some(p) = tr.advance()? {
            peaks.push(p);
            let mid = 0.5 * (lo + hi);
            let prominent = peaks.iter().filter(|q| q.value > mid).count();
            if prominent > needed {
                break;
            }
        }
    }
    let mid = 0.5 * (lo + hi);
    let peaks: Vec<Peak> = peaks.into_iter().filter(|q| q.value > mid).collect();
    if peaks.len() < 2 {
        return Err(Error::NoLimitCycle(
            "oscillation died out while settling".into(),
        ));
    }
    // skip the first prominent peak: its prominence was judged on a partial window
    let peaks = &peaks[1..];
    if peaks.len() < needed {
        return Err(Error::NoLimitCycle(format!(
            "only {} sustained maxima after settling",
            peaks.len()
        )));
    }
    let peaks = &peaks[peaks.len() - needed..];
    let intervals: Vec<f64> = peaks.windows(2).map(|w| w[1].time - w[0].time).collect();
    let period = intervals.iter().sum::<f64>() / intervals.len() as f64;
    let (imin, imax) = intervals
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(*v), b.max(*v))
        });
    let spread = (imax - imin) / period;
    if spread > opts.interval_tolerance {
        return Err(Error::NotConverged {
            relative_spread: spread,
        });
    }

    // base point: the state at the last peak
    let base = peaks[needed - 1].state.clone();

    let k = opts.resolution;
    let spacing = period / k as f64;
    let sub = (spacing / dt).ceil().max(1.0) as usize;
    let h = spacing / sub as f64;
    let mut samples = Vec::with_capacity(k);
    let mut x = base.clone();
    let mut rk = Rk4::new(x.len());
    for _ in 0..k {
        samples.push(x.clone());
        for _ in 0..sub {
            rk.step_free(field, &mut x, h);
        }
    }
    let scales = component_scales(&samples);
    let closure_error = x
        .iter()
        .zip(&base)
        .zip(&scales)
        .map(|((a, b), s)| (a - b).abs() / s)
        .fold(0.0, f64::max);
    log::debug!("period {period}, interval spread {spread:e}, closure {closure_error:e}");

    Ok(LimitCycle {
        period,
        omega: TAU / period,
        samples,
        scales,
        substep: h,
        dt,
        closure_error,
        interval_spread: spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::field::RadialClock;

    #[test]
    fn quadratic_root_refinement_is_exact_for_quadratics() {
        let g = |t: f64| 0.3 - (t - 0.1) * (t + 2.0);
        let pts = [(0.0, g(0.0)), (0.2, g(0.2)), (0.4, g(0.4))];
        let r = refine_root(pts[0], pts[1], pts[2]);
        let exact = (-1.9 + (1.9f64 * 1.9 + 4.0 * (0.3 + 0.2)).sqrt()) / 2.0;
        assert!((r - exact).abs() < 1e-14, "{r} vs {exact}");
    }

    #[test]
    fn radial_clock_period() {
        let opts = CycleOptions {
            settle_periods: 5.0,
            resolution: 256,
            ..Default::default()
        };
        let lc = find_limit_cycle(&RadialClock, &[0.5, 0.0], &opts).unwrap();
        assert!((lc.period() - TAU).abs() < 1e-8, "{}", lc.period());
        assert!((lc.omega() * lc.period() - TAU).abs() < 1e-15);
        let b = lc.base_point();
        assert!((b[0] - 1.0).abs() < 1e-8 && b[1].abs() < 1e-7, "{b:?}");
        let imax = (0..lc.resolution())
            .max_by(|&i, &j| lc.samples()[i][0].total_cmp(&lc.samples()[j][0]))
            .unwrap();
        assert_eq!(imax, 0);
        assert!(lc.closure_error() < 1e-9);
    }

    #[test]
    fn state_at_phase_follows_the_circle() {
        let opts = CycleOptions {
            settle_periods: 5.0,
            resolution: 64,
            ..Default::default()
        };
        let lc = find_limit_cycle(&RadialClock, &[1.0, 0.0], &opts).unwrap();
        for th in [0.0, 0.3, 2.0, 5.9, 7.0] {
            let x = lc.state_at_phase(&RadialClock, th);
            assert!(
                (x[0] - th.cos()).abs() < 1e-7 && (x[1] - th.sin()).abs() < 1e-7,
                "{th}: {x:?}"
            );
        }
    }

    struct Sink;

    impl VectorField for Sink {
        fn dimension(&self) -> usize {
            2
        }
        fn eval(&self, x: &[f64], _u: f64, dx: &mut [f64]) {
            dx[0] = -x[0];
            dx[1] = -2.0 * x[1];
        }
    }

    #[test]
    fn stable_equilibrium_has_no_cycle() {
        let opts = CycleOptions {
            search_time: 50.0,
            ..Default::default()
        };
        assert!(matches!(
            find_limit_cycle(&Sink, &[1.0, 1.0], &opts),
            Err(Error::NoLimitCycle(_))
        ));
    }
}
