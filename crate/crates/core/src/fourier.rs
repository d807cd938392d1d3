//! Finite Fourier series on the circle.
//!
//! Convention: `f(θ) = a0/2 + Σ a_n cos(nθ) + Σ b_n sin(nθ)`, n = 1..=order.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default truncation order for fitted series.
pub const DEFAULT_ORDER: usize = 64;

/// Relative magnitude below which fitted coefficients are zeroed.
pub const TRUNCATION: f64 = 1e-12;

/// Grid size used for extremum scans.
pub const SCAN_GRID: usize = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSeries")]
pub struct FourierSeries {
    a0: f64,
    a: Vec<f64>,
    b: Vec<f64>,
}

#[derive(Deserialize)]
struct RawSeries {
    a0: f64,
    #[serde(default)]
    a: Vec<f64>,
    #[serde(default)]
    b: Vec<f64>,
}

impl TryFrom<RawSeries> for FourierSeries {
    type Error = Error;

    fn try_from(raw: RawSeries) -> Result<Self> {
        FourierSeries::new(raw.a0, raw.a, raw.b)
    }
}

impl FourierSeries {
    /// Builds a series from raw coefficients. Shorter coefficient lists are
    /// zero-padded to a common order.
    pub fn new(a0: f64, mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Self> {
        if !a0.is_finite() || a.iter().chain(&b).any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(
                "Fourier coefficients must be finite".into(),
            ));
        }
        let order = a.len().max(b.len());
        a.resize(order, 0.0);
        b.resize(order, 0.0);
        Ok(Self { a0, a, b })
    }

    pub fn zero() -> Self {
        Self {
            a0: 0.0,
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    /// The constant function `value`.
    pub fn constant(value: f64) -> Self {
        Self {
            a0: 2.0 * value,
            a: Vec::new(),
            b: Vec::new(),
        }
    }

    /// `amp · cos(nθ)`.
    pub fn cosine(n: usize, amp: f64) -> Self {
        if n == 0 {
            return Self::constant(amp);
        }
        let mut s = Self::with_order(n);
        s.a[n - 1] = amp;
        s
    }

    /// `amp · sin(nθ)`.
    pub fn sine(n: usize, amp: f64) -> Self {
        let mut s = Self::with_order(n);
        if n > 0 {
            s.b[n - 1] = amp;
        }
        s
    }

    fn with_order(order: usize) -> Self {
        Self {
            a0: 0.0,
            a: vec![0.0; order],
            b: vec![0.0; order],
        }
    }

    /// Discrete Fourier projection of samples taken at `θ_k = 2πk/K`.
    pub fn fit(samples: &[f64], order: usize) -> Result<Self> {
        let k = samples.len();
        if k < 2 * order + 1 {
            return Err(Error::InsufficientResolution { samples: k, order });
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite sample".into()));
        }
        let cos_tab: Vec<f64> = (0..k).map(|j| (TAU * j as f64 / k as f64).cos()).collect();
        let sin_tab: Vec<f64> = (0..k).map(|j| (TAU * j as f64 / k as f64).sin()).collect();
        let scale = 2.0 / k as f64;
        let mut s = Self::with_order(order);
        s.a0 = scale * samples.iter().sum::<f64>();
        for n in 1..=order {
            let (mut ca, mut cb) = (0.0, 0.0);
            let mut idx = 0usize;
            for &v in samples {
                ca += v * cos_tab[idx];
                cb += v * sin_tab[idx];
                idx += n;
                if idx >= k {
                    idx -= k;
                }
            }
            s.a[n - 1] = scale * ca;
            s.b[n - 1] = scale * cb;
        }
        let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let cut = TRUNCATION * peak;
        for c in std::iter::once(&mut s.a0)
            .chain(s.a.iter_mut())
            .chain(s.b.iter_mut())
        {
            if c.abs() < cut {
                *c = 0.0;
            }
        }
        Ok(s)
    }

    /// Fit `f` sampled on a uniform grid of `samples` points.
    pub fn fit_fn(f: impl Fn(f64) -> f64, samples: usize, order: usize) -> Result<Self> {
        let values: Vec<f64> = grid(samples).map(f).collect();
        Self::fit(&values, order)
    }

    pub fn a0(&self) -> f64 {
        self.a0
    }

    /// Cosine coefficients a_1..a_order.
    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// Sine coefficients b_1..b_order.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// Cosine coefficient of harmonic `n` (n = 0 gives a0); zero beyond the order.
    pub fn cos_coef(&self, n: usize) -> f64 {
        match n {
            0 => self.a0,
            _ => self.a.get(n - 1).copied().unwrap_or(0.0),
        }
    }

    /// Sine coefficient of harmonic `n`; zero for n = 0 or beyond the order.
    pub fn sin_coef(&self, n: usize) -> f64 {
        match n {
            0 => 0.0,
            _ => self.b.get(n - 1).copied().unwrap_or(0.0),
        }
    }

    /// Mean value a0/2.
    pub fn mean(&self) -> f64 {
        0.5 * self.a0
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let (s1, c1) = theta.sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        let mut acc = 0.5 * self.a0;
        for (an, bn) in self.a.iter().zip(&self.b) {
            let cn = c * c1 - s * s1;
            let sn = s * c1 + c * s1;
            c = cn;
            s = sn;
            acc += an * c + bn * s;
        }
        acc
    }

    /// Values at `θ_k = 2πk/K`, k = 0..K.
    pub fn sample(&self, k: usize) -> Vec<f64> {
        grid(k).map(|t| self.eval(t)).collect()
    }

    pub fn derivative(&self) -> Self {
        let mut d = Self::with_order(self.order());
        for n in 1..=self.order() {
            let nf = n as f64;
            d.a[n - 1] = nf * self.b[n - 1];
            d.b[n - 1] = -nf * self.a[n - 1];
        }
        d
    }

    /// `g(θ) = f(θ + δ)`.
    pub fn shift(&self, delta: f64) -> Self {
        let mut g = Self::with_order(self.order());
        g.a0 = self.a0;
        for n in 1..=self.order() {
            let (sd, cd) = (n as f64 * delta).sin_cos();
            let (an, bn) = (self.a[n - 1], self.b[n - 1]);
            g.a[n - 1] = an * cd + bn * sd;
            g.b[n - 1] = bn * cd - an * sd;
        }
        g
    }

    pub fn scale(&self, c: f64) -> Self {
        Self {
            a0: c * self.a0,
            a: self.a.iter().map(|x| c * x).collect(),
            b: self.b.iter().map(|x| c * x).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().max(other.order());
        let mut s = Self::with_order(order);
        s.a0 = self.a0 + other.a0;
        for n in 1..=order {
            s.a[n - 1] = self.cos_coef(n) + other.cos_coef(n);
            s.b[n - 1] = self.sin_coef(n) + other.sin_coef(n);
        }
        s
    }

    /// `g(θ) = f(mθ)`: harmonic n moves to mn.
    pub fn dilate(&self, m: usize) -> Self {
        assert!(m > 0, "dilation factor must be positive");
        let mut g = Self::with_order(self.order() * m);
        g.a0 = self.a0;
        for n in 1..=self.order() {
            g.a[n * m - 1] = self.a[n - 1];
            g.b[n * m - 1] = self.b[n - 1];
        }
        g
    }

    /// Average of the product over one period.
    pub fn inner(&self, other: &Self) -> f64 {
        let cross: f64 = self
            .a
            .iter()
            .zip(&other.a)
            .chain(self.b.iter().zip(&other.b))
            .map(|(x, y)| x * y)
            .sum();
        0.25 * self.a0 * other.a0 + 0.5 * cross
    }

    /// Mean-square value `⟨f²⟩`.
    pub fn energy(&self) -> f64 {
        self.inner(self)
    }

    pub fn rms(&self) -> f64 {
        self.energy().sqrt()
    }

    /// Largest coefficient magnitude, a0 included.
    pub fn max_coefficient(&self) -> f64 {
        std::iter::once(&self.a0)
            .chain(&self.a)
            .chain(&self.b)
            .fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Drops trailing harmonics whose coefficients are exactly zero.
    pub fn trimmed(mut self) -> Self {
        while let (Some(&a), Some(&b)) = (self.a.last(), self.b.last()) {
            if a != 0.0 || b != 0.0 {
                break;
            }
            self.a.pop();
            self.b.pop();
        }
        self
    }

    /// Truncates or zero-pads to exactly `order` harmonics.
    pub fn resized(mut self, order: usize) -> Self {
        self.a.resize(order, 0.0);
        self.b.resize(order, 0.0);
        self
    }

    /// Upper bound on |f'| from the coefficients.
    pub fn derivative_bound(&self) -> f64 {
        self.a
            .iter()
            .zip(&self.b)
            .enumerate()
            .map(|(i, (a, b))| (i + 1) as f64 * (a.abs() + b.abs()))
            .sum()
    }

    /// Maximum over one `period`, searching `[0, period)`. See [`extremum`].
    pub fn argmax(&self, period: f64) -> (f64, f64) {
        extremum(self, period, true)
    }

    /// Minimum over one `period`, searching `[0, period)`. See [`extremum`].
    pub fn argmin(&self, period: f64) -> (f64, f64) {
        extremum(self, period, false)
    }

    /// Largest absolute value on a uniform grid.
    pub fn sup_norm(&self, k: usize) -> f64 {
        grid(k).fold(0.0f64, |m, t| m.max(self.eval(t).abs()))
    }
}

/// Uniform phase grid `2πk/K`, k = 0..K.
pub fn grid(k: usize) -> impl Iterator<Item = f64> + Clone {
    (0..k).map(move |j| TAU * j as f64 / k as f64)
}

/// Locates the maximum (or minimum) of `f` on `[0, period)`, assuming `f`
/// has that period. Scans a [`SCAN_GRID`]-point grid, keeping the first best
/// sample on ties, then refines by bisection on the sign of the exact
/// derivative. Returns `(phase, value)` with the phase in `[0, period)`.
pub fn extremum(f: &FourierSeries, period: f64, maximize: bool) -> (f64, f64) {
    let sign = if maximize { 1.0 } else { -1.0 };
    let h = period / SCAN_GRID as f64;
    let mut best = (0usize, sign * f.eval(0.0));
    for j in 1..SCAN_GRID {
        let v = sign * f.eval(j as f64 * h);
        if v > best.1 {
            best = (j, v);
        }
    }
    let center = best.0 as f64 * h;
    let df = f.derivative();
    // Along the search direction the signed derivative goes + → − at the extremum.
    let g = |x: f64| sign * df.eval(x);
    let (mut lo, mut hi) = (center - h, center + h);
    let mut phase = center;
    if g(lo) > 0.0 && g(hi) < 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let cand = 0.5 * (lo + hi);
        if sign * f.eval(cand) >= best.1 {
            phase = cand;
        }
    }
    let mut phase = phase.rem_euclid(period);
    if period - phase < 1e-12 * period.max(1.0) {
        phase = 0.0;
    }
    (phase, f.eval(phase))
}

impl Add for &FourierSeries {
    type Output = FourierSeries;
    fn add(self, rhs: Self) -> FourierSeries {
        FourierSeries::add(self, rhs)
    }
}

impl Sub for &FourierSeries {
    type Output = FourierSeries;
    fn sub(self, rhs: Self) -> FourierSeries {
        FourierSeries::add(self, &rhs.scale(-1.0))
    }
}

impl Neg for &FourierSeries {
    type Output = FourierSeries;
    fn neg(self) -> FourierSeries {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &FourierSeries {
    type Output = FourierSeries;
    fn mul(self, c: f64) -> FourierSeries {
        self.scale(c)
    }
}
