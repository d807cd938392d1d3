//! Averaged structure functions and the interaction function of a PRC with
//! a periodic input under N:M forcing.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{grid, FourierSeries, SCAN_GRID};

/// Absolute threshold below which a paired coefficient counts as zero.
pub const EXISTENCE_TOL: f64 = 1e-12;

/// N forcing cycles per M oscillator cycles, with `gcd(N, M) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct SubharmonicRatio {
    n: u32,
    m: u32,
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl SubharmonicRatio {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if n == 0 || m == 0 || gcd(n, m) != 1 {
            return Err(Error::NonCoprimeRatio { n, m });
        }
        Ok(Self { n, m })
    }

    pub const fn harmonic() -> Self {
        Self { n: 1, m: 1 }
    }

    /// Forcing cycles N.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Oscillator cycles M.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// `N/M`.
    pub fn factor(&self) -> f64 {
        self.n as f64 / self.m as f64
    }

    /// Forcing frequency `(N/M)Ω` for target frequency Ω.
    pub fn forcing_frequency(&self, target: f64) -> f64 {
        self.factor() * target
    }

    /// Target frequency `(M/N)Ω_f`.
    pub fn target_frequency(&self, forcing: f64) -> f64 {
        forcing / self.factor()
    }

    /// Period of every interaction function in φ: `2π/N`.
    pub fn phase_period(&self) -> f64 {
        TAU / self.n as f64
    }

    /// All coprime ratios with both entries in `1..=max`.
    pub fn all_up_to(max: u32) -> Vec<Self> {
        let mut out = Vec::new();
        for n in 1..=max {
            for m in 1..=max {
                if let Ok(r) = Self::new(n, m) {
                    out.push(r);
                }
            }
        }
        out
    }
}

impl fmt::Display for SubharmonicRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.n, self.m)
    }
}

impl FromStr for SubharmonicRatio {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(':').ok_or_else(|| {
            Error::InvalidParameter(format!("ratio must look like N:M, got {s:?}"))
        })?;
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::InvalidParameter(format!("bad ratio component {t:?}")))
        };
        Self::new(parse(a)?, parse(b)?)
    }
}

impl TryFrom<String> for SubharmonicRatio {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<SubharmonicRatio> for String {
    fn from(r: SubharmonicRatio) -> String {
        r.to_string()
    }
}

/// `Y(η, φ) = (1/N) Σ_j Z((M/N)(2πj + η) + φ)` as a series in η.
///
/// Only PRC harmonics Nk survive the sum; each lands on harmonic Mk of Y,
/// rotated by Nkφ.
pub fn y_nm(z: &FourierSeries, ratio: SubharmonicRatio, phi: f64) -> FourierSeries {
    let (n, m) = (ratio.n as usize, ratio.m as usize);
    let kmax = z.order() / n;
    let mut a = vec![0.0; kmax * m];
    let mut b = vec![0.0; kmax * m];
    for k in 1..=kmax {
        let (an, bn) = (z.cos_coef(n * k), z.sin_coef(n * k));
        let (s, c) = ((n * k) as f64 * phi).sin_cos();
        a[m * k - 1] = an * c + bn * s;
        b[m * k - 1] = bn * c - an * s;
    }
    FourierSeries::new(z.a0(), a, b).expect("finite coefficients")
}

/// `∂Y/∂φ`, built from `Z'`.
pub fn y_nm_phi(z: &FourierSeries, ratio: SubharmonicRatio, phi: f64) -> FourierSeries {
    y_nm(&z.derivative(), ratio, phi)
}

/// Cosine series `a0²/4 + ½ Σ w_n cos(nφ)` restricted to harmonics that are
/// multiples of `step`, with weights `w_n = n^{2p}(a_n² + b_n²)`.
fn autocorrelation(z: &FourierSeries, step: usize, derivative_power: i32) -> FourierSeries {
    let order = z.order();
    let mut a = vec![0.0; order];
    for n in (step..=order).step_by(step) {
        let w = (n as f64).powi(2 * derivative_power);
        a[n - 1] = 0.5 * w * (z.cos_coef(n).powi(2) + z.sin_coef(n).powi(2));
    }
    let a0 = if derivative_power == 0 {
        0.5 * z.a0() * z.a0()
    } else {
        0.0
    };
    FourierSeries::new(a0, a, vec![])
        .expect("finite coefficients")
        .trimmed()
}

/// Averaged self-interaction functions of a PRC and their extrema.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureFunctions {
    pub ratio: SubharmonicRatio,
    /// `Q(φ) = ⟨Z(θ+φ)Z(θ)⟩`.
    pub q: FourierSeries,
    /// `V(φ) = (1/N) Σ_j Q((M/N)2πj + φ)`.
    pub v: FourierSeries,
    /// `K(φ) = ⟨Z'(θ+φ)Z'(θ)⟩`.
    pub k: FourierSeries,
    /// `S(φ)`, the N:M average of K.
    pub s: FourierSeries,
    /// `V(0)`, the energy of Y.
    pub v0: f64,
    /// `min V`.
    pub v_star: f64,
    /// `argmin V` in `[0, 2π/N)`.
    pub phi_star: f64,
    /// `S(0)`, the energy of `Y_φ`.
    pub s0: f64,
    /// `min S` (exposed for completeness).
    pub s_star: f64,
}

pub fn structure_functions(z: &FourierSeries, ratio: SubharmonicRatio) -> StructureFunctions {
    let q = autocorrelation(z, 1, 0);
    let v = autocorrelation(z, ratio.n as usize, 0);
    let k = autocorrelation(z, 1, 1);
    let s = autocorrelation(z, ratio.n as usize, 1);
    let period = ratio.phase_period();
    let (phi_star, v_star) = v.argmin(period);
    let (_, s_star) = s.argmin(period);
    StructureFunctions {
        ratio,
        v0: v.eval(0.0),
        s0: s.eval(0.0),
        q,
        v,
        k,
        s,
        v_star,
        phi_star,
        s_star,
    }
}

/// `Λ(φ) = ⟨Z(Mθ + φ) v(Nθ)⟩` with its extrema.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InteractionFn {
    pub ratio: SubharmonicRatio,
    pub lambda: FourierSeries,
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
}

/// Fourier coefficients of Λ. PRC harmonic Nk pairs with input harmonic Mk.
pub fn interaction_series(
    z: &FourierSeries,
    v: &FourierSeries,
    ratio: SubharmonicRatio,
) -> FourierSeries {
    let (n, m) = (ratio.n as usize, ratio.m as usize);
    let kmax = (z.order() / n).min(v.order() / m);
    let mut a = vec![0.0; kmax * n];
    let mut b = vec![0.0; kmax * n];
    for k in 1..=kmax {
        let (za, zb) = (z.cos_coef(n * k), z.sin_coef(n * k));
        let (vc, vd) = (v.cos_coef(m * k), v.sin_coef(m * k));
        a[n * k - 1] = 0.5 * (za * vc + zb * vd);
        b[n * k - 1] = 0.5 * (zb * vc - za * vd);
    }
    FourierSeries::new(0.5 * z.a0() * v.a0(), a, b).expect("finite coefficients")
}

pub fn interaction(z: &FourierSeries, v: &FourierSeries, ratio: SubharmonicRatio) -> InteractionFn {
    InteractionFn::from_series(interaction_series(z, v, ratio), ratio)
}

impl InteractionFn {
    pub fn from_series(lambda: FourierSeries, ratio: SubharmonicRatio) -> Self {
        let period = ratio.phase_period();
        let (phi_plus, lambda_max) = lambda.argmax(period);
        let (phi_minus, lambda_min) = lambda.argmin(period);
        Self {
            ratio,
            lambda,
            phi_plus,
            phi_minus,
            lambda_max,
            lambda_min,
        }
    }

    pub fn eval(&self, phi: f64) -> f64 {
        self.lambda.eval(phi)
    }

    pub fn slope(&self, phi: f64) -> f64 {
        self.lambda.derivative().eval(phi)
    }

    /// `Λ_max − Λ_min`, the width of the locking range in detuning.
    pub fn range_width(&self) -> f64 {
        self.lambda_max - self.lambda_min
    }

    /// Whether detuning Δω admits a fixed point: `−Λ_max ≤ Δω ≤ −Λ_min`.
    pub fn admits(&self, detuning: f64) -> bool {
        -self.lambda_max <= detuning && detuning <= -self.lambda_min
    }

    /// Natural-frequency interval locked at target Ω: `[Ω − Λ_max, Ω − Λ_min]`.
    pub fn locking_range(&self, target: f64) -> (f64, f64) {
        (target - self.lambda_max, target - self.lambda_min)
    }
}

/// Trapezoid quadrature of `⟨Z(Mθ + φ) v(Nθ)⟩` on `grid` nodes at each φ.
pub fn interaction_quadrature(
    z: &FourierSeries,
    v: &FourierSeries,
    ratio: SubharmonicRatio,
    nodes: usize,
    phis: &[f64],
) -> Result<Vec<f64>> {
    if nodes < 2048 {
        return Err(Error::InvalidParameter(format!(
            "quadrature needs at least 2048 nodes, got {nodes}"
        )));
    }
    let (n, m) = (ratio.n as f64, ratio.m as f64);
    let vs: Vec<f64> = grid(nodes).map(|t| v.eval(n * t)).collect();
    Ok(phis
        .iter()
        .map(|&phi| {
            grid(nodes)
                .zip(&vs)
                .map(|(t, vv)| z.eval(m * t + phi) * vv)
                .sum::<f64>()
                / nodes as f64
        })
        .collect())
}

/// True iff some PRC/input coefficient pairing contributes to Λ, i.e. Λ is
/// not identically zero.
pub fn entrainment_exists(z: &FourierSeries, v: &FourierSeries, ratio: SubharmonicRatio) -> bool {
    interaction_series(z, v, ratio).max_coefficient() > EXISTENCE_TOL
}

/// Roots of `Δω + Λ(φ) = 0` in `[0, 2π)`, split by stability.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct FixedPoints {
    pub stable: Vec<f64>,
    pub unstable: Vec<f64>,
}

impl FixedPoints {
    pub fn is_empty(&self) -> bool {
        self.stable.is_empty() && self.unstable.is_empty()
    }
}

/// Bracketing on a [`SCAN_GRID`] grid plus bisection; a root is stable iff
/// `Λ' < 0` there.
pub fn fixed_points(lambda: &InteractionFn, detuning: f64) -> FixedPoints {
    let f = &lambda.lambda;
    let df = f.derivative();
    let g = |phi: f64| detuning + f.eval(phi);
    let h = TAU / SCAN_GRID as f64;
    let vals: Vec<f64> = (0..SCAN_GRID).map(|j| g(j as f64 * h)).collect();
    let mut out = FixedPoints::default();
    let push = |root: f64, out: &mut FixedPoints| {
        let root = root.rem_euclid(TAU);
        if df.eval(root) < 0.0 {
            out.stable.push(root);
        } else {
            out.unstable.push(root);
        }
    };
    for j in 0..SCAN_GRID {
        let (g0, g1) = (vals[j], vals[(j + 1) % SCAN_GRID]);
        let lo0 = j as f64 * h;
        if g0 == 0.0 {
            push(lo0, &mut out);
            continue;
        }
        if g0 * g1 < 0.0 {
            let (mut lo, mut hi) = (lo0, lo0 + h);
            let mut glo = g0;
            while hi - lo > 1e-13 {
                let mid = 0.5 * (lo + hi);
                let gm = g(mid);
                if gm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if (gm < 0.0) == (glo < 0.0) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            push(0.5 * (lo + hi), &mut out);
        }
    }
    out.stable.sort_by(f64::total_cmp);
    out.unstable.sort_by(f64::total_cmp);
    out
}
