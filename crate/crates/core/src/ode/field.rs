//! Vector fields `ẋ = f(x, u)` with a scalar additive input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative step for central-difference Jacobians.
pub const FD_STEP: f64 = 1e-6;

/// A smooth vector field driven by a scalar input `u`.
pub trait VectorField: Send + Sync {
    fn dimension(&self) -> usize;

    /// Writes `f(x, u)` into `dx`.
    fn eval(&self, x: &[f64], u: f64, dx: &mut [f64]);

    /// Index of the state equation that receives the input.
    fn input_channel(&self) -> usize {
        0
    }

    /// `∂f/∂u` at `x` (the input direction column).
    fn input_gain(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dimension();
        let mut hi = vec![0.0; n];
        let mut lo = vec![0.0; n];
        self.eval(x, FD_STEP, &mut hi);
        self.eval(x, -FD_STEP, &mut lo);
        for i in 0..n {
            out[i] = (hi[i] - lo[i]) / (2.0 * FD_STEP);
        }
    }

    /// `f(x, 0)` and its Jacobian in row-major order (`jac[i * n + j] = ∂f_i/∂x_j`).
    /// `scales` sets the per-component finite-difference step.
    fn eval_with_jacobian(&self, x: &[f64], scales: &[f64], dx: &mut [f64], jac: &mut [f64]) {
        self.eval(x, 0.0, dx);
        fd_jacobian(self, x, scales, jac);
    }

    /// Named parameter values, for manifests.
    fn parameters(&self) -> Vec<(String, f64)> {
        Vec::new()
    }

    fn state_names(&self) -> Vec<String> {
        (1..=self.dimension()).map(|i| format!("x{i}")).collect()
    }
}

/// Central-difference Jacobian of `f(·, 0)` with step `FD_STEP · scales[j]`.
pub fn fd_jacobian<F: VectorField + ?Sized>(field: &F, x: &[f64], scales: &[f64], jac: &mut [f64]) {
    let n = field.dimension();
    let mut xp = x.to_vec();
    let mut hi = vec![0.0; n];
    let mut lo = vec![0.0; n];
    for j in 0..n {
        let h = FD_STEP * scales.get(j).copied().unwrap_or(1.0).max(f64::MIN_POSITIVE);
        xp[j] = x[j] + h;
        field.eval(&xp, 0.0, &mut hi);
        xp[j] = x[j] - h;
        field.eval(&xp, 0.0, &mut lo);
        xp[j] = x[j];
        for i in 0..n {
            jac[i * n + j] = (hi[i] - lo[i]) / (2.0 * h);
        }
    }
}

/// Hodgkin–Huxley membrane parameters (mV, mS/cm², μA/cm², μF/cm²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HhParameters {
    pub v_na: f64,
    pub v_k: f64,
    pub v_l: f64,
    pub g_na: f64,
    pub g_k: f64,
    pub g_l: f64,
    pub i_b: f64,
    pub c: f64,
}

impl Default for HhParameters {
    fn default() -> Self {
        Self {
            v_na: 50.0,
            v_k: -77.0,
            v_l: -54.4,
            g_na: 120.0,
            g_k: 36.0,
            g_l: 0.3,
            i_b: 10.0,
            c: 1.0,
        }
    }
}

impl HhParameters {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.v_na, self.v_k, self.v_l, self.g_na, self.g_k, self.g_l, self.i_b, self.c,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "HH parameters must be finite".into(),
            ));
        }
        if self.g_na < 0.0 || self.g_k < 0.0 || self.g_l < 0.0 {
            return Err(Error::InvalidParameter(
                "HH conductances must be nonnegative".into(),
            ));
        }
        if self.c <= 0.0 {
            return Err(Error::InvalidParameter(
                "HH capacitance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// `x / (1 - e^{-x})` and its derivative, continuous through x = 0.
fn vtrap(x: f64) -> (f64, f64) {
    if x.abs() < 1e-4 {
        (1.0 + 0.5 * x + x * x / 12.0, 0.5 + x / 6.0)
    } else {
        let e = (-x).exp();
        let d = -(-x).exp_m1();
        (x / d, (d - x * e) / (d * d))
    }
}

#[derive(Clone, Copy, Debug)]
struct Rates {
    am: f64,
    bm: f64,
    ah: f64,
    bh: f64,
    an: f64,
    bn: f64,
    // derivatives with respect to V
    dam: f64,
    dbm: f64,
    dah: f64,
    dbh: f64,
    dan: f64,
    dbn: f64,
}

fn rates(v: f64) -> Rates {
    let (tm, dtm) = vtrap((v + 40.0) / 10.0);
    let (tn, dtn) = vtrap((v + 55.0) / 10.0);
    let bm = 4.0 * (-(v + 65.0) / 18.0).exp();
    let ah = 0.07 * (-(v + 65.0) / 20.0).exp();
    let bh = 1.0 / (1.0 + (-(v + 35.0) / 10.0).exp());
    let bn = 0.125 * (-(v + 65.0) / 80.0).exp();
    Rates {
        am: tm,
        bm,
        ah,
        bh,
        an: 0.1 * tn,
        bn,
        dam: dtm / 10.0,
        dbm: -bm / 18.0,
        dah: -ah / 20.0,
        dbh: bh * (1.0 - bh) / 10.0,
        dan: 0.01 * dtn,
        dbn: -bn / 80.0,
    }
}

/// The four-variable Hodgkin–Huxley neuron, state `(V, m, h, n)`, with the
/// input added to the membrane current.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HodgkinHuxley {
    p: HhParameters,
}

impl HodgkinHuxley {
    pub fn new(p: HhParameters) -> Result<Self> {
        p.validate()?;
        Ok(Self { p })
    }

    pub fn nominal() -> Self {
        Self {
            p: HhParameters::default(),
        }
    }

    pub fn params(&self) -> &HhParameters {
        &self.p
    }

    /// A depolarized resting-like state that spikes immediately.
    pub fn default_initial_state() -> Vec<f64> {
        vec![-65.0, 0.05, 0.6, 0.32]
    }

    fn rhs(&self, x: &[f64], u: f64, r: &Rates, dx: &mut [f64]) {
        let p = &self.p;
        let (v, m, h, n) = (x[0], x[1], x[2], x[3]);
        let i_na = p.g_na * m * m * m * h * (v - p.v_na);
        let i_k = p.g_k * n * n * n * n * (v - p.v_k);
        let i_l = p.g_l * (v - p.v_l);
        dx[0] = (p.i_b + u - i_na - i_k - i_l) / p.c;
        dx[1] = r.am * (1.0 - m) - r.bm * m;
        dx[2] = r.ah * (1.0 - h) - r.bh * h;
        dx[3] = r.an * (1.0 - n) - r.bn * n;
    }
}

impl VectorField for HodgkinHuxley {
    fn dimension(&self) -> usize {
        4
    }

    fn eval(&self, x: &[f64], u: f64, dx: &mut [f64]) {
        self.rhs(x, u, &rates(x[0]), dx);
    }

    fn input_gain(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        out[0] = 1.0 / self.p.c;
    }

    fn eval_with_jacobian(&self, x: &[f64], _scales: &[f64], dx: &mut [f64], jac: &mut [f64]) {
        let p = &self.p;
        let (v, m, h, n) = (x[0], x[1], x[2], x[3]);
        let r = rates(v);
        self.rhs(x, 0.0, &r, dx);
        let m3 = m * m * m;
        let n4 = n * n * n * n;

        jac[0] = -(p.g_na * m3 * h + p.g_k * n4 + p.g_l) / p.c;
        jac[1] = -3.0 * p.g_na * m * m * h * (v - p.v_na) / p.c;
        jac[2] = -p.g_na * m3 * (v - p.v_na) / p.c;
        jac[3] = -4.0 * p.g_k * n * n * n * (v - p.v_k) / p.c;

        jac[4] = r.dam * (1.0 - m) - r.dbm * m;
        jac[5] = -(r.am + r.bm);
        jac[6] = 0.0;
        jac[7] = 0.0;

        jac[8] = r.dah * (1.0 - h) - r.dbh * h;
        jac[9] = 0.0;
        jac[10] = -(r.ah + r.bh);
        jac[11] = 0.0;

        jac[12] = r.dan * (1.0 - n) - r.dbn * n;
        jac[13] = 0.0;
        jac[14] = 0.0;
        jac[15] = -(r.an + r.bn);
    }

    fn parameters(&self) -> Vec<(String, f64)> {
        let p = &self.p;
        [
            ("v_na", p.v_na),
            ("v_k", p.v_k),
            ("v_l", p.v_l),
            ("g_na", p.g_na),
            ("g_k", p.g_k),
            ("g_l", p.g_l),
            ("i_b", p.i_b),
            ("c", p.c),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    fn state_names(&self) -> Vec<String> {
        ["V", "m", "h", "n"].iter().map(|s| s.to_string()).collect()
    }
}

/// Planar clock with an attracting unit circle:
/// `ẋ = x(1 − r²) − y + u`, `ẏ = y(1 − r²) + x`. Period 2π, PRC `−sin θ`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RadialClock;

impl VectorField for RadialClock {
    fn dimension(&self) -> usize {
        2
    }

    fn eval(&self, x: &[f64], u: f64, dx: &mut [f64]) {
        let r2 = x[0] * x[0] + x[1] * x[1];
        dx[0] = x[0] * (1.0 - r2) - x[1] + u;
        dx[1] = x[1] * (1.0 - r2) + x[0];
    }
}
