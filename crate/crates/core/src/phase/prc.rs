//! Phase response curves by the projection and adjoint methods.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::monodromy::{monodromy_from, steps_per_period};
use super::PhaseModel;
use crate::error::{Error, Result};
use crate::fourier::{FourierSeries, DEFAULT_ORDER};
use crate::ode::{LimitCycle, Rk4, VectorField};
use crate::par::{self, Execution};

/// Grid and fit settings shared by both PRC engines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrcOptions {
    pub n_phases: usize,
    pub order: usize,
    pub exec: ExecutionSetting,
}

/// Serializable mirror of [`Execution`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionSetting {
    Sequential,
    #[default]
    Parallel,
}

impl From<ExecutionSetting> for Execution {
    fn from(e: ExecutionSetting) -> Self {
        match e {
            ExecutionSetting::Sequential => Execution::Sequential,
            ExecutionSetting::Parallel => Execution::Parallel,
        }
    }
}

impl From<Execution> for ExecutionSetting {
    fn from(e: Execution) -> Self {
        match e {
            Execution::Sequential => ExecutionSetting::Sequential,
            Execution::Parallel => ExecutionSetting::Parallel,
        }
    }
}

impl Default for PrcOptions {
    fn default() -> Self {
        Self {
            n_phases: 512,
            order: DEFAULT_ORDER,
            exec: ExecutionSetting::Parallel,
        }
    }
}

impl PrcOptions {
    fn validate(&self) -> Result<()> {
        if self.n_phases < 8 {
            return Err(Error::InvalidParameter(format!(
                "PRC grid too small: {}",
                self.n_phases
            )));
        }
        Ok(())
    }

    fn fit_order(&self) -> usize {
        self.order.min((self.n_phases - 1) / 2)
    }
}

/// One grid phase of the projection method.
#[derive(Clone, Debug)]
pub struct PrcPoint {
    pub theta: f64,
    /// Normalized gradient of the asymptotic phase, `m·f = ω`.
    pub gradient: Vec<f64>,
    pub velocity: Vec<f64>,
    pub z: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Per-phase gradients from the monodromy left eigenvector at multiplier 1.
pub fn projection_points<F: VectorField + ?Sized>(
    field: &F,
    cycle: &LimitCycle,
    opts: &PrcOptions,
) -> Result<Vec<PrcPoint>> {
    opts.validate()?;
    let n = opts.n_phases;
    let k = cycle.resolution();
    let omega = cycle.omega();
    par::try_map_range(n, opts.exec.into(), |j| {
        let theta = TAU * j as f64 / n as f64;
        let start = if k.is_multiple_of(n) {
            cycle.samples()[j * (k / n)].clone()
        } else {
            cycle.state_at_phase(field, theta)
        };
        let mono = monodromy_from(field, cycle, theta, start)?;
        let mu: Vec<f64> = mono.left_eigenvector.iter().copied().collect();
        let proj = dot(&mu, &mono.velocity);
        let speed = mono.velocity.iter().map(|v| v * v).sum::<f64>().sqrt();
        if proj.abs() <= 1e-10 * speed {
            return Err(Error::SingularNormalization { theta, value: proj });
        }
        let gradient: Vec<f64> = mu.iter().map(|v| omega * v / proj).collect();
        let mut b = vec![0.0; cycle.dimension()];
        field.input_gain(&mono.start, &mut b);
        let z = dot(&gradient, &b);
        Ok(PrcPoint {
            theta,
            gradient,
            velocity: mono.velocity,
            z,
        })
    })
}

/// PRC by projection onto the unit-multiplier eigenvector of the monodromy
/// matrix at every grid phase.
pub fn prc_projection<F: VectorField + ?Sized>(
    field: &F,
    cycle: &LimitCycle,
    opts: &PrcOptions,
) -> Result<PhaseModel> {
    let points = projection_points(field, cycle, opts)?;
    let z: Vec<f64> = points.iter().map(|p| p.z).collect();
    let series = FourierSeries::fit(&z, opts.fit_order())?;
    PhaseModel::new(cycle.omega(), series)
}

/// Convergence details of the adjoint sweep.
#[derive(Clone, Debug)]
pub struct AdjointReport {
    pub periods: usize,
    pub residual: f64,
    /// Raw PRC values on the grid.
    pub samples: Vec<f64>,
    /// Adjoint solution at θ = 0 after convergence.
    pub m0: Vec<f64>,
    /// Adjoint solution propagated once more around the cycle from `m0`.
    pub m_period: Vec<f64>,
}

/// Periodicity tolerance of the adjoint sweep.
pub const ADJOINT_TOL: f64 = 1e-8;
const ADJOINT_MAX_PERIODS: usize = 60;

/// PRC by backward integration of the adjoint equation `ṁ = −Aᵀ m` over
/// repeated periods until `m` is periodic.
pub fn prc_adjoint<F: VectorField + ?Sized>(
    field: &F,
    cycle: &LimitCycle,
    opts: &PrcOptions,
) -> Result<PhaseModel> {
    let (model, _) = prc_adjoint_report(field, cycle, opts)?;
    Ok(model)
}

pub fn prc_adjoint_report<F: VectorField + ?Sized>(
    field: &F,
    cycle: &LimitCycle,
    opts: &PrcOptions,
) -> Result<(PhaseModel, AdjointReport)> {
    opts.validate()?;
    let d = cycle.dimension();
    let n_phases = opts.n_phases;
    let period = cycle.period();
    let omega = cycle.omega();
    let per_phase = steps_per_period(period / n_phases as f64, cycle.dt());
    let n = per_phase * n_phases;
    let h = period / n as f64;

    // Jacobians on the half-step grid t_i = i·h/2, i = 0..=2n
    let mut x = cycle.base_point().to_vec();
    let mut rk = Rk4::new(d);
    let mut jacs = Vec::with_capacity((2 * n + 1) * d * d);
    let mut gains = Vec::with_capacity(n_phases);
    let mut dx = vec![0.0; d];
    let mut jac = vec![0.0; d * d];
    let mut f0 = vec![0.0; d];
    field.eval(&x, 0.0, &mut f0);
    for i in 0..=2 * n {
        field.eval_with_jacobian(&x, cycle.scales(), &mut dx, &mut jac);
        jacs.extend_from_slice(&jac);
        if i % (2 * per_phase) == 0 && i < 2 * n {
            let mut b = vec![0.0; d];
            field.input_gain(&x, &mut b);
            gains.push(b);
        }
        if i < 2 * n {
            rk.step_free(field, &mut x, 0.5 * h);
        }
    }
    let a_t = |i: usize, m: &[f64], out: &mut [f64]| {
        // out = A(t_i)ᵀ m
        let a = &jacs[i * d * d..(i + 1) * d * d];
        for j in 0..d {
            out[j] = (0..d).map(|l| a[l * d + j] * m[l]).sum();
        }
    };

    let mono = monodromy_from(field, cycle, 0.0, cycle.base_point().to_vec())?;
    let normalize = |m: &mut Vec<f64>| -> Option<()> {
        let p = dot(m, &f0);
        if p.abs() < f64::MIN_POSITIVE || !p.is_finite() {
            return None;
        }
        for v in m.iter_mut() {
            *v *= omega / p;
        }
        Some(())
    };
    let mut m_cur: Vec<f64> = mono.left_eigenvector.iter().copied().collect();
    normalize(&mut m_cur).ok_or(Error::SingularNormalization {
        theta: 0.0,
        value: 0.0,
    })?;
    let scale0 = m_cur.iter().map(|v| v.abs()).fold(0.0, f64::max);

    let mut record = vec![vec![0.0; d]; n_phases];
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (
        vec![0.0; d],
        vec![0.0; d],
        vec![0.0; d],
        vec![0.0; d],
        vec![0.0; d],
    );
    let mut residual = f64::INFINITY;
    for pass in 1..=ADJOINT_MAX_PERIODS {
        // s = T − t runs forward; dm/ds = A(T − s)ᵀ m
        let mut m = m_cur.clone();
        for step in 0..n {
            let i0 = 2 * (n - step);
            if i0.is_multiple_of(2 * per_phase) {
                record[(i0 / (2 * per_phase)) % n_phases].copy_from_slice(&m);
            }
            a_t(i0, &m, &mut k1);
            for j in 0..d {
                tmp[j] = m[j] + 0.5 * h * k1[j];
            }
            a_t(i0 - 1, &tmp, &mut k2);
            for j in 0..d {
                tmp[j] = m[j] + 0.5 * h * k2[j];
            }
            a_t(i0 - 1, &tmp, &mut k3);
            for j in 0..d {
                tmp[j] = m[j] + h * k3[j];
            }
            a_t(i0 - 2, &tmp, &mut k4);
            for j in 0..d {
                m[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
        }
        record[0].copy_from_slice(&m);
        let size = m.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if !size.is_finite() || size > 1e8 * scale0 {
            return Err(Error::AdjointUnstable {
                periods: pass,
                residual: size / scale0,
            });
        }
        let raw_end = m.clone();
        if normalize(&mut m).is_none() {
            return Err(Error::AdjointUnstable {
                periods: pass,
                residual: f64::INFINITY,
            });
        }
        let diff = m
            .iter()
            .zip(&m_cur)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        residual = diff / m.iter().map(|v| v.abs()).fold(0.0, f64::max);
        log::debug!("adjoint pass {pass}: residual {residual:e}");
        let converged = residual <= ADJOINT_TOL;
        if converged {
            let samples: Vec<f64> = record.iter().zip(&gains).map(|(m, b)| dot(m, b)).collect();
            let series = FourierSeries::fit(&samples, opts.fit_order())?;
            let model = PhaseModel::new(omega, series)?;
            let report = AdjointReport {
                periods: pass,
                residual,
                samples,
                m0: m_cur,
                m_period: raw_end,
            };
            return Ok((model, report));
        }
        m_cur = m;
    }
    Err(Error::AdjointUnstable {
        periods: ADJOINT_MAX_PERIODS,
        residual,
    })
}

/// Projection-method phase model that keeps a handle on its cycle.
pub fn reduce<F: VectorField + ?Sized>(
    field: &F,
    cycle: Arc<LimitCycle>,
    opts: &PrcOptions,
) -> Result<PhaseModel> {
    let model = prc_projection(field, &cycle, opts)?;
    Ok(model.with_source(cycle))
}
