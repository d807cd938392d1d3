//! Variational equation along the cycle and the monodromy matrix.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::ode::{LimitCycle, VectorField};

/// Tolerance for finding the trivial multiplier in the spectrum.
pub const UNIT_MULTIPLIER_TOL: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct MonodromyResult {
    /// Phase the period map starts from.
    pub theta0: f64,
    /// `Φ(T)` for the flow started at `γ(θ0/ω)`.
    pub matrix: DMatrix<f64>,
    /// Floquet multipliers sorted by decreasing modulus.
    pub multipliers: Vec<Complex<f64>>,
    /// Unit eigenvector of `Mᵀ` at multiplier 1 (sign: positive projection on `f`).
    pub left_eigenvector: DVector<f64>,
    /// `γ(θ0/ω)`.
    pub start: Vec<f64>,
    /// `f(γ(θ0/ω), 0)`.
    pub velocity: Vec<f64>,
}

impl MonodromyResult {
    /// Multiplier closest to 1.
    pub fn unit_multiplier(&self) -> Complex<f64> {
        *self
            .multipliers
            .iter()
            .min_by(|a, b| (*a - 1.0).norm().total_cmp(&(*b - 1.0).norm()))
            .expect("non-empty spectrum")
    }

    pub fn determinant(&self) -> f64 {
        self.matrix.determinant()
    }
}

/// Integrates `ẋ = f(x, 0)`, `Φ̇ = A(x)Φ` over one period from `x0` with `n`
/// RK4 steps; returns `(x(T), Φ(T))` with `Φ` row-major.
pub(crate) fn propagate<F: VectorField + ?Sized>(
    field: &F,
    x0: &[f64],
    scales: &[f64],
    period: f64,
    n: usize,
) -> (Vec<f64>, Vec<f64>) {
    let d = x0.len();
    let h = period / n as f64;
    let mut x = x0.to_vec();
    let mut phi = vec![0.0; d * d];
    for i in 0..d {
        phi[i * d + i] = 1.0;
    }
    let mut ws = AugWork::new(d);
    for _ in 0..n {
        ws.step(field, scales, &mut x, &mut phi, h);
    }
    (x, phi)
}

struct AugWork {
    d: usize,
    kx: [Vec<f64>; 4],
    kp: [Vec<f64>; 4],
    xs: Vec<f64>,
    ps: Vec<f64>,
    jac: Vec<f64>,
}

impl AugWork {
    fn new(d: usize) -> Self {
        let v = || vec![0.0; d];
        let m = || vec![0.0; d * d];
        Self {
            d,
            kx: [v(), v(), v(), v()],
            kp: [m(), m(), m(), m()],
            xs: v(),
            ps: m(),
            jac: m(),
        }
    }

    fn stage<F: VectorField + ?Sized>(&mut self, field: &F, scales: &[f64], s: usize) {
        let d = self.d;
        field.eval_with_jacobian(&self.xs, scales, &mut self.kx[s], &mut self.jac);
        let kp = &mut self.kp[s];
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for l in 0..d {
                    acc += self.jac[i * d + l] * self.ps[l * d + j];
                }
                kp[i * d + j] = acc;
            }
        }
    }

    fn step<F: VectorField + ?Sized>(
        &mut self,
        field: &F,
        scales: &[f64],
        x: &mut [f64],
        phi: &mut [f64],
        h: f64,
    ) {
        let coeffs = [0.0, 0.5, 0.5, 1.0];
        for s in 0..4 {
            let c = coeffs[s] * h;
            if s == 0 {
                self.xs.copy_from_slice(x);
                self.ps.copy_from_slice(phi);
            } else {
                for i in 0..x.len() {
                    self.xs[i] = x[i] + c * self.kx[s - 1][i];
                }
                for i in 0..phi.len() {
                    self.ps[i] = phi[i] + c * self.kp[s - 1][i];
                }
            }
            self.stage(field, scales, s);
        }
        for i in 0..x.len() {
            x[i] += h / 6.0
                * (self.kx[0][i] + 2.0 * self.kx[1][i] + 2.0 * self.kx[2][i] + self.kx[3][i]);
        }
        for i in 0..phi.len() {
            phi[i] += h / 6.0
                * (self.kp[0][i] + 2.0 * self.kp[1][i] + 2.0 * self.kp[2][i] + self.kp[3][i]);
        }
    }
}

/// Number of RK4 steps covering one period with step at most `dt`.
pub(crate) fn steps_per_period(period: f64, dt: f64) -> usize {
    (period / dt).ceil().max(1.0) as usize
}

/// Monodromy matrix of the cycle for the period map starting at phase `theta0`.
pub fn monodromy<F: VectorField + ?Sized>(
    field: &F,
    cycle: &LimitCycle,
    theta0: f64,
) -> Result<MonodromyResult> {
    let start = cycle.state_at_phase(field, theta0);
    monodromy_from(field, cycle, theta0, start)
}

pub(crate) fn monodromy_from<F: VectorField + ?Sized>(
    field: &F,
    cycle: &LimitCycle,
    theta0: f64,
    start: Vec<f64>,
) -> Result<MonodromyResult> {
    let d = cycle.dimension();
    let n = steps_per_period(cycle.period(), cycle.dt());
    let (_, phi) = propagate(field, &start, cycle.scales(), cycle.period(), n);
    let matrix = DMatrix::from_row_slice(d, d, &phi);
    let mut multipliers: Vec<Complex<f64>> = matrix
        .clone()
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect();
    multipliers.sort_by(|a, b| b.norm().total_cmp(&a.norm()));
    let closest = multipliers
        .iter()
        .map(|z| (z - 1.0).norm())
        .fold(f64::INFINITY, f64::min);
    if closest > UNIT_MULTIPLIER_TOL {
        return Err(Error::DegenerateMonodromy {
            tolerance: UNIT_MULTIPLIER_TOL,
            closest,
        });
    }
    let mut velocity = vec![0.0; d];
    field.eval(&start, 0.0, &mut velocity);
    let mut mu = unit_left_eigenvector(&matrix, &velocity)
        .ok_or(Error::EigenvectorNotConverged { theta: theta0 })?;
    let proj: f64 = mu.iter().zip(&velocity).map(|(a, b)| a * b).sum();
    if proj < 0.0 {
        mu = -mu;
    }
    Ok(MonodromyResult {
        theta0,
        matrix,
        multipliers,
        left_eigenvector: mu,
        start,
        velocity,
    })
}

/// Inverse iteration on `Mᵀ − σI` with shift σ = 1.
fn unit_left_eigenvector(m: &DMatrix<f64>, guess: &[f64]) -> Option<DVector<f64>> {
    let d = m.nrows();
    let mt = m.transpose();
    let scale = m.norm().max(1.0);
    let mut x = DVector::from_iterator(d, guess.iter().map(|v| v + 1e-3 * v.abs().max(1.0)));
    x /= x.norm();
    for shift in [1.0, 1.0 + 1e-10 * scale, 1.0 - 1e-8 * scale] {
        let a = &mt - DMatrix::identity(d, d) * shift;
        let lu = a.lu();
        let mut cur = x.clone();
        for _ in 0..100 {
            let Some(mut y) = lu.solve(&cur) else { break };
            let norm = y.norm();
            if !norm.is_finite() || norm == 0.0 {
                break;
            }
            y /= norm;
            if y.dot(&cur) < 0.0 {
                y = -y;
            }
            let change = (&y - &cur).norm();
            cur = y;
            if change <= 1e-12 {
                return Some(cur);
            }
        }
    }
    None
}
