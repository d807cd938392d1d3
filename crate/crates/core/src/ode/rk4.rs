//! Classical fixed-step fourth-order Runge–Kutta.

use serde::Serialize;

use super::field::VectorField;
use crate::error::{Error, Result};

/// Reusable RK4 workspace for one field dimension.
#[derive(Clone, Debug)]
pub struct Rk4 {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4 {
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![0.0; dim],
            k2: vec![0.0; dim],
            k3: vec![0.0; dim],
            k4: vec![0.0; dim],
            tmp: vec![0.0; dim],
        }
    }

    /// Advances `x` from `t` to `t + h` under input `u(t)`.
    pub fn step<F, U>(&mut self, field: &F, t: f64, x: &mut [f64], h: f64, u: &U)
    where
        F: VectorField + ?Sized,
        U: Fn(f64) -> f64 + ?Sized,
    {
        self.step_with(field, x, h, [u(t), u(t + 0.5 * h), u(t + h)]);
    }

    /// Step with the input already evaluated at the start, midpoint and end.
    pub fn step_with<F: VectorField + ?Sized>(
        &mut self,
        field: &F,
        x: &mut [f64],
        h: f64,
        inputs: [f64; 3],
    ) {
        let n = x.len();
        let half = 0.5 * h;
        let [u0, um, u1] = inputs;
        field.eval(x, u0, &mut self.k1);
        for i in 0..n {
            self.tmp[i] = x[i] + half * self.k1[i];
        }
        field.eval(&self.tmp, um, &mut self.k2);
        for i in 0..n {
            self.tmp[i] = x[i] + half * self.k2[i];
        }
        field.eval(&self.tmp, um, &mut self.k3);
        for i in 0..n {
            self.tmp[i] = x[i] + h * self.k3[i];
        }
        field.eval(&self.tmp, u1, &mut self.k4);
        for i in 0..n {
            x[i] += h / 6.0 * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
    }

    /// Autonomous step (`u ≡ 0`).
    pub fn step_free<F: VectorField + ?Sized>(&mut self, field: &F, x: &mut [f64], h: f64) {
        self.step(field, 0.0, x, h, &|_| 0.0);
    }
}

/// Uniformly sampled solution of a forced integration.
#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub dt: f64,
    pub states: Vec<Vec<f64>>,
    pub inputs: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn last(&self) -> &[f64] {
        self.states
            .last()
            .expect("trajectory holds at least the initial state")
    }
}

/// Integrates `steps` RK4 steps of size `dt` from `x0`, recording every state.
pub fn integrate<F, U>(field: &F, x0: &[f64], u: U, dt: f64, steps: usize) -> Result<Trajectory>
where
    F: VectorField + ?Sized,
    U: Fn(f64) -> f64,
{
    check_setup(field, x0, dt)?;
    let mut rk = Rk4::new(x0.len());
    let mut x = x0.to_vec();
    let mut states = Vec::with_capacity(steps + 1);
    let mut inputs = Vec::with_capacity(steps + 1);
    states.push(x.clone());
    inputs.push(u(0.0));
    for k in 0..steps {
        let t = k as f64 * dt;
        rk.step(field, t, &mut x, dt, &u);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged {
                step: k + 1,
                time: t + dt,
            });
        }
        states.push(x.clone());
        inputs.push(u(t + dt));
    }
    Ok(Trajectory { dt, states, inputs })
}

/// Like [`integrate`] but keeps only the final state.
pub fn integrate_final<F, U>(field: &F, x0: &[f64], u: U, dt: f64, steps: usize) -> Result<Vec<f64>>
where
    F: VectorField + ?Sized,
    U: Fn(f64) -> f64,
{
    check_setup(field, x0, dt)?;
    let mut rk = Rk4::new(x0.len());
    let mut x = x0.to_vec();
    for k in 0..steps {
        rk.step(field, k as f64 * dt, &mut x, dt, &u);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationDiverged {
                step: k + 1,
                time: (k + 1) as f64 * dt,
            });
        }
    }
    Ok(x)
}

pub(crate) fn check_setup<F: VectorField + ?Sized>(field: &F, x0: &[f64], dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "step size must be positive, got {dt}"
        )));
    }
    if x0.len() != field.dimension() {
        return Err(Error::InvalidParameter(format!(
            "state has {} components, field expects {}",
            x0.len(),
            field.dimension()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "initial state must be finite".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::field::RadialClock;

    struct Decay;

    impl VectorField for Decay {
        fn dimension(&self) -> usize {
            1
        }
        fn eval(&self, x: &[f64], u: f64, dx: &mut [f64]) {
            dx[0] = -x[0] + u;
        }
    }

    struct Blowup;

    impl VectorField for Blowup {
        fn dimension(&self) -> usize {
            1
        }
        fn eval(&self, x: &[f64], _u: f64, dx: &mut [f64]) {
            dx[0] = x[0] * x[0];
        }
    }

    #[test]
    fn linear_decay() {
        let tr = integrate(&Decay, &[1.0], |_| 0.0, 0.1, 10).unwrap();
        assert_eq!(tr.len(), 11);
        assert_eq!(tr.states[0], vec![1.0]);
        assert!((tr.last()[0] - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn input_is_recorded() {
        let tr = integrate(&Decay, &[0.0], |t| t, 0.5, 4).unwrap();
        assert_eq!(tr.inputs, vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn radial_clock_stays_on_unit_circle() {
        let dt = 0.001;
        let steps = (std::f64::consts::TAU / dt).round() as usize;
        let tr = integrate(&RadialClock, &[1.0, 0.0], |_| 0.0, dt, steps).unwrap();
        let worst = tr
            .states
            .iter()
            .map(|x| (x[0].hypot(x[1]) - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn divergence_names_the_step() {
        let err = integrate(&Blowup, &[1.0], |_| 0.0, 0.3, 100).unwrap_err();
        assert!(matches!(err, Error::IntegrationDiverged { step, .. } if step > 1 && step < 100));
    }

    #[test]
    fn rejects_bad_setup() {
        assert!(integrate(&Decay, &[1.0], |_| 0.0, 0.0, 1).is_err());
        assert!(integrate(&Decay, &[1.0, 2.0], |_| 0.0, 0.1, 1).is_err());
    }
}
