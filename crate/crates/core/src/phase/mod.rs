//! Phase reduction: monodromy matrices and phase response curves.

mod monodromy;
mod prc;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use monodromy::{monodromy, MonodromyResult, UNIT_MULTIPLIER_TOL};
pub use prc::{
    prc_adjoint, prc_adjoint_report, prc_projection, projection_points, reduce, AdjointReport,
    ExecutionSetting, PrcOptions, PrcPoint, ADJOINT_TOL,
};

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::ode::LimitCycle;

/// Reduced oscillator `ψ̇ = ω + Z(ψ) u`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct PhaseModel {
    omega: f64,
    #[serde(rename = "Z")]
    z: FourierSeries,
    #[serde(skip)]
    source: Option<Arc<LimitCycle>>,
}

#[derive(Deserialize)]
struct RawModel {
    omega: f64,
    #[serde(rename = "Z")]
    z: FourierSeries,
}

impl TryFrom<RawModel> for PhaseModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        PhaseModel::new(raw.omega, raw.z)
    }
}

impl PartialEq for PhaseModel {
    fn eq(&self, other: &Self) -> bool {
        self.omega == other.omega && self.z == other.z
    }
}

impl PhaseModel {
    pub fn new(omega: f64, z: FourierSeries) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "natural frequency must be positive, got {omega}"
            )));
        }
        Ok(Self {
            omega,
            z,
            source: None,
        })
    }

    pub fn with_source(mut self, cycle: Arc<LimitCycle>) -> Self {
        self.source = Some(cycle);
        self
    }

    /// Natural frequency ω (rad per time unit).
    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.omega
    }

    /// Phase response curve.
    pub fn prc(&self) -> &FourierSeries {
        &self.z
    }

    pub fn source(&self) -> Option<&Arc<LimitCycle>> {
        self.source.as_ref()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
