//! JSON model configuration.

use serde::{Deserialize, Serialize};

use super::field::{HhParameters, HodgkinHuxley, RadialClock, VectorField};
use super::limit_cycle::{find_limit_cycle, CycleOptions, LimitCycle};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    HodgkinHuxley,
    RadialClock,
}

/// `{"model":"hodgkin-huxley","params":{...},"dt":0.001,"settle_periods":20,"resolution":4096}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub model: ModelKind,
    #[serde(default)]
    pub params: HhParameters,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_settle")]
    pub settle_periods: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<Vec<f64>>,
}

fn default_dt() -> f64 {
    0.001
}

fn default_settle() -> f64 {
    20.0
}

fn default_resolution() -> usize {
    4096
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::HodgkinHuxley,
            params: HhParameters::default(),
            dt: default_dt(),
            settle_periods: default_settle(),
            resolution: default_resolution(),
            initial_state: None,
        }
    }
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.settle_periods >= 0.0) {
            return Err(Error::InvalidParameter(
                "settle_periods must be nonnegative".into(),
            ));
        }
        if self.resolution < 16 {
            return Err(Error::InvalidParameter(
                "resolution must be at least 16".into(),
            ));
        }
        self.params.validate()
    }

    pub fn field(&self) -> Result<Box<dyn VectorField>> {
        Ok(match self.model {
            ModelKind::HodgkinHuxley => Box::new(HodgkinHuxley::new(self.params)?),
            ModelKind::RadialClock => Box::new(RadialClock),
        })
    }

    pub fn initial_state(&self) -> Vec<f64> {
        self.initial_state
            .clone()
            .unwrap_or_else(|| match self.model {
                ModelKind::HodgkinHuxley => HodgkinHuxley::default_initial_state(),
                ModelKind::RadialClock => vec![0.5, 0.0],
            })
    }

    pub fn cycle_options(&self) -> CycleOptions {
        CycleOptions {
            dt: self.dt,
            settle_periods: self.settle_periods,
            resolution: self.resolution,
            ..Default::default()
        }
    }

    /// Builds the field and locates its limit cycle.
    pub fn limit_cycle(&self) -> Result<(Box<dyn VectorField>, LimitCycle)> {
        self.validate()?;
        let field = self.field()?;
        let cycle = find_limit_cycle(field.as_ref(), &self.initial_state(), &self.cycle_options())?;
        Ok((field, cycle))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_and_full_documents() {
        let c = ModelConfig::from_json(r#"{"model":"hodgkin-huxley"}"#).unwrap();
        assert_eq!(c, ModelConfig::default());
        let c = ModelConfig::from_json(
            r#"{"model":"hodgkin-huxley","params":{"i_b":11.0},"dt":0.002,"settle_periods":10,"resolution":1024}"#,
        )
        .unwrap();
        assert_eq!(c.params.i_b, 11.0);
        assert_eq!(c.resolution, 1024);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(ModelConfig::from_json(r#"{"model":"van-der-pol"}"#).is_err());
        assert!(ModelConfig::from_json(r#"{"model":"hodgkin-huxley","dt":-1}"#).is_err());
        assert!(ModelConfig::from_json(r#"{"model":"hodgkin-huxley","params":{"c":0}}"#).is_err());
        assert!(ModelConfig::from_json("{not json").is_err());
    }
}
