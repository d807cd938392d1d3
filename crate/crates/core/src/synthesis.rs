//! Optimal forcing waveforms: minimum energy, fastest locking, ensemble
//! locking and maximum locking range.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::interaction::{
    interaction, structure_functions, y_nm, y_nm_phi, InteractionFn, StructureFunctions,
    SubharmonicRatio,
};
use crate::phase::PhaseModel;

/// `V0` below this means Y carries no energy and nothing can lock.
pub const DEGENERATE_ENERGY: f64 = 1e-14;

/// Default fast-waveform power as a multiple of the minimum feasible energy.
pub const DEFAULT_POWER_FACTOR: f64 = 1.2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    MinEnergy,
    Fast,
    Ensemble,
    MaxRange,
    Custom,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::MinEnergy => "min-energy",
            Family::Fast => "fast",
            Family::Ensemble => "ensemble",
            Family::MaxRange => "max-range",
            Family::Custom => "custom",
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" | "min-energy" => Ok(Family::MinEnergy),
            "fast" => Ok(Family::Fast),
            "ensemble" => Ok(Family::Ensemble),
            "range" | "max-range" => Ok(Family::MaxRange),
            "custom" => Ok(Family::Custom),
            _ => Err(Error::InvalidParameter(format!(
                "unknown waveform family {s:?}"
            ))),
        }
    }
}

/// A periodic control `u(t) = v(Ω_f t)` designed for target frequency Ω.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWaveform")]
pub struct Waveform {
    series: FourierSeries,
    omega_f: f64,
    target: f64,
    ratio: SubharmonicRatio,
    energy: f64,
    family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    lock_phase: Option<f64>,
}

#[derive(Deserialize)]
struct RawWaveform {
    series: FourierSeries,
    #[serde(default)]
    omega_f: Option<f64>,
    #[serde(default)]
    target: Option<f64>,
    ratio: SubharmonicRatio,
    #[serde(default)]
    energy: Option<f64>,
    family: Family,
    #[serde(default)]
    lock_phase: Option<f64>,
}

impl TryFrom<RawWaveform> for Waveform {
    type Error = Error;
    fn try_from(raw: RawWaveform) -> Result<Self> {
        let target = match (raw.target, raw.omega_f) {
            (Some(t), _) => t,
            (None, Some(f)) => raw.ratio.target_frequency(f),
            (None, None) => {
                return Err(Error::InvalidParameter(
                    "waveform needs target or omega_f".into(),
                ))
            }
        };
        let mut w = Waveform::new(raw.series, raw.ratio, target, raw.family)?;
        if let Some(f) = raw.omega_f {
            if (f - w.omega_f).abs() > 1e-12 * f.abs().max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "omega_f {f} inconsistent with target {target} and ratio {}",
                    w.ratio
                )));
            }
        }
        if let Some(e) = raw.energy {
            if (e - w.energy).abs() > 1e-12 * e.abs().max(1.0) {
                return Err(Error::InvalidParameter(format!(
                    "recorded energy {e} differs from series energy {}",
                    w.energy
                )));
            }
        }
        w.lock_phase = raw.lock_phase;
        Ok(w)
    }
}

impl Waveform {
    pub fn new(
        series: FourierSeries,
        ratio: SubharmonicRatio,
        target: f64,
        family: Family,
    ) -> Result<Self> {
        if !(target > 0.0 && target.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "target frequency must be positive, got {target}"
            )));
        }
        let energy = series.energy();
        Ok(Self {
            omega_f: ratio.forcing_frequency(target),
            series,
            target,
            ratio,
            energy,
            family,
            lock_phase: None,
        })
    }

    pub fn custom(series: FourierSeries, ratio: SubharmonicRatio, target: f64) -> Result<Self> {
        Self::new(series, ratio, target, Family::Custom)
    }

    fn with_lock_phase(mut self, phi: f64) -> Self {
        self.lock_phase = Some(phi);
        self
    }

    pub fn series(&self) -> &FourierSeries {
        &self.series
    }

    /// Forcing frequency `Ω_f = (N/M)Ω`.
    pub fn omega_f(&self) -> f64 {
        self.omega_f
    }

    /// Target oscillator frequency Ω.
    pub fn target(&self) -> f64 {
        self.target
    }

    /// Entrained period `2π/Ω`.
    pub fn target_period(&self) -> f64 {
        std::f64::consts::TAU / self.target
    }

    pub fn ratio(&self) -> SubharmonicRatio {
        self.ratio
    }

    /// Mean-square value `⟨v²⟩`.
    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn rms(&self) -> f64 {
        self.energy.sqrt()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Design phase at which `Δω + Λ_v = 0`, when there is a single one.
    pub fn lock_phase(&self) -> Option<f64> {
        self.lock_phase
    }

    /// Control value `u(t) = v(Ω_f t)`.
    pub fn input(&self, t: f64) -> f64 {
        self.series.eval(self.omega_f * t)
    }

    /// Unit-RMS version of the shape.
    pub fn unit_shape(&self) -> Result<FourierSeries> {
        let rms = self.rms();
        if rms <= 0.0 {
            return Err(Error::InvalidParameter(
                "zero waveform has no unit-energy shape".into(),
            ));
        }
        Ok(self.series.scale(1.0 / rms))
    }

    /// Same shape and ratio at another target frequency. The design lock
    /// phase no longer applies and is dropped.
    pub fn retargeted(&self, target: f64) -> Result<Self> {
        Self::new(self.series.clone(), self.ratio, target, self.family)
    }

    /// Same shape scaled to RMS amplitude `rms`.
    pub fn with_rms(&self, rms: f64) -> Result<Self> {
        let shape = self.unit_shape()?;
        let mut w = Self::new(shape.scale(rms), self.ratio, self.target, self.family)?;
        w.lock_phase = self.lock_phase;
        Ok(w)
    }

    pub fn interaction(&self, model: &PhaseModel) -> InteractionFn {
        interaction(model.prc(), &self.series, self.ratio)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn detuning(model: &PhaseModel, target: f64) -> Result<f64> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target frequency must be positive, got {target}"
        )));
    }
    Ok(model.omega() - target)
}

fn require_energy(sf: &StructureFunctions) -> Result<()> {
    if sf.v0 < DEGENERATE_ENERGY {
        return Err(Error::EntrainmentImpossible(format!(
            "the PRC has no harmonics compatible with {} forcing (V0 = {:e})",
            sf.ratio, sf.v0
        )));
    }
    Ok(())
}

/// Minimum-energy waveform `v = −(Δω/V0)·Y(η, 0)`; locks at φ = 0 with
/// energy `Δω²/V0`.
pub fn min_energy_single(
    model: &PhaseModel,
    ratio: SubharmonicRatio,
    target: f64,
) -> Result<Waveform> {
    let dw = detuning(model, target)?;
    if dw == 0.0 {
        return Ok(
            Waveform::new(FourierSeries::zero(), ratio, target, Family::MinEnergy)?
                .with_lock_phase(0.0),
        );
    }
    let sf = structure_functions(model.prc(), ratio);
    require_energy(&sf)?;
    let v = y_nm(model.prc(), ratio, 0.0).scale(-dw / sf.v0);
    Ok(Waveform::new(v, ratio, target, Family::MinEnergy)?.with_lock_phase(0.0))
}

/// Large-N limit `Υ = −2Δω/a0` of the minimum-energy waveform.
pub fn asymptotic_constant(model: &PhaseModel, target: f64) -> Result<f64> {
    let dw = detuning(model, target)?;
    let a0 = model.prc().a0();
    if a0.abs() < DEGENERATE_ENERGY {
        return Err(Error::UndefinedLimit);
    }
    Ok(-2.0 * dw / a0)
}

/// Fast-locking waveform together with its design quantities.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FastWaveform {
    pub waveform: Waveform,
    /// Lagrange multiplier λ of the energy constraint.
    pub multiplier: f64,
    /// Predicted `dΛ/dφ` at the lock phase (negative).
    pub predicted_rate: f64,
    /// Smallest energy that can lock at this detuning, `Δω²/V0`.
    pub min_energy: f64,
}

/// Waveform of energy `power` maximizing the slope of Λ at the lock phase 0:
/// `v = Y_φ(η,0)/(2λ) − (Δω/V0)Y(η,0)`, `λ = −½√(S0/(P − Δω²/V0))`.
/// With `power = None` the energy defaults to 1.2× the minimum.
pub fn fast_waveform(
    model: &PhaseModel,
    ratio: SubharmonicRatio,
    target: f64,
    power: Option<f64>,
) -> Result<FastWaveform> {
    let dw = detuning(model, target)?;
    let sf = structure_functions(model.prc(), ratio);
    require_energy(&sf)?;
    if sf.s0 < DEGENERATE_ENERGY {
        return Err(Error::EntrainmentImpossible(format!(
            "S0 = {:e}: no phase-sensitive harmonics",
            sf.s0
        )));
    }
    let min_energy = dw * dw / sf.v0;
    let power = match power {
        Some(p) => p,
        None if min_energy > 0.0 => DEFAULT_POWER_FACTOR * min_energy,
        None => {
            return Err(Error::InvalidParameter(
                "power is required at zero detuning".into(),
            ))
        }
    };
    if !power.is_finite() || power <= min_energy {
        return Err(Error::InfeasibleEnergy {
            requested: power,
            minimum: min_energy,
        });
    }
    let lambda = -0.5 * (sf.s0 / (power - min_energy)).sqrt();
    let y = y_nm(model.prc(), ratio, 0.0);
    let yp = y_nm_phi(model.prc(), ratio, 0.0);
    let v = yp.scale(1.0 / (2.0 * lambda)).add(&y.scale(-dw / sf.v0));
    let waveform = Waveform::new(v, ratio, target, Family::Fast)?.with_lock_phase(0.0);
    Ok(FastWaveform {
        waveform,
        multiplier: lambda,
        predicted_rate: -(sf.s0 * (power - min_energy)).sqrt(),
        min_energy,
    })
}

/// Natural frequencies `ω1 ≤ ω2` of an ensemble and the common target Ω.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    omega1: f64,
    omega2: f64,
    target: f64,
}

impl EnsembleSpec {
    pub fn new(omega1: f64, omega2: f64, target: f64) -> Result<Self> {
        if ![omega1, omega2, target]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0)
        {
            return Err(Error::InvalidParameter(
                "ensemble frequencies must be positive".into(),
            ));
        }
        if omega1 > omega2 {
            return Err(Error::InvalidParameter(format!(
                "need omega1 ≤ omega2, got {omega1} > {omega2}"
            )));
        }
        Ok(Self {
            omega1,
            omega2,
            target,
        })
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> f64 {
        self.omega2
    }

    pub fn target(&self) -> f64 {
        self.target
    }

    /// `(ω1 − Ω, ω2 − Ω)`.
    pub fn detunings(&self) -> (f64, f64) {
        (self.omega1 - self.target, self.omega2 - self.target)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EnsembleCase {
    /// Only the fast oscillator's constraint is active.
    #[serde(rename = "I-minus")]
    IMinus,
    /// Only the slow oscillator's constraint is active.
    #[serde(rename = "I-plus")]
    IPlus,
    /// Both constraints active.
    #[serde(rename = "II")]
    II,
}

impl fmt::Display for EnsembleCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnsembleCase::IMinus => "I-minus",
            EnsembleCase::IPlus => "I-plus",
            EnsembleCase::II => "II",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSolution {
    pub waveform: Waveform,
    pub case: EnsembleCase,
    /// Multipliers of the two constraints (Case II only).
    pub mu_plus: Option<f64>,
    pub mu_minus: Option<f64>,
    /// Predicted locked natural frequencies `[ω−, ω+]`.
    pub locking_range: (f64, f64),
}

/// Minimum-energy waveform locking every natural frequency in `[ω1, ω2]` to Ω.
pub fn ensemble_waveform(
    model: &PhaseModel,
    ratio: SubharmonicRatio,
    spec: &EnsembleSpec,
) -> Result<EnsembleSolution> {
    let sf = structure_functions(model.prc(), ratio);
    require_energy(&sf)?;
    let (dw1, dw2) = spec.detunings();
    let (v0, vs) = (sf.v0, sf.v_star);
    let y0 = y_nm(model.prc(), ratio, 0.0);
    let (case, series, mu) = if dw2 <= dw1 * vs / v0 {
        (EnsembleCase::IPlus, y0.scale(-dw1 / v0), None)
    } else if dw1 >= dw2 * vs / v0 {
        (EnsembleCase::IMinus, y0.scale(-dw2 / v0), None)
    } else {
        let d = (v0 - vs) * (v0 + vs);
        if d.abs() < DEGENERATE_ENERGY * v0 * v0 {
            return Err(Error::NoRangeGain { gap: v0 - vs });
        }
        let mu_p = 2.0 * (dw1 * v0 - dw2 * vs) / d;
        let mu_m = 2.0 * (dw1 * vs - dw2 * v0) / d;
        let ys = y_nm(model.prc(), ratio, sf.phi_star);
        let v = ys.scale(-0.5 * mu_p).add(&y0.scale(0.5 * mu_m));
        (EnsembleCase::II, v, Some((mu_p, mu_m)))
    };
    let waveform = Waveform::new(series, ratio, spec.target, Family::Ensemble)?;
    let lam = waveform.interaction(model);
    Ok(EnsembleSolution {
        locking_range: lam.locking_range(spec.target),
        waveform,
        case,
        mu_plus: mu.map(|m| m.0),
        mu_minus: mu.map(|m| m.1),
    })
}

/// Energy of the optimal ensemble waveform by case.
pub fn ensemble_energy(sf: &StructureFunctions, spec: &EnsembleSpec, case: EnsembleCase) -> f64 {
    let (dw1, dw2) = spec.detunings();
    let (v0, vs) = (sf.v0, sf.v_star);
    match case {
        EnsembleCase::IPlus => dw1 * dw1 / v0,
        EnsembleCase::IMinus => dw2 * dw2 / v0,
        EnsembleCase::II => {
            ((dw1 * dw1 + dw2 * dw2) * v0 - 2.0 * dw1 * dw2 * vs) / ((v0 - vs) * (v0 + vs))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RangeWaveform {
    pub waveform: Waveform,
    /// Predicted `Λ_max − Λ_min = √(2P(V0 − V*))`.
    pub predicted_width: f64,
}

/// Energy-`power` waveform with the widest locking range:
/// `v = √(P/(2(V0 − V*)))·[Y(η, φ*) − Y(η, 0)]`.
pub fn max_range_waveform(
    model: &PhaseModel,
    ratio: SubharmonicRatio,
    target: f64,
    power: f64,
) -> Result<RangeWaveform> {
    detuning(model, target)?;
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "power must be positive, got {power}"
        )));
    }
    let sf = structure_functions(model.prc(), ratio);
    require_energy(&sf)?;
    let gap = sf.v0 - sf.v_star;
    if gap <= DEGENERATE_ENERGY.max(1e-12 * sf.v0) {
        return Err(Error::NoRangeGain { gap });
    }
    let c = (power / (2.0 * gap)).sqrt();
    let v = y_nm(model.prc(), ratio, sf.phi_star)
        .add(&y_nm(model.prc(), ratio, 0.0).scale(-1.0))
        .scale(c);
    Ok(RangeWaveform {
        waveform: Waveform::new(v, ratio, target, Family::MaxRange)?,
        predicted_width: (2.0 * power * gap).sqrt(),
    })
}
