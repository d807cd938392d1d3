//! Linear Arnold-tongue boundary estimates for single oscillators and
//! ensembles.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fourier::FourierSeries;
use crate::interaction::{interaction, InteractionFn, SubharmonicRatio};
use crate::par::{self, Execution};
use crate::phase::PhaseModel;

/// Tolerance on `⟨ṽ²⟩ = 1` for tongue shapes.
pub const UNIT_ENERGY_TOL: f64 = 1e-10;
/// Both Λ extremes below this mean no tongue exists.
pub const NO_TONGUE_TOL: f64 = 1e-14;
pub const DEFAULT_GRID_POINTS: usize = 101;
pub const DEFAULT_GRID_SPAN: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisKind {
    /// Abscissa is Ω_f with ω fixed.
    ForcingFrequency,
    /// Abscissa is ω with Ω, Ω_f fixed.
    NaturalFrequency,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TongueCase {
    /// `Λ_min > 0`: the tongue leans to higher forcing frequencies.
    A,
    /// `Λ_min ≤ 0 ≤ Λ_max`: the tongue straddles zero detuning.
    B,
    /// `Λ_max < 0`: the tongue leans to lower forcing frequencies.
    C,
}

impl fmt::Display for TongueCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl TongueCase {
    pub fn classify(lambda: &InteractionFn) -> Result<Self> {
        let (lo, hi) = (lambda.lambda_min, lambda.lambda_max);
        if lo.abs() < NO_TONGUE_TOL && hi.abs() < NO_TONGUE_TOL {
            return Err(Error::NoTongue);
        }
        Ok(if lo > 0.0 {
            TongueCase::A
        } else if hi < 0.0 {
            TongueCase::C
        } else {
            TongueCase::B
        })
    }
}

/// Boundary powers (RMS) at one abscissa. `p_left` is the boundary of the
/// tongue's left edge, `p_right` of its right edge; absent where that edge
/// does not pass over the abscissa.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TonguePoint {
    pub abscissa: f64,
    pub p_left: Option<f64>,
    pub p_right: Option<f64>,
}

impl TonguePoint {
    /// Smallest boundary power at this abscissa.
    pub fn p_min(&self) -> Option<f64> {
        match (self.p_left, self.p_right) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TongueBoundary {
    pub axis: AxisKind,
    pub case: TongueCase,
    pub ratio: SubharmonicRatio,
    /// SHA-256 of the unit shape's JSON.
    pub waveform_digest: String,
    /// `Λ_ṽ(φ+)` and `Λ_ṽ(φ−)` of the unit shape.
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub points: Vec<TonguePoint>,
}

/// Hex SHA-256 of a series' canonical JSON.
pub fn series_digest(v: &FourierSeries) -> String {
    let json = serde_json::to_vec(v).expect("series serializes");
    hex::encode(Sha256::digest(&json))
}

fn check_shape(
    model: &PhaseModel,
    ratio: SubharmonicRatio,
    shape: &FourierSeries,
) -> Result<(InteractionFn, TongueCase)> {
    let e = shape.energy();
    if (e - 1.0).abs() > UNIT_ENERGY_TOL {
        return Err(Error::InvalidParameter(format!(
            "tongue shape must have unit energy, got {e}"
        )));
    }
    let lam = interaction(model.prc(), shape, ratio);
    let case = TongueCase::classify(&lam)?;
    Ok((lam, case))
}

fn positive(p: f64) -> Option<f64> {
    (p >= 0.0 && p.is_finite()).then_some(p)
}

/// Boundary powers for detuning Δω from `Δω + P·Λ_ṽ(φ±) = 0`: the edge
/// through `φ−` is `−Δω/Λ_ṽ(φ−)`, the edge through `φ+` is `−Δω/Λ_ṽ(φ+)`.
pub fn boundary_powers(lam: &InteractionFn, detuning: f64) -> (Option<f64>, Option<f64>) {
    let at = |l: f64| {
        if detuning == 0.0 {
            Some(0.0)
        } else {
            positive(-detuning / l)
        }
    };
    (at(lam.lambda_min), at(lam.lambda_max))
}

/// Tongue over forcing frequencies Ω_f for fixed natural frequency ω.
pub fn single_tongue(
    model: &PhaseModel,
    ratio: SubharmonicRatio,
    shape: &FourierSeries,
    grid: &[f64],
) -> Result<TongueBoundary> {
    single_tongue_with(model, ratio, shape, grid, Execution::default())
}

pub fn single_tongue_with(
    model: &PhaseModel,
    ratio: SubharmonicRatio,
    shape: &FourierSeries,
    grid: &[f64],
    exec: Execution,
) -> Result<TongueBoundary> {
    let (lam, case) = check_shape(model, ratio, shape)?;
    let omega = model.omega();
    let points = par::map(grid, exec, |&omega_f| {
        let dw = omega - ratio.target_frequency(omega_f);
        // with Ω_f increasing Δω falls, so the φ+ edge lies right
        let (minus, plus) = boundary_powers(&lam, dw);
        TonguePoint {
            abscissa: omega_f,
            p_left: minus,
            p_right: plus,
        }
    });
    Ok(TongueBoundary {
        axis: AxisKind::ForcingFrequency,
        case,
        ratio,
        waveform_digest: series_digest(shape),
        lambda_max: lam.lambda_max,
        lambda_min: lam.lambda_min,
        points,
    })
}

/// Tongue over natural frequencies ω for fixed target Ω.
pub fn ensemble_tongue(
    model: &PhaseModel,
    ratio: SubharmonicRatio,
    shape: &FourierSeries,
    target: f64,
    grid: &[f64],
) -> Result<TongueBoundary> {
    let (lam, case) = check_shape(model, ratio, shape)?;
    let points = par::map(grid, Execution::default(), |&omega| {
        let (minus, plus) = boundary_powers(&lam, omega - target);
        TonguePoint {
            abscissa: omega,
            p_left: plus,
            p_right: minus,
        }
    });
    Ok(TongueBoundary {
        axis: AxisKind::NaturalFrequency,
        case,
        ratio,
        waveform_digest: series_digest(shape),
        lambda_max: lam.lambda_max,
        lambda_min: lam.lambda_min,
        points,
    })
}

/// `points` values evenly spread over `center·[1 − span, 1 + span]`.
pub fn linear_grid(center: f64, span: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![center],
        n => (0..n)
            .map(|i| center * (1.0 - span + 2.0 * span * i as f64 / (n - 1) as f64))
            .collect(),
    }
}

/// Default Ω_f grid: ±10% around `(N/M)ω`.
pub fn default_forcing_grid(model: &PhaseModel, ratio: SubharmonicRatio) -> Vec<f64> {
    linear_grid(
        ratio.forcing_frequency(model.omega()),
        DEFAULT_GRID_SPAN,
        DEFAULT_GRID_POINTS,
    )
}

/// Default ω grid: ±10% around Ω.
pub fn default_natural_grid(target: f64) -> Vec<f64> {
    linear_grid(target, DEFAULT_GRID_SPAN, DEFAULT_GRID_POINTS)
}
