//! CSV and JSON exports. Numbers are written with 17 significant digits so
//! values round-trip exactly; absent values are empty cells.

use std::f64::consts::TAU;

use serde::Serialize;
use serde_json::json;

use crate::arnold::TongueBoundary;
use crate::error::{Error, Result};
use crate::fourier::{grid, FourierSeries};
use crate::interaction::InteractionFn;
use crate::ode::LimitCycle;
use crate::phase::PhaseModel;
use crate::synthesis::Waveform;

/// Samples per period in sampled exports.
pub const EXPORT_POINTS: usize = 1024;

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_text<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Serialization(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Serialization(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Serialization(e.to_string()))
}

/// Two-column sampled export of a series on `[0, 2π)`.
pub fn series_csv(v: &FourierSeries, x_name: &str, y_name: &str) -> Result<String> {
    csv_text(
        &[x_name, y_name],
        grid(EXPORT_POINTS).map(|t| [num(t), num(v.eval(t))]),
    )
}

/// `theta,Z`.
pub fn prc_csv(model: &PhaseModel) -> Result<String> {
    series_csv(model.prc(), "theta", "Z")
}

/// `phi,lambda`.
pub fn lambda_csv(lam: &InteractionFn) -> Result<String> {
    series_csv(&lam.lambda, "phi", "lambda")
}

pub fn lambda_sidecar(lam: &InteractionFn) -> serde_json::Value {
    json!({
        "ratio": lam.ratio,
        "phi_plus": lam.phi_plus,
        "phi_minus": lam.phi_minus,
        "lambda_max": lam.lambda_max,
        "lambda_min": lam.lambda_min,
    })
}

/// `eta,v`.
pub fn waveform_csv(w: &Waveform) -> Result<String> {
    series_csv(w.series(), "eta", "v")
}

/// `theta,<state names>`, one row per cycle sample.
pub fn cycle_csv(cycle: &LimitCycle, names: &[String]) -> Result<String> {
    let mut header = vec!["theta"];
    header.extend(names.iter().map(String::as_str));
    let k = cycle.resolution();
    csv_text(
        &header,
        cycle.samples().iter().enumerate().map(|(j, s)| {
            std::iter::once(num(TAU * j as f64 / k as f64))
                .chain(s.iter().map(|v| num(*v)))
                .collect::<Vec<_>>()
        }),
    )
}

/// `abscissa,p_left,p_right`.
pub fn tongue_csv(t: &TongueBoundary) -> Result<String> {
    csv_text(
        &["abscissa", "p_left", "p_right"],
        t.points
            .iter()
            .map(|p| [num(p.abscissa), opt(p.p_left), opt(p.p_right)]),
    )
}

pub fn tongue_sidecar(t: &TongueBoundary) -> serde_json::Value {
    json!({
        "case": t.case,
        "ratio": t.ratio,
        "axis": t.axis,
        "waveform_digest": t.waveform_digest,
        "lambda_max": t.lambda_max,
        "lambda_min": t.lambda_min,
    })
}

/// One row of a theory/simulation comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SweepRow {
    pub abscissa: f64,
    pub theory: Option<f64>,
    pub phase: Option<f64>,
    pub state: Option<f64>,
}

/// `abscissa,p_min_theory,p_min_phase,p_min_state`.
pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    csv_text(
        &["abscissa", "p_min_theory", "p_min_phase", "p_min_state"],
        rows.iter()
            .map(|r| [num(r.abscissa), opt(r.theory), opt(r.phase), opt(r.state)]),
    )
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}
