//! Empirical tongue boundaries: one bisection per abscissa and edge.

use serde::{Deserialize, Serialize};

use super::bisection::{min_power_bisection, BisectionOptions};
use crate::arnold::{TongueBoundary, TonguePoint};
use crate::error::Result;
use crate::par::{self, Execution};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Edge {
    Left,
    Right,
}

/// One boundary search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryJob {
    pub abscissa: f64,
    pub edge: Edge,
    /// Theoretical boundary power, used to seed the bracket.
    pub estimate: f64,
    /// Locking is lost as the power rises through this boundary (the far
    /// edge of a one-sided tongue).
    pub inverted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JobResult {
    pub job: BoundaryJob,
    pub power: Option<f64>,
    pub error: Option<String>,
}

/// Jobs for every positive theoretical boundary value. Where both edges pass
/// over one abscissa the larger power is the inverted one.
pub fn boundary_jobs(theory: &TongueBoundary) -> Vec<BoundaryJob> {
    let mut jobs = Vec::new();
    for p in &theory.points {
        let both = matches!((p.p_left, p.p_right), (Some(a), Some(b)) if a > 0.0 && b > 0.0);
        let top = p.p_left.unwrap_or(0.0).max(p.p_right.unwrap_or(0.0));
        for (edge, value) in [(Edge::Left, p.p_left), (Edge::Right, p.p_right)] {
            if let Some(estimate) = value.filter(|v| *v > 0.0) {
                let inverted = both && estimate == top && p.p_left != p.p_right;
                jobs.push(BoundaryJob {
                    abscissa: p.abscissa,
                    edge,
                    estimate,
                    inverted,
                });
            }
        }
    }
    jobs
}

/// Runs the jobs (concurrently under `Execution::Parallel`); a failed search
/// leaves its power absent.
pub fn tongue_sweep<L>(
    jobs: &[BoundaryJob],
    lock: &L,
    opts: &BisectionOptions,
    exec: Execution,
) -> Vec<JobResult>
where
    L: Fn(f64, f64) -> Result<bool> + Sync,
{
    par::map(jobs, exec, |job| {
        let o = BisectionOptions {
            inverted: job.inverted,
            ..*opts
        };
        match min_power_bisection(|p| lock(job.abscissa, p), job.estimate, &o) {
            Ok(p) => JobResult {
                job: *job,
                power: Some(p),
                error: None,
            },
            Err(e) => {
                log::warn!(
                    "boundary search at {} ({:?}) failed: {e}",
                    job.abscissa,
                    job.edge
                );
                JobResult {
                    job: *job,
                    power: None,
                    error: Some(e.to_string()),
                }
            }
        }
    })
}

/// Empirical counterpart of `theory` plus the number of failed searches.
pub fn empirical_tongue<L>(
    theory: &TongueBoundary,
    lock: &L,
    opts: &BisectionOptions,
    exec: Execution,
) -> (TongueBoundary, usize)
where
    L: Fn(f64, f64) -> Result<bool> + Sync,
{
    let jobs = boundary_jobs(theory);
    let results = tongue_sweep(&jobs, lock, opts, exec);
    let failures = results.iter().filter(|r| r.error.is_some()).count();
    let points = theory
        .points
        .iter()
        .map(|p| {
            let find = |edge| {
                results
                    .iter()
                    .find(|r| r.job.abscissa == p.abscissa && r.job.edge == edge)
                    .and_then(|r| r.power)
            };
            TonguePoint {
                abscissa: p.abscissa,
                p_left: find(Edge::Left),
                p_right: find(Edge::Right),
            }
        })
        .collect();
    (
        TongueBoundary {
            points,
            ..theory.clone()
        },
        failures,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arnold::{linear_grid, single_tongue, TongueCase};
    use crate::fourier::FourierSeries;
    use crate::interaction::SubharmonicRatio;
    use crate::phase::PhaseModel;
    use std::f64::consts::SQRT_2;

    #[test]
    fn analytic_tongue_is_recovered() {
        // Λ = P cos φ: locked iff P ≥ |Δω|
        let m = PhaseModel::new(1.0, FourierSeries::sine(1, SQRT_2)).unwrap();
        let r = SubharmonicRatio::new(1, 1).unwrap();
        let theory = single_tongue(
            &m,
            r,
            &FourierSeries::sine(1, SQRT_2),
            &linear_grid(1.0, 0.05, 11),
        )
        .unwrap();
        let lock = |omega_f: f64, p: f64| Ok(p >= (1.0 - omega_f).abs());
        let (emp, failures) = empirical_tongue(
            &theory,
            &lock,
            &BisectionOptions::default(),
            Execution::Parallel,
        );
        assert_eq!(failures, 0);
        for (e, t) in emp.points.iter().zip(&theory.points) {
            if let (Some(a), Some(b)) = (e.p_min(), t.p_min()) {
                assert!((a - b).abs() <= 0.01 * b);
            }
        }
        assert!(emp.points[5].p_min().is_none());
        assert!(tongue_sweep(
            &[],
            &lock,
            &BisectionOptions::default(),
            Execution::Sequential
        )
        .is_empty());
    }

    #[test]
    fn far_edge_of_one_sided_tongue_is_inverted() {
        let t = TongueBoundary {
            axis: crate::arnold::AxisKind::ForcingFrequency,
            case: TongueCase::A,
            ratio: SubharmonicRatio::new(1, 1).unwrap(),
            waveform_digest: String::new(),
            lambda_max: 2.0,
            lambda_min: 1.0,
            points: vec![TonguePoint {
                abscissa: 1.1,
                p_left: Some(0.1),
                p_right: Some(0.05),
            }],
        };
        let jobs = boundary_jobs(&t);
        assert_eq!(jobs.len(), 2);
        assert!(jobs[0].inverted && !jobs[1].inverted);
        // locked for 0.05 ≤ P ≤ 0.1
        let lock = |_: f64, p: f64| Ok((0.05..=0.1).contains(&p));
        let (emp, _) = empirical_tongue(
            &t,
            &lock,
            &BisectionOptions::default(),
            Execution::Sequential,
        );
        let p = emp.points[0];
        assert!(
            (p.p_left.unwrap() - 0.1).abs() < 0.001 && (p.p_right.unwrap() - 0.05).abs() < 0.0006
        );
    }
}
