//! Line search for the smallest locking power at one abscissa.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BisectionOptions {
    pub lower: f64,
    pub upper: f64,
    pub expansion: f64,
    pub max_expansions: usize,
    /// Stop when the bracket is narrower than this fraction of the estimate.
    pub rel_width: f64,
    /// Locking is lost (not gained) as the power rises through the boundary.
    pub inverted: bool,
}

impl Default for BisectionOptions {
    fn default() -> Self {
        Self {
            lower: 0.9,
            upper: 1.1,
            expansion: 1.5,
            max_expansions: 8,
            rel_width: 0.01,
            inverted: false,
        }
    }
}

/// Bisects on `lock(P)` around `estimate`. Returns the bracket midpoint once
/// its width is at most `rel_width · estimate`.
pub fn min_power_bisection<F>(mut lock: F, estimate: f64, opts: &BisectionOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    if !(estimate > 0.0 && estimate.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "power estimate must be positive, got {estimate}"
        )));
    }
    // inside(P) is false below the boundary and true above it
    let mut inside = |p: f64| -> Result<bool> { Ok(lock(p)? != opts.inverted) };
    let (mut lo, mut hi) = (opts.lower * estimate, opts.upper * estimate);
    let mut expansions = 0;
    while inside(lo)? {
        if expansions == opts.max_expansions {
            return Err(Error::NoBoundaryFound(format!(
                "still inside the tongue at P = {lo:e}"
            )));
        }
        hi = lo;
        lo /= opts.expansion;
        expansions += 1;
    }
    while !inside(hi)? {
        if expansions == opts.max_expansions {
            return Err(Error::NoBoundaryFound(format!(
                "still outside the tongue at P = {hi:e}"
            )));
        }
        lo = hi;
        hi *= opts.expansion;
        expansions += 1;
    }
    let width = opts.rel_width * estimate;
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if inside(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
