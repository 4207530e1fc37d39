//! Power-law comparison of characteristic-function norms of nested balls,
//! `||chi_S|| / ||chi_B|| <= C (|S| / |B|)^delta`, and the admissible range
//! of `alpha` built from it.

use serde::Serialize;

use crate::error::{argument, Error, Result};
use crate::exponents::ExponentFunction;
use crate::grid::{DyadicGrid, GridFunction};
use crate::norms::luxemburg_norm;

/// Result of the nested-ball regression.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaEstimate {
    /// Least-squares slope of `ln(||chi_S|| / ||chi_B||)` against
    /// `ln(|S| / |B|)`.
    pub delta: f64,
    /// Smallest `C` for which the bound holds with that slope on every pair.
    pub c: f64,
    pub pairs: usize,
}

/// Fit `delta` over all nested origin-centred pairs `B_j ⊂ B_k`, `j < k`.
pub fn estimate_delta(
    q: &ExponentFunction,
    grid: &std::sync::Arc<DyadicGrid>,
) -> Result<DeltaEstimate> {
    let mut norms = Vec::new();
    for k in grid.shell_range() {
        let chi = GridFunction::characteristic_ball(grid, k)?;
        let cells = chi.support();
        if cells.is_empty() {
            continue;
        }
        norms.push((grid.measure_of(&cells), luxemburg_norm(&chi, q)));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (a, &(ms, ns)) in norms.iter().enumerate() {
        for &(mb, nb) in &norms[a + 1..] {
            if ms < mb {
                xs.push((ms / mb).ln());
                ys.push((ns / nb).ln());
            }
        }
    }
    if xs.len() < 3 {
        return Err(Error::Config(format!(
            "only {} nested ball pairs on this grid; at least 3 are needed",
            xs.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let delta = sxy / sxx;
    let offset = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - delta * x)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DeltaEstimate {
        delta,
        c: offset.exp(),
        pairs: xs.len(),
    })
}

/// Fraction of each estimated `delta` used in the window.
pub const DELTA_MARGIN: f64 = 0.9;

/// Which reading of the `delta` caps defines the active window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowChoice {
    /// `delta1 < 1/(q1')_+`, `delta2 < 1/(q2)_+`.
    Theorem,
    /// `delta1 < 1/(q2')_+`, `delta2 < 1/(q1)_+`.
    Alternate,
}

/// Open interval `(lo, hi)` of admissible `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Window {
    pub delta1: f64,
    pub delta2: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn contains(&self, alpha: f64) -> bool {
        alpha > self.lo && alpha < self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// `lambda - n delta2 < alpha < lambda + n delta1` under both readings of
/// the caps on `delta1` and `delta2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibleWindow {
    /// Regression estimate on `q1'`.
    pub delta1_estimate: f64,
    /// Regression estimate on `q2`.
    pub delta2_estimate: f64,
    pub theorem: Window,
    pub alternate: Window,
    pub active: WindowChoice,
}

impl AdmissibleWindow {
    /// Estimate `delta1` from `q1'` and `delta2` from `q2` on `grid`, shrink
    /// by [`DELTA_MARGIN`] and apply each reading's caps.
    pub fn estimate(
        q1: &ExponentFunction,
        q2: &ExponentFunction,
        lambda: f64,
        grid: &std::sync::Arc<DyadicGrid>,
    ) -> Result<Self> {
        let n = grid.dim() as f64;
        let q1c = q1.conjugate()?;
        let q2c = q2.conjugate()?;
        let d1 = estimate_delta(&q1c, grid)?.delta;
        let d2 = estimate_delta(q2, grid)?.delta;
        let make = |cap1: f64, cap2: f64| {
            let delta1 = DELTA_MARGIN * d1.min(cap1);
            let delta2 = DELTA_MARGIN * d2.min(cap2);
            Window {
                delta1,
                delta2,
                lo: lambda - n * delta2,
                hi: lambda + n * delta1,
            }
        };
        Ok(AdmissibleWindow {
            delta1_estimate: d1,
            delta2_estimate: d2,
            theorem: make(1.0 / q1c.q_plus(), 1.0 / q2.q_plus()),
            alternate: make(1.0 / q2c.q_plus(), 1.0 / q1.q_plus()),
            active: WindowChoice::Theorem,
        })
    }

    pub fn active_window(&self) -> Window {
        match self.active {
            WindowChoice::Theorem => self.theorem,
            WindowChoice::Alternate => self.alternate,
        }
    }

    /// Argument error citing the active window when `alpha` lies outside it.
    pub fn require(&self, alpha: f64) -> Result<()> {
        let w = self.active_window();
        if w.contains(alpha) {
            Ok(())
        } else {
            argument(format!(
                "alpha = {alpha} outside the admissible window ({:.6}, {:.6}) = \
                 (lambda - n delta2, lambda + n delta1)",
                w.lo, w.hi
            ))
        }
    }
}
