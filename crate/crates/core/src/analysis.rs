//! Figures of merit: symmetric-ordered moments, the nonlinear quadrature
//! variance `sigma3(lambda) = Var(p - lambda x^2)`, and negativity measures.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::numerics::{linspace, pairwise_sum, pairwise_sum_by};
use crate::states::WignerState;

/// Highest total moment order; beyond it grid truncation dominates.
pub const MAX_MOMENT_ORDER: u32 = 6;

/// Relative margin a variance must clear before it counts as beating a bound,
/// so that rounding noise on a vacuum-like state does not flip the flags.
pub const FLAG_MARGIN: f64 = 1e-9;

/// `sigma3` below this is treated as grid corruption rather than rounding.
const NEGATIVE_VARIANCE_TOLERANCE: f64 = 1e-9;

/// `Var(x^2)` at or below this leaves the optimal lambda undefined.
const DEGENERATE_VARIANCE: f64 = 1e-12;

/// `sum x^a p^b W spacing^2`, the Weyl-symmetric expectation `<x^a p^b>`.
pub fn moment(state: &WignerState, fx_power: u32, fp_power: u32) -> Result<f64> {
    if fx_power + fp_power > MAX_MOMENT_ORDER {
        return Err(SimError::MomentOrder(fx_power + fp_power));
    }
    let grid = state.grid();
    let n = grid.n_points();
    let h = grid.spacing();
    let xa: Vec<f64> = (0..n).map(|i| grid.coordinate(i).powi(fx_power as i32)).collect();
    let pb: Vec<f64> = (0..n).map(|j| grid.coordinate(j).powi(fp_power as i32)).collect();
    let rows: Vec<f64> = state
        .values()
        .par_chunks(n)
        .zip(xa.par_iter())
        .map(|(row, x)| x * pairwise_sum_by(n, &|j| pb[j] * row[j]))
        .collect();
    Ok(pairwise_sum(&rows) * h * h)
}

/// The moments that determine `sigma3(lambda)` for every lambda.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearStats {
    pub var_p: f64,
    pub cov_p_x2: f64,
    pub var_x2: f64,
}

impl NonlinearStats {
    pub fn of(state: &WignerState) -> Result<Self> {
        let m = |a, b| moment(state, a, b);
        let (p1, x2) = (m(0, 1)?, m(2, 0)?);
        Ok(NonlinearStats {
            var_p: m(0, 2)? - p1 * p1,
            cov_p_x2: m(2, 1)? - p1 * x2,
            var_x2: m(4, 0)? - x2 * x2,
        })
    }

    /// `Var(p) - 2 lambda Cov(p, x^2) + lambda^2 Var(x^2)`.
    pub fn sigma3(&self, lambda: f64) -> Result<f64> {
        let v = self.var_p - 2.0 * lambda * self.cov_p_x2 + lambda * lambda * self.var_x2;
        if v < -NEGATIVE_VARIANCE_TOLERANCE {
            return Err(SimError::NegativeVariance(v));
        }
        Ok(v)
    }

    /// Closed-form minimizer `Cov(p, x^2) / Var(x^2)` and the minimum.
    pub fn optimum(&self) -> Result<(f64, f64)> {
        if self.var_x2 <= DEGENERATE_VARIANCE {
            return Err(SimError::DegenerateVariance(self.var_x2));
        }
        let lambda = self.cov_p_x2 / self.var_x2;
        Ok((lambda, self.sigma3(lambda)?))
    }
}

/// `sigma3(lambda) = <(p - lambda x^2)^2> - <p - lambda x^2>^2`.
pub fn nonlinear_variance(state: &WignerState, lambda: f64) -> Result<f64> {
    NonlinearStats::of(state)?.sigma3(lambda)
}

/// `(lambda*, sigma3(lambda*))`.
pub fn optimal_lambda(state: &WignerState) -> Result<(f64, f64)> {
    NonlinearStats::of(state)?.optimum()
}

/// Sampling range for `sigma3(lambda)` curves, written `lo:hi:count` on the
/// command line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaRange {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Default for LambdaRange {
    fn default() -> Self {
        LambdaRange {
            lo: -0.12,
            hi: 0.35,
            count: 200,
        }
    }
}

impl LambdaRange {
    pub fn new(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(SimError::InvalidParameter(format!("lambda range needs lo < hi, got {lo}:{hi}")));
        }
        if count < 2 {
            return Err(SimError::InvalidParameter(format!(
                "lambda range needs at least 2 samples, got {count}"
            )));
        }
        Ok(LambdaRange { lo, hi, count })
    }

    pub fn samples(&self) -> Vec<f64> {
        linspace(self.lo, self.hi, self.count)
    }
}

impl FromStr for LambdaRange {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || SimError::InvalidParameter(format!("lambda range `{s}` is not lo:hi:count"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo = parts[0].trim().parse().map_err(|_| bad())?;
        let hi = parts[1].trim().parse().map_err(|_| bad())?;
        let count = parts[2].trim().parse().map_err(|_| bad())?;
        LambdaRange::new(lo, hi, count)
    }
}

impl fmt::Display for LambdaRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.lo, self.hi, self.count)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezingReport {
    pub lambda_samples: Vec<(f64, f64)>,
    pub lambda_star: f64,
    pub sigma3_min: f64,
    /// Vacuum bound `1 + 2 lambda*^2`.
    pub vacuum_threshold_at_star: f64,
    pub beats_vacuum: bool,
    pub beats_shot_noise: bool,
}

pub fn squeezing_report(state: &WignerState, range: LambdaRange) -> Result<SqueezingReport> {
    let range = LambdaRange::new(range.lo, range.hi, range.count)?;
    let stats = NonlinearStats::of(state)?;
    let lambda_samples = range
        .samples()
        .into_iter()
        .map(|l| stats.sigma3(l).map(|v| (l, v)))
        .collect::<Result<Vec<_>>>()?;
    let (lambda_star, sigma3_min) = stats.optimum()?;
    let vacuum_threshold_at_star = 1.0 + 2.0 * lambda_star * lambda_star;
    Ok(SqueezingReport {
        lambda_samples,
        lambda_star,
        sigma3_min,
        vacuum_threshold_at_star,
        beats_vacuum: sigma3_min < vacuum_threshold_at_star * (1.0 - FLAG_MARGIN),
        beats_shot_noise: sigma3_min < 1.0 - FLAG_MARGIN,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegativityReport {
    pub min_value: f64,
    /// `integral (|W| - W) / 2 dx dp`.
    pub negativity_volume: f64,
    /// `(p, W(0, p))` along the exact `x = 0` grid row.
    pub cut: Vec<(f64, f64)>,
}

pub fn negativity_report(state: &WignerState) -> NegativityReport {
    let grid = state.grid();
    let h = grid.spacing();
    let c = grid.center_index();
    let negative: Vec<f64> = state.values().iter().map(|v| (v.abs() - v) / 2.0).collect();
    NegativityReport {
        min_value: state.min_value(),
        negativity_volume: pairwise_sum(&negative) * h * h,
        cut: (0..grid.n_points())
            .map(|j| (grid.coordinate(j), state.at(c, j)))
            .collect(),
    }
}

/// `(integral (a - b)^2 dp)^(1/2)` between two cuts sampled on the same axis.
pub fn cut_distance(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(SimError::GridMismatch);
    }
    let dp = a[1].0 - a[0].0;
    let squares: Vec<f64> = a.iter().zip(b).map(|(u, v)| (u.1 - v.1).powi(2)).collect();
    Ok((pairwise_sum(&squares) * dp).sqrt())
}
