//! Initial and reference states on the phase-space grid.
//!
//! Quadrature convention throughout the crate: `[x, p] = 2i`, so the vacuum
//! has unit variance in each quadrature and `W_vac(0, 0) = 1 / (2 pi)`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::grid::GridSpec;
use crate::numerics::pairwise_sum;
use crate::special::airy_ai;
use crate::transforms::{density_to_wigner, nonlinear_kick, wigner_to_density};

/// A real Wigner function sampled on a [`GridSpec`].
///
/// `values[i * n + j]` holds `W(x_i, p_j)`: rows run over position, columns
/// over momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerState {
    grid: GridSpec,
    values: Vec<f64>,
    pub metadata: String,
}

impl WignerState {
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SimError::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(WignerState {
            grid,
            values,
            metadata: String::new(),
        })
    }

    /// Samples `f(x, p)` on the grid without normalizing.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let n = grid.n_points();
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.coordinate(idx / n), grid.coordinate(idx % n)))
            .collect();
        WignerState {
            grid,
            values,
            metadata: String::new(),
        }
    }

    pub fn with_metadata(mut self, metadata: impl Into<String>) -> Self {
        self.metadata = metadata.into();
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `W(x_i, p_j)`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n_points() + j]
    }

    /// `sum W * spacing^2`.
    pub fn norm(&self) -> f64 {
        let h = self.grid.spacing();
        pairwise_sum(&self.values) * h * h
    }

    pub fn normalized(mut self) -> Self {
        let norm = self.norm();
        self.values.iter_mut().for_each(|v| *v /= norm);
        self
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Position marginal `integral W dp` at each `x_i`.
    pub fn x_marginal(&self) -> Vec<f64> {
        let n = self.grid.n_points();
        let h = self.grid.spacing();
        self.values
            .chunks(n)
            .map(|row| pairwise_sum(row) * h)
            .collect()
    }

    /// Momentum marginal `integral W dx` at each `p_j`.
    pub fn p_marginal(&self) -> Vec<f64> {
        let n = self.grid.n_points();
        let h = self.grid.spacing();
        (0..n)
            .map(|j| {
                let column: Vec<f64> = (0..n).map(|i| self.at(i, j)).collect();
                pairwise_sum(&column) * h
            })
            .collect()
    }

    /// `Tr rho^2 = 4 pi integral W^2` in the unit-vacuum-variance convention.
    pub fn purity(&self) -> f64 {
        let h = self.grid.spacing();
        let squares: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        4.0 * PI * pairwise_sum(&squares) * h * h
    }

    /// Largest pointwise difference to another state on the same grid.
    pub fn max_abs_diff(&self, other: &WignerState) -> Result<f64> {
        if self.grid != other.grid {
            return Err(SimError::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// Thermal occupation and squeezing of a Gaussian initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezedThermalParams {
    pub n0: f64,
    pub s: f64,
}

impl Default for SqueezedThermalParams {
    fn default() -> Self {
        SqueezedThermalParams { n0: 0.0, s: 1.0 }
    }
}

impl SqueezedThermalParams {
    pub fn new(n0: f64, s: f64) -> Result<Self> {
        let p = SqueezedThermalParams { n0, s };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n0.is_finite() && self.n0 >= 0.0) {
            return Err(SimError::InvalidParameter(format!("n0 = {} must be >= 0", self.n0)));
        }
        if !(self.s.is_finite() && self.s > 0.0) {
            return Err(SimError::InvalidParameter(format!("s = {} must be > 0", self.s)));
        }
        Ok(())
    }

    /// `s^2 (2 n0 + 1)`.
    pub fn var_x(&self) -> f64 {
        self.s * self.s * (2.0 * self.n0 + 1.0)
    }

    /// `(2 n0 + 1) / s^2`.
    pub fn var_p(&self) -> f64 {
        (2.0 * self.n0 + 1.0) / (self.s * self.s)
    }

    /// Half-extent needed to hold six standard deviations along the wider axis.
    pub fn required_half_extent(&self) -> f64 {
        6.0 * self.var_x().max(self.var_p()).sqrt()
    }
}

/// Squeezed thermal Gaussian
/// `W = exp(-[(x/s)^2 + (p s)^2] / (2 (2 n0 + 1))) / (2 pi (2 n0 + 1))`,
/// renormalized on the grid.
pub fn squeezed_thermal(grid: &GridSpec, params: SqueezedThermalParams) -> Result<WignerState> {
    params.validate()?;
    let required = params.required_half_extent();
    if required > grid.half_extent() {
        return Err(SimError::GridOverflow {
            required,
            available: grid.half_extent(),
        });
    }
    let nu = 2.0 * params.n0 + 1.0;
    let s = params.s;
    let state = WignerState::from_fn(*grid, |x, p| {
        let q = (x / s).powi(2) + (p * s).powi(2);
        (-0.5 * q / nu).exp() / (2.0 * PI * nu)
    });
    Ok(state
        .normalized()
        .with_metadata(format!("squeezed_thermal n0={} s={}", params.n0, params.s)))
}

/// Grid on which the ideal cubic phase state at `gamma = 0.05` is resolved.
///
/// The Airy fringes oscillate fastest near the momentum edge at
/// `|x| ~ 7`; the wider protocol grid samples them below four points per
/// period, so the reference state gets a narrower box at the same density.
pub fn airy_reference_grid() -> GridSpec {
    GridSpec::raw(512, 10.0)
}

/// Scale `(4 / (3 gamma))^{1/3}` of the Airy argument.
fn airy_scale(gamma: f64) -> f64 {
    (4.0 / (3.0 * gamma)).cbrt()
}

/// Shortest local oscillation period of `Ai[c (3 gamma x^2 - p)]` on the
/// grid, in samples.
fn airy_samples_per_period(grid: &GridSpec, gamma: f64) -> f64 {
    let c = airy_scale(gamma);
    let n = grid.n_points();
    let mut max_wavenumber: f64 = 0.0;
    for i in 0..n {
        let x = grid.coordinate(i);
        // The argument is most negative at the largest momentum sample.
        let p = grid.coordinate(n - 1);
        let z = c * (3.0 * gamma * x * x - p);
        if z < 0.0 {
            let grad = c * (36.0 * gamma * gamma * x * x + 1.0).sqrt();
            max_wavenumber = max_wavenumber.max((-z).sqrt() * grad);
        }
    }
    if max_wavenumber == 0.0 {
        f64::INFINITY
    } else {
        2.0 * PI / max_wavenumber / grid.spacing()
    }
}

/// Wigner function of the ideal cubic phase state,
/// `W ∝ Ai[(4 / (3 gamma))^{1/3} (3 gamma x^2 - p)]`, normalized to unit
/// mass inside the grid.
pub fn ideal_cubic_wigner(grid: &GridSpec, gamma: f64) -> Result<WignerState> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(SimError::InvalidParameter(format!("gamma = {gamma} must be > 0")));
    }
    let samples = airy_samples_per_period(grid, gamma);
    if samples < 4.0 {
        return Err(SimError::Resolution(format!(
            "Airy oscillation period spans {samples:.2} samples at the grid edge (need >= 4)"
        )));
    }
    let c = airy_scale(gamma);
    let raw = WignerState::from_fn(*grid, |x, p| airy_ai(c * (3.0 * gamma * x * x - p)));
    let mass = raw.norm();
    Ok(raw.normalized().with_metadata(format!(
        "ideal_cubic gamma={gamma}; normalized to in-grid mass (raw in-grid integral {mass:.6e})"
    )))
}

/// Finitely squeezed thermal state after a single nonlinear phase gate
/// `exp(i gain x^order)`, with no rotation and no damping.
pub fn exact_nonlinear_gaussian(
    grid: &GridSpec,
    params: SqueezedThermalParams,
    gain: f64,
    order: u32,
) -> Result<WignerState> {
    let initial = squeezed_thermal(grid, params)?;
    let rho = wigner_to_density(&initial);
    let kicked = nonlinear_kick(&rho, gain, order)?;
    Ok(density_to_wigner(&kicked)?.with_metadata(format!(
        "exact_nonlinear n0={} s={} gain={gain} order={order}",
        params.n0, params.s
    )))
}
