//! Uniform square discretization of phase space.
//!
//! Both quadratures share one axis: `n_points` samples on the half-open
//! interval `[-L, L)`, with sample `n_points / 2` sitting exactly on zero.
//! The same axis doubles as the position grid of the density matrix; its
//! Fourier-conjugate axis (the off-diagonal offset `y` in
//! `<x + y| rho |x - y>`) has spacing `pi / L`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Smallest grid accepted by [`make_grid`].
pub const MIN_POINTS: usize = 64;

/// Default number of samples per axis for shipped experiments.
pub const DEFAULT_POINTS: usize = 512;

/// Default half-extent in quadrature units (vacuum variance is 1).
pub const DEFAULT_HALF_EXTENT: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridParams", into = "GridParams")]
pub struct GridSpec {
    n_points: usize,
    half_extent: f64,
    spacing: f64,
}

#[derive(Serialize, Deserialize)]
struct GridParams {
    n_points: usize,
    half_extent: f64,
}

impl TryFrom<GridParams> for GridSpec {
    type Error = SimError;

    fn try_from(p: GridParams) -> Result<Self> {
        make_grid(p.n_points, p.half_extent)
    }
}

impl From<GridSpec> for GridParams {
    fn from(g: GridSpec) -> Self {
        GridParams {
            n_points: g.n_points,
            half_extent: g.half_extent,
        }
    }
}

/// Builds a validated grid.
///
/// Rejects sizes that are not a power of two (or smaller than
/// [`MIN_POINTS`]) and grids whose conjugate axis would not reach the same
/// half-extent, `pi / spacing < half_extent`, which would alias the
/// Wigner/density-matrix pair.
pub fn make_grid(n_points: usize, half_extent: f64) -> Result<GridSpec> {
    if !n_points.is_power_of_two() {
        return Err(SimError::InvalidGrid(format!(
            "n_points = {n_points} is not a power of two"
        )));
    }
    if n_points < MIN_POINTS {
        return Err(SimError::InvalidGrid(format!(
            "n_points = {n_points} is below the minimum of {MIN_POINTS}"
        )));
    }
    if !(half_extent.is_finite() && half_extent > 0.0) {
        return Err(SimError::InvalidGrid(format!(
            "half_extent = {half_extent} must be positive and finite"
        )));
    }
    let grid = GridSpec::raw(n_points, half_extent);
    if PI / grid.spacing < half_extent {
        return Err(SimError::InvalidGrid(format!(
            "conjugate axis covers only {:.4} < half_extent {half_extent} (aliasing)",
            PI / grid.spacing
        )));
    }
    Ok(grid)
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec::raw(DEFAULT_POINTS, DEFAULT_HALF_EXTENT)
    }
}

impl GridSpec {
    /// Unvalidated constructor; `make_grid` is the public entry point.
    pub(crate) fn raw(n_points: usize, half_extent: f64) -> Self {
        GridSpec {
            n_points,
            half_extent,
            spacing: 2.0 * half_extent / n_points as f64,
        }
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn half_extent(&self) -> f64 {
        self.half_extent
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of cells in the square grid.
    pub fn len(&self) -> usize {
        self.n_points * self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    /// Coordinate of sample `i`; an integer multiple of the spacing, so the
    /// centre sample is exactly zero.
    #[inline]
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - (self.n_points / 2) as f64) * self.spacing
    }

    /// Index of the zero coordinate.
    pub fn center_index(&self) -> usize {
        self.n_points / 2
    }

    /// Spacing of the off-diagonal offset axis, `2 pi / (n * spacing)`.
    pub fn offset_spacing(&self) -> f64 {
        2.0 * PI / (self.n_points as f64 * self.spacing)
    }

    /// Offset `y` of column `m` in the centre/offset layout.
    #[inline]
    pub fn offset(&self, m: usize) -> f64 {
        (m as f64 - (self.n_points / 2) as f64) * self.offset_spacing()
    }

    /// Angular frequency of FFT bin `k` along either axis (standard FFT
    /// ordering: non-negative bins first).
    #[inline]
    pub fn wavenumber(&self, k: usize) -> f64 {
        let n = self.n_points;
        let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        2.0 * PI * signed / (n as f64 * self.spacing)
    }

    /// The same extent sampled `factor` times more finely.
    pub fn refined(&self, factor: usize) -> Result<GridSpec> {
        make_grid(self.n_points * factor, self.half_extent)
    }
}

/// Sample coordinates `-L + i * spacing`, `i = 0..n_points`.
pub fn coordinate_axis(grid: &GridSpec) -> Vec<f64> {
    (0..grid.n_points).map(|i| grid.coordinate(i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_is_exact() {
        assert_eq!(make_grid(512, 10.0).unwrap().spacing(), 0.0390625);
        assert_eq!(make_grid(256, 8.0).unwrap().spacing(), 0.0625);
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(make_grid(100, 10.0), Err(SimError::InvalidGrid(_))));
        assert!(matches!(make_grid(32, 2.0), Err(SimError::InvalidGrid(_))));
    }

    #[test]
    fn rejects_aliasing_grid() {
        // pi / (2 * 40 / 64) = 2.51 < 40
        assert!(matches!(make_grid(64, 40.0), Err(SimError::InvalidGrid(_))));
        assert!(make_grid(64, -1.0).is_err());
        assert!(make_grid(64, f64::NAN).is_err());
    }

    #[test]
    fn small_axis_enumeration() {
        let g = GridSpec::raw(4, 2.0);
        assert_eq!(coordinate_axis(&g), vec![-2.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn axis_endpoints_and_center() {
        for (n, l) in [(64, 3.0), (512, 16.0), (1024, 0.1), (256, 7.3)] {
            let g = make_grid(n, l).unwrap();
            let axis = coordinate_axis(&g);
            assert_eq!(axis.len(), n);
            assert_eq!(axis[0], -l);
            assert_eq!(axis[n / 2], 0.0);
            assert!(axis.windows(2).all(|w| w[1] > w[0]));
            // Half-open: the mirror of the first sample is one step past the end.
            assert!((axis[n - 1] + axis[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn default_grid_is_valid() {
        let d = GridSpec::default();
        assert_eq!(make_grid(d.n_points(), d.half_extent()).unwrap(), d);
    }

    #[test]
    fn serde_validates() {
        let g: GridSpec = serde_json::from_str(r#"{"n_points":256,"half_extent":8.0}"#).unwrap();
        assert_eq!(g.spacing(), 0.0625);
        assert!(serde_json::from_str::<GridSpec>(r#"{"n_points":100,"half_extent":8.0}"#).is_err());
        assert_eq!(
            serde_json::to_string(&g).unwrap(),
            r#"{"n_points":256,"half_extent":8.0}"#
        );
    }
}
