//! The elementary evolutions: representation change, nonlinear kick,
//! harmonic rotation and thermal damping.
//!
//! The density matrix is kept in centre/offset form,
//! `R(x, y) = <x + y| rho |x - y>`, with `x` on the grid axis and `y` on the
//! Fourier-conjugate axis of momentum. In that layout the Wigner transform is
//! a single FFT per row and therefore exactly invertible, and the nonlinear
//! kick is a pointwise phase.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::fourier::{fourier_shift, to_complex, transpose, RowFft};
use crate::grid::GridSpec;
use crate::numerics::pairwise_sum_by;
use crate::states::WignerState;

/// Hermiticity defect above which a density matrix is treated as corrupt.
pub const HERMITICITY_TOLERANCE: f64 = 1e-8;

/// Imaginary residue tolerated when converting back to a Wigner function.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;

/// Position-basis density matrix in centre/offset layout.
///
/// `values[i * n + m] = <x_i + y_m| rho |x_i - y_m>` where `x_i` is the grid
/// coordinate and `y_m = (m - n/2) * grid.offset_spacing()`. Column `n/2`
/// (`y = 0`) is the diagonal. Hermiticity reads
/// `values[i][m] = conj(values[i][(n - m) % n])`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionDensityMatrix {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl PositionDensityMatrix {
    pub fn from_values(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(SimError::InvalidParameter(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(PositionDensityMatrix { grid, values })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `<x_i + y_m| rho |x_i - y_m>`.
    #[inline]
    pub fn at(&self, i: usize, m: usize) -> Complex64 {
        self.values[i * self.grid.n_points() + m]
    }

    /// `<x_i| rho |x_i>` for every grid point.
    pub fn diagonal(&self) -> Vec<Complex64> {
        let c = self.grid.center_index();
        (0..self.grid.n_points()).map(|i| self.at(i, c)).collect()
    }

    /// `sum_i <x_i| rho |x_i> * spacing`.
    pub fn trace(&self) -> Complex64 {
        let c = self.grid.center_index();
        let h = self.grid.spacing();
        let re = pairwise_sum_by(self.grid.n_points(), &|i| self.at(i, c).re);
        let im = pairwise_sum_by(self.grid.n_points(), &|i| self.at(i, c).im);
        Complex64::new(re, im) * h
    }

    /// Largest `|rho(x, x') - conj(rho(x', x))|` over the grid.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.grid.n_points();
        (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .map(|m| (self.at(i, m) - self.at(i, (n - m) % n).conj()).norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &PositionDensityMatrix) -> Result<f64> {
        if self.grid != other.grid {
            return Err(SimError::GridMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// `(-1)^m`; `n/2` is even for every valid grid so this equals `(-1)^(m - n/2)`.
#[inline]
fn alternating(m: usize) -> f64 {
    if m.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `R(x, y) = integral exp(i p y) W(x, p) dp`, one inverse FFT per row.
pub fn wigner_to_density(state: &WignerState) -> PositionDensityMatrix {
    let grid = *state.grid();
    let n = grid.n_points();
    let h = grid.spacing();
    let mut buf = to_complex(state.values());
    RowFft::new(n, FftDirection::Inverse).process_rows(&mut buf);
    let mut values = vec![Complex64::new(0.0, 0.0); n * n];
    values
        .par_chunks_mut(n)
        .zip(buf.par_chunks(n))
        .for_each(|(out, row)| {
            for (m, v) in out.iter_mut().enumerate() {
                *v = row[(m + n / 2) % n] * (h * alternating(m));
            }
        });
    PositionDensityMatrix { grid, values }
}

/// `W(x, p) = (1 / 2 pi) integral exp(-i p y) R(x, y) dy`; exact inverse of
/// [`wigner_to_density`].
pub fn density_to_wigner(rho: &PositionDensityMatrix) -> Result<WignerState> {
    let defect = rho.hermiticity_defect();
    if defect > HERMITICITY_TOLERANCE {
        return Err(SimError::Hermiticity { defect });
    }
    let grid = rho.grid;
    let n = grid.n_points();
    let scale = 1.0 / (n as f64 * grid.spacing());
    let mut buf = vec![Complex64::new(0.0, 0.0); n * n];
    buf.par_chunks_mut(n)
        .zip(rho.values.par_chunks(n))
        .for_each(|(out, row)| {
            for (m, v) in row.iter().enumerate() {
                out[(m + n / 2) % n] = v * alternating(m);
            }
        });
    RowFft::new(n, FftDirection::Forward).process_rows(&mut buf);
    let residue = buf.iter().map(|c| c.im.abs()).fold(0.0, f64::max) * scale;
    if residue > IMAGINARY_TOLERANCE {
        return Err(SimError::ImaginaryResidue { residue });
    }
    WignerState::from_values(grid, buf.iter().map(|c| c.re * scale).collect())
}

/// Precomputed phase factors of the position-diagonal gate
/// `exp(i gain x^order)` acting as `rho -> U rho U^dagger`.
///
/// In the `[x, p] = 2i` convention the gate is generated by `gain x^order / 2`,
/// which makes the classical phase-space map `p -> p + order * gain * x^(order-1)`;
/// for the cubic gate that is `p -> p + 3 gain x^2`.
pub struct KickOperator {
    grid: GridSpec,
    gain: f64,
    order: u32,
    phases: Vec<Complex64>,
}

impl KickOperator {
    pub fn new(grid: &GridSpec, gain: f64, order: u32) -> Result<Self> {
        if order < 3 {
            return Err(SimError::InvalidParameter(format!(
                "nonlinearity order {order} must be >= 3"
            )));
        }
        if !gain.is_finite() {
            return Err(SimError::InvalidParameter(format!("gain {gain} is not finite")));
        }
        if kick_aliasing_risk(grid, gain, order) {
            log::warn!(
                "kick gain {gain} (order {order}) under-resolves the phase gradient at the grid edge"
            );
        }
        let n = grid.n_points();
        let k = order as i32;
        let half = 0.5 * gain;
        let phases = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let x = grid.coordinate(idx / n);
                let y = grid.offset(idx % n);
                let phase = half * ((x + y).powi(k) - (x - y).powi(k));
                if idx % n == 0 {
                    // Offsets -Y and +Y are the same periodic sample; averaging
                    // their conjugate phases keeps the column real (Hermitian).
                    Complex64::new(phase.cos(), 0.0)
                } else {
                    Complex64::cis(phase)
                }
            })
            .collect();
        Ok(KickOperator {
            grid: *grid,
            gain,
            order,
            phases,
        })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn apply(&self, rho: &PositionDensityMatrix) -> Result<PositionDensityMatrix> {
        if rho.grid != self.grid {
            return Err(SimError::GridMismatch);
        }
        let values = rho
            .values
            .par_iter()
            .zip(self.phases.par_iter())
            .map(|(v, ph)| v * ph)
            .collect();
        Ok(PositionDensityMatrix {
            grid: self.grid,
            values,
        })
    }

    /// Kick applied directly to a Wigner function (through the density matrix).
    pub fn apply_wigner(&self, state: &WignerState) -> Result<WignerState> {
        density_to_wigner(&self.apply(&wigner_to_density(state))?)
    }
}

/// True when `|gain| * max|x|^order * spacing > pi/2`, i.e. the kick phase
/// gradient at the grid edge is under-resolved.
pub fn kick_aliasing_risk(grid: &GridSpec, gain: f64, order: u32) -> bool {
    gain.abs() * grid.half_extent().powi(order as i32) * grid.spacing() > FRAC_PI_2
}

/// Instantaneous nonlinear pulse in the position basis. Diagonal entries and
/// the trace are left untouched; see [`KickOperator`] for the phase convention.
pub fn nonlinear_kick(
    rho: &PositionDensityMatrix,
    pulse_gain: f64,
    order: u32,
) -> Result<PositionDensityMatrix> {
    KickOperator::new(rho.grid(), pulse_gain, order)?.apply(rho)
}

/// Exact quarter turn `W_f(x, p) = W_i(-p, x)`, periodic at the grid edge.
fn quarter_turn(n: usize, values: &[f64]) -> Vec<f64> {
    (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            values[((n - j) % n) * n + i]
        })
        .collect()
}

/// Rotation by `|angle| <= pi/4` as shear-x, shear-p, shear-x, each an exact
/// Fourier translation.
fn shear_rotation(grid: &GridSpec, values: &[f64], angle: f64) -> Vec<f64> {
    let n = grid.n_points();
    let wavenumbers: Vec<f64> = (0..n).map(|k| grid.wavenumber(k)).collect();
    let a = -(0.5 * angle).tan();
    let b = angle.sin();
    // f(x + a p, p): translate each fixed-p column along x.
    let shear_x = |v: &[f64]| fourier_shift(n, &wavenumbers, v, |j| a * grid.coordinate(j), false);
    let once = shear_x(values);
    // f(x, p + b x): translate each fixed-x row along p.
    let twice = fourier_shift(n, &wavenumbers, &once, |i| b * grid.coordinate(i), true);
    shear_x(&twice)
}

/// Phase-space rotation
/// `W_f(x, p) = W_i(x cos t - p sin t, p cos t + x sin t)`.
///
/// The angle is reduced to `[0, 2 pi)`, split into exact quarter turns and a
/// residual in `[-pi/4, pi/4]` handled by three Fourier shears.
pub fn rotate(state: &WignerState, angle: f64) -> WignerState {
    let grid = *state.grid();
    let n = grid.n_points();
    let reduced = angle.rem_euclid(TAU);
    let quarters = (reduced / FRAC_PI_2).round();
    let residual = reduced - quarters * FRAC_PI_2;
    let mut values = state.values().to_vec();
    for _ in 0..(quarters as usize % 4) {
        values = quarter_turn(n, &values);
    }
    if residual != 0.0 {
        values = shear_rotation(&grid, &values, residual);
    }
    WignerState::from_values(grid, values)
        .expect("rotation preserves the grid")
        .with_metadata(state.metadata.clone())
}

/// Width of the isotropic Gaussian bath kernel applied once per period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpec", into = "KernelSpec")]
pub struct ThermalKernelParams {
    kernel_variance: f64,
    derived_from: Option<BathParams>,
}

/// Bath occupation and damping-to-frequency ratio `eta_m / Omega_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub n_th: f64,
    pub eta_over_omega: f64,
}

#[derive(Serialize, Deserialize)]
struct KernelSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kernel_variance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_th: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eta_over_omega: Option<f64>,
}

impl TryFrom<KernelSpec> for ThermalKernelParams {
    type Error = SimError;

    fn try_from(spec: KernelSpec) -> Result<Self> {
        match (spec.kernel_variance, spec.n_th, spec.eta_over_omega) {
            (Some(v), None, None) => ThermalKernelParams::new(v),
            (None, Some(n_th), Some(eta)) => ThermalKernelParams::from_bath(n_th, eta),
            (Some(v), Some(n_th), Some(eta)) => {
                let derived = ThermalKernelParams::from_bath(n_th, eta)?;
                if (derived.kernel_variance - v).abs() > 1e-12 * v.abs().max(1.0) {
                    return Err(SimError::InvalidParameter(format!(
                        "kernel_variance {v} disagrees with bath parameters ({})",
                        derived.kernel_variance
                    )));
                }
                Ok(derived)
            }
            _ => Err(SimError::InvalidParameter(
                "kernel needs kernel_variance or both n_th and eta_over_omega".into(),
            )),
        }
    }
}

impl From<ThermalKernelParams> for KernelSpec {
    fn from(k: ThermalKernelParams) -> Self {
        KernelSpec {
            kernel_variance: Some(k.kernel_variance),
            n_th: k.derived_from.map(|b| b.n_th),
            eta_over_omega: k.derived_from.map(|b| b.eta_over_omega),
        }
    }
}

impl ThermalKernelParams {
    pub fn new(kernel_variance: f64) -> Result<Self> {
        if !(kernel_variance.is_finite() && kernel_variance >= 0.0) {
            return Err(SimError::InvalidParameter(format!(
                "kernel_variance = {kernel_variance} must be >= 0"
            )));
        }
        Ok(ThermalKernelParams {
            kernel_variance,
            derived_from: None,
        })
    }

    /// `(2 n_th + 1) * 2 pi * eta_m / Omega_m`: bath variance times the
    /// per-period coupling `theta^2`.
    pub fn from_bath(n_th: f64, eta_over_omega: f64) -> Result<Self> {
        if !(n_th.is_finite() && n_th >= 0.0 && eta_over_omega.is_finite() && eta_over_omega >= 0.0)
        {
            return Err(SimError::InvalidParameter(format!(
                "bath parameters n_th = {n_th}, eta/omega = {eta_over_omega} must be >= 0"
            )));
        }
        Ok(ThermalKernelParams {
            kernel_variance: (2.0 * n_th + 1.0) * TAU * eta_over_omega,
            derived_from: Some(BathParams { n_th, eta_over_omega }),
        })
    }

    pub fn kernel_variance(&self) -> f64 {
        self.kernel_variance
    }

    pub fn derived_from(&self) -> Option<BathParams> {
        self.derived_from
    }
}

/// Convolution with `exp(-(u^2 + v^2) / (2 sigma)) / (2 pi sigma)`, applied
/// as a product with the kernel's characteristic function so that narrow
/// kernels are never sampled in real space.
pub fn damp(state: &WignerState, kernel: &ThermalKernelParams) -> WignerState {
    let sigma = kernel.kernel_variance;
    if sigma == 0.0 {
        return state.clone();
    }
    let grid = *state.grid();
    let n = grid.n_points();
    let forward = RowFft::new(n, FftDirection::Forward);
    let inverse = RowFft::new(n, FftDirection::Inverse);
    let factors: Vec<f64> = (0..n)
        .map(|k| (-0.5 * sigma * grid.wavenumber(k).powi(2)).exp())
        .collect();

    let mut buf = to_complex(state.values());
    forward.process_rows(&mut buf);
    let mut buf = transpose(n, &buf);
    forward.process_rows(&mut buf);
    buf.par_chunks_mut(n).enumerate().for_each(|(r, row)| {
        for (c, f) in row.iter_mut().zip(&factors) {
            *c *= factors[r] * f;
        }
    });
    inverse.process_rows(&mut buf);
    let mut buf = transpose(n, &buf);
    inverse.process_rows(&mut buf);
    let norm = 1.0 / (n * n) as f64;
    let values = buf.par_iter().map(|c| c.re * norm).collect();
    WignerState::from_values(grid, values)
        .expect("damping preserves the grid")
        .with_metadata(state.metadata.clone())
}

/// Rotation angle that completes a period after `kicks` slices of `angle`.
pub(crate) fn period_remainder(kicks: usize, angle: f64) -> f64 {
    TAU - kicks as f64 * angle
}

/// Full turn, for readability at call sites.
pub const FULL_TURN: f64 = 2.0 * PI;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::moment;
    use crate::grid::make_grid;
    use crate::states::{airy_reference_grid, ideal_cubic_wigner, squeezed_thermal, SqueezedThermalParams};

    fn grid() -> GridSpec {
        make_grid(256, 16.0).unwrap()
    }

    fn fig2_state(g: &GridSpec) -> WignerState {
        squeezed_thermal(g, SqueezedThermalParams::new(0.05, 1.6).unwrap()).unwrap()
    }

    fn vacuum(g: &GridSpec) -> WignerState {
        squeezed_thermal(g, SqueezedThermalParams::default()).unwrap()
    }

    #[test]
    fn vacuum_density_matrix_is_gaussian() {
        let g = grid();
        let rho = wigner_to_density(&vacuum(&g));
        let n = g.n_points();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for m in 0..n {
                let (x, y) = (g.coordinate(i), g.offset(m));
                let (a, b) = (x + y, x - y);
                let expected = (-(a * a + b * b) / 4.0).exp() / TAU.sqrt();
                worst = worst.max((rho.at(i, m) - expected).norm());
            }
        }
        assert!(worst < 1e-12, "worst {worst:e}");
        let diag = rho.diagonal();
        let c = g.center_index();
        assert!((diag[c].re - 1.0 / TAU.sqrt()).abs() < 1e-12);
        assert!((rho.trace() - 1.0).norm() < 1e-6);
    }

    #[test]
    fn round_trip_is_exact() {
        let g = grid();
        let w = fig2_state(&g);
        let back = density_to_wigner(&wigner_to_density(&w)).unwrap();
        assert!(w.max_abs_diff(&back).unwrap() < 1e-9);
        let c = g.center_index();
        let vac = density_to_wigner(&wigner_to_density(&vacuum(&g))).unwrap();
        assert!((vac.at(c, c) - 1.0 / TAU).abs() < 1e-8);
    }

    #[test]
    fn airy_round_trip() {
        let g = airy_reference_grid();
        let w = ideal_cubic_wigner(&g, 0.05).unwrap();
        let rho = wigner_to_density(&w);
        assert!(rho.hermiticity_defect() < 1e-12);
        let back = density_to_wigner(&rho).unwrap();
        assert!(w.max_abs_diff(&back).unwrap() < 1e-8);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let g = grid();
        let mut rho = wigner_to_density(&vacuum(&g));
        let n = g.n_points();
        rho.values[3 * n + 17] += Complex64::new(0.0, 1e-3);
        assert!(matches!(density_to_wigner(&rho), Err(SimError::Hermiticity { .. })));
    }

    #[test]
    fn zero_gain_kick_is_bit_exact_identity() {
        let g = grid();
        let rho = wigner_to_density(&fig2_state(&g));
        assert_eq!(nonlinear_kick(&rho, 0.0, 3).unwrap(), rho);
    }

    #[test]
    fn kick_keeps_diagonal_and_hermiticity() {
        let g = grid();
        let rho = wigner_to_density(&fig2_state(&g));
        let kicked = nonlinear_kick(&rho, 0.013, 3).unwrap();
        assert_eq!(kicked.diagonal(), rho.diagonal());
        assert!((kicked.trace() - rho.trace()).norm() < 1e-15);
        assert!(kicked.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn kick_keeps_wide_squeezed_state_hermitian() {
        // Enough high-momentum content reaches the Nyquist offset to matter.
        let mut c = crate::protocol::ProtocolConfig::figure2(2, 12);
        c.initial = SqueezedThermalParams::new(0.1, 2.0).unwrap();
        let w = crate::protocol::run_protocol(&c, false).unwrap().final_state;
        let kicked = nonlinear_kick(&wigner_to_density(&w), 0.05 / 24.0, 3).unwrap();
        assert!(kicked.hermiticity_defect() < 1e-15);
    }

    #[test]
    fn kicks_compose_additively() {
        let g = grid();
        let rho = wigner_to_density(&fig2_state(&g));
        let two = nonlinear_kick(&nonlinear_kick(&rho, 0.01, 3).unwrap(), 0.02, 3).unwrap();
        let one = nonlinear_kick(&rho, 0.03, 3).unwrap();
        assert!(two.max_abs_diff(&one).unwrap() < 1e-12);
    }

    #[test]
    fn kick_rejects_low_order() {
        let g = grid();
        let rho = wigner_to_density(&vacuum(&g));
        assert!(nonlinear_kick(&rho, 0.01, 2).is_err());
    }

    #[test]
    fn aliasing_guard_threshold() {
        let g = GridSpec::default();
        assert!(!kick_aliasing_risk(&g, 0.05 / 24.0, 3));
        assert!(kick_aliasing_risk(&g, 1.0, 3));
    }

    #[test]
    fn zero_rotation_is_identity() {
        let g = grid();
        let w = fig2_state(&g);
        assert_eq!(rotate(&w, 0.0).values(), w.values());
        assert_eq!(rotate(&w, FULL_TURN).values(), w.values());
    }

    #[test]
    fn vacuum_is_rotation_invariant() {
        let g = grid();
        let w = vacuum(&g);
        for angle in [0.1, 0.7, 1.3, 2.0, -0.4, 5.5] {
            assert!(w.max_abs_diff(&rotate(&w, angle)).unwrap() < 1e-9, "angle {angle}");
        }
    }

    #[test]
    fn rotation_matches_analytic_gaussian() {
        let g = grid();
        let w = fig2_state(&g);
        let angle = 0.3;
        let rotated = rotate(&w, angle);
        let params = SqueezedThermalParams::new(0.05, 1.6).unwrap();
        let nu = 2.0 * params.n0 + 1.0;
        let (c, s) = (angle.cos(), angle.sin());
        let exact = WignerState::from_fn(g, |x, p| {
            let (xi, pi) = (x * c - p * s, p * c + x * s);
            (-0.5 * ((xi / 1.6).powi(2) + (pi * 1.6).powi(2)) / nu).exp() / (TAU * nu)
        });
        assert!(rotated.max_abs_diff(&exact).unwrap() < 1e-10);
    }

    #[test]
    fn rotation_transforms_covariance_by_congruence() {
        let g = grid();
        let w = fig2_state(&g);
        let angle = 1.1;
        let r = rotate(&w, angle);
        let (vx, vp) = (2.816, 0.4296875);
        let (c, s) = (angle.cos(), angle.sin());
        // x_f = c x_i + s p_i for the inverse map.
        assert!((moment(&r, 2, 0).unwrap() - (c * c * vx + s * s * vp)).abs() < 1e-6);
        assert!((moment(&r, 0, 2).unwrap() - (s * s * vx + c * c * vp)).abs() < 1e-6);
        assert!((moment(&r, 1, 1).unwrap() - (c * s * (vp - vx))).abs() < 1e-6);
        assert!((r.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rotations_add() {
        let g = grid();
        let w = fig2_state(&g);
        for (a, b) in [(0.2, 0.5), (1.0, 0.7), (0.3, -0.3)] {
            let two = rotate(&rotate(&w, a), b);
            let one = rotate(&w, a + b);
            assert!(two.max_abs_diff(&one).unwrap() < 1e-7, "{a} + {b}");
        }
    }

    #[test]
    fn zero_kernel_is_identity() {
        let g = grid();
        let w = fig2_state(&g);
        let k = ThermalKernelParams::new(0.0).unwrap();
        assert!(damp(&w, &k).max_abs_diff(&w).unwrap() < 1e-12);
    }

    #[test]
    fn damping_adds_kernel_variance() {
        let g = grid();
        let w = vacuum(&g);
        let d = damp(&w, &ThermalKernelParams::new(0.03).unwrap());
        assert!((moment(&d, 2, 0).unwrap() - 1.03).abs() < 1e-6);
        assert!((moment(&d, 0, 2).unwrap() - 1.03).abs() < 1e-6);
        assert!(moment(&d, 1, 0).unwrap().abs() < 1e-8);
        assert!((d.norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn damping_semigroup() {
        let g = grid();
        let w = KickOperator::new(&g, 0.05, 3).unwrap().apply_wigner(&fig2_state(&g)).unwrap();
        let k = |v| ThermalKernelParams::new(v).unwrap();
        let two = damp(&damp(&w, &k(0.01)), &k(0.02));
        let one = damp(&w, &k(0.03));
        assert!(two.max_abs_diff(&one).unwrap() < 1e-9);
    }

    #[test]
    fn damping_cannot_deepen_negativity() {
        let g = airy_reference_grid();
        let w = ideal_cubic_wigner(&g, 0.05).unwrap();
        let d = damp(&w, &ThermalKernelParams::new(0.03).unwrap());
        assert!(d.min_value() >= w.min_value() - 1e-9);
    }

    #[test]
    fn kernel_from_bath() {
        let k = ThermalKernelParams::from_bath(0.5, 1.0 / TAU).unwrap();
        assert!((k.kernel_variance() - 2.0).abs() < 1e-15);
        assert!(ThermalKernelParams::new(-0.1).is_err());
        let parsed: ThermalKernelParams =
            serde_json::from_str(r#"{"n_th":0.5,"eta_over_omega":0.15915494309189535}"#).unwrap();
        assert!((parsed.kernel_variance() - 2.0).abs() < 1e-12);
        assert!(serde_json::from_str::<ThermalKernelParams>(r#"{"n_th":0.5}"#).is_err());
        assert!(serde_json::from_str::<ThermalKernelParams>(r#"{"kernel_variance":-1}"#).is_err());
    }
}
