//! Phase-space simulation of a harmonic oscillator driven by stroboscopic
//! high-order nonlinear kicks and weak thermal damping.
//!
//! States live on a uniform square grid as Wigner functions. A period of the
//! protocol applies `N` instantaneous kicks separated by small rotations,
//! completes the turn, and convolves with a Gaussian bath kernel. The
//! [`analysis`] module turns states into nonlinear-squeezing and negativity
//! figures; [`experiments`] drives sweeps and the shipped experiments; [`io`]
//! handles state files, configs and CSV output.
//!
//! Quadratures obey `[x, p] = 2i`: the vacuum has unit variance.

pub mod analysis;
pub mod error;
pub mod experiments;
mod fourier;
pub mod grid;
pub mod io;
pub mod numerics;
pub mod protocol;
pub mod special;
pub mod states;
pub mod transforms;

pub use analysis::{
    moment, negativity_report, nonlinear_variance, optimal_lambda, squeezing_report,
    LambdaRange, NegativityReport, SqueezingReport,
};
pub use error::{Result, SimError};
pub use grid::{coordinate_axis, make_grid, GridSpec};
pub use protocol::{run_protocol, single_period, trotter_convergence, ProtocolConfig, ProtocolTrace};
pub use states::{
    exact_nonlinear_gaussian, ideal_cubic_wigner, squeezed_thermal, SqueezedThermalParams,
    WignerState,
};
pub use transforms::{
    damp, density_to_wigner, nonlinear_kick, rotate, wigner_to_density, PositionDensityMatrix,
    ThermalKernelParams,
};
