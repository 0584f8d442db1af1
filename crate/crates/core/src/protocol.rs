//! The stroboscopic protocol: per period, `N` kicks separated by small
//! rotations, a closing rotation back to a full turn, then the bath kernel.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::analysis::moment;
use crate::error::{Result, SimError};
use crate::grid::{make_grid, GridSpec};
use crate::states::{squeezed_thermal, SqueezedThermalParams, WignerState};
use crate::transforms::{damp, period_remainder, rotate, KickOperator, ThermalKernelParams};

/// Any step whose norm drifts further than this aborts the run.
pub const NORM_ABORT: f64 = 1e-5;

fn default_spacing() -> f64 {
    PI / 180.0
}

fn default_order() -> u32 {
    3
}

/// Physical and scheduling parameters of one protocol run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    /// Total nonlinear gain accumulated over the whole run.
    pub total_gain: f64,
    pub periods: usize,
    pub kicks_per_period: usize,
    /// Rotation between consecutive kicks, radians.
    #[serde(default = "default_spacing")]
    pub kick_spacing_angle: f64,
    #[serde(default = "default_order")]
    pub order: u32,
    pub initial: SqueezedThermalParams,
    pub kernel: ThermalKernelParams,
    #[serde(default)]
    pub grid: GridSpec,
}

/// Names accepted by [`ProtocolConfig::with_parameter`].
pub const PARAMETER_NAMES: [&str; 10] = [
    "total_gain",
    "periods",
    "kicks_per_period",
    "kick_spacing_angle",
    "order",
    "s",
    "n0",
    "kernel_variance",
    "n_points",
    "half_extent",
];

impl ProtocolConfig {
    /// The settings of the shipped squeezing experiment for one
    /// `(periods, kicks)` split.
    pub fn figure2(periods: usize, kicks_per_period: usize) -> Self {
        ProtocolConfig {
            total_gain: 0.05,
            periods,
            kicks_per_period,
            kick_spacing_angle: default_spacing(),
            order: 3,
            initial: SqueezedThermalParams { n0: 0.05, s: 1.6 },
            kernel: ThermalKernelParams::new(0.03).expect("valid kernel"),
            grid: GridSpec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.total_gain.is_finite() {
            return Err(SimError::InvalidParameter(format!(
                "total_gain = {} is not finite",
                self.total_gain
            )));
        }
        if self.periods == 0 || self.kicks_per_period == 0 {
            return Err(SimError::InvalidParameter(
                "periods and kicks_per_period must be positive".into(),
            ));
        }
        if !(self.kick_spacing_angle.is_finite() && self.kick_spacing_angle >= 0.0) {
            return Err(SimError::InvalidParameter(format!(
                "kick_spacing_angle = {} must be >= 0",
                self.kick_spacing_angle
            )));
        }
        let window = self.kicks_per_period as f64 * self.kick_spacing_angle;
        if window >= TAU {
            return Err(SimError::Schedule { window });
        }
        if self.order < 3 {
            return Err(SimError::InvalidParameter(format!("order {} must be >= 3", self.order)));
        }
        self.initial.validate()
    }

    pub fn total_kicks(&self) -> usize {
        self.periods * self.kicks_per_period
    }

    /// `total_gain / (periods * kicks_per_period)`.
    pub fn per_pulse_gain(&self) -> f64 {
        self.total_gain / self.total_kicks() as f64
    }

    /// Copy with one named parameter replaced. Integer parameters must be
    /// given as whole numbers.
    pub fn with_parameter(&self, name: &str, value: f64) -> Result<Self> {
        if !value.is_finite() {
            return Err(SimError::InvalidParameter(format!("{name} = {value} is not finite")));
        }
        let whole = || -> Result<usize> {
            if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
                Ok(value as usize)
            } else {
                Err(SimError::InvalidParameter(format!("{name} = {value} must be a whole number")))
            }
        };
        let mut c = self.clone();
        match name {
            "total_gain" => c.total_gain = value,
            "periods" => c.periods = whole()?,
            "kicks_per_period" => c.kicks_per_period = whole()?,
            "kick_spacing_angle" => c.kick_spacing_angle = value,
            "order" => c.order = whole()? as u32,
            "s" => c.initial.s = value,
            "n0" => c.initial.n0 = value,
            "kernel_variance" => c.kernel = ThermalKernelParams::new(value)?,
            "n_points" => c.grid = make_grid(whole()?, c.grid.half_extent())?,
            "half_extent" => c.grid = make_grid(c.grid.n_points(), value)?,
            _ => return Err(SimError::UnknownParameter(name.to_string())),
        }
        Ok(c)
    }

    /// Same window and total gain, sliced `refinement` times finer.
    pub fn refined(&self, refinement: usize) -> Result<Self> {
        if refinement == 0 {
            return Err(SimError::InvalidParameter("refinement must be >= 1".into()));
        }
        let mut c = self.clone();
        c.kicks_per_period *= refinement;
        c.kick_spacing_angle /= refinement as f64;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Kick,
    Rotate,
    Damp,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub period: usize,
    pub kind: StepKind,
    /// Pulse gain, rotation angle or kernel variance.
    pub parameter: f64,
    /// `|norm after - norm before|`.
    pub norm_defect: f64,
}

#[derive(Debug, Clone)]
pub struct ProtocolTrace {
    /// State after each period when requested.
    pub snapshots: Option<Vec<WignerState>>,
    pub final_state: WignerState,
    pub log: Vec<StepRecord>,
}

/// Reusable pieces of a run: the kick phases are computed once.
struct Stepper<'a> {
    config: &'a ProtocolConfig,
    kick: KickOperator,
    log: Vec<StepRecord>,
}

impl<'a> Stepper<'a> {
    fn new(config: &'a ProtocolConfig) -> Result<Self> {
        config.validate()?;
        Ok(Stepper {
            config,
            kick: KickOperator::new(&config.grid, config.per_pulse_gain(), config.order)?,
            log: Vec::new(),
        })
    }

    fn record(&mut self, period: usize, kind: StepKind, parameter: f64, before: f64, after: &WignerState) -> Result<()> {
        let norm_defect = (after.norm() - before).abs();
        self.log.push(StepRecord {
            period,
            kind,
            parameter,
            norm_defect,
        });
        if norm_defect > NORM_ABORT || !norm_defect.is_finite() {
            return Err(SimError::NormDrift {
                step: self.log.len() - 1,
                defect: norm_defect,
                log: Box::new(std::mem::take(&mut self.log)),
            });
        }
        Ok(())
    }

    fn period(&mut self, state: &WignerState, period: usize) -> Result<WignerState> {
        let c = self.config;
        if state.grid() != &c.grid {
            return Err(SimError::GridMismatch);
        }
        let mut w = state.clone();
        for _ in 0..c.kicks_per_period {
            let before = w.norm();
            w = self.kick.apply_wigner(&w)?;
            self.record(period, StepKind::Kick, self.kick.gain(), before, &w)?;
            let before = w.norm();
            w = rotate(&w, c.kick_spacing_angle);
            self.record(period, StepKind::Rotate, c.kick_spacing_angle, before, &w)?;
        }
        let remainder = period_remainder(c.kicks_per_period, c.kick_spacing_angle);
        let before = w.norm();
        w = rotate(&w, remainder);
        self.record(period, StepKind::Rotate, remainder, before, &w)?;
        let before = w.norm();
        w = damp(&w, &c.kernel);
        self.record(period, StepKind::Damp, c.kernel.kernel_variance(), before, &w)?;
        Ok(w)
    }
}

/// One period of the protocol applied to `state`.
pub fn single_period(state: &WignerState, config: &ProtocolConfig) -> Result<WignerState> {
    Stepper::new(config)?.period(state, 0)
}

/// Warns when the state's six-sigma radius leaves the grid, where the
/// periodic shears would wrap mass around.
fn check_wraparound(state: &WignerState) -> Result<bool> {
    let (x1, p1) = (moment(state, 1, 0)?, moment(state, 0, 1)?);
    let var_x = moment(state, 2, 0)? - x1 * x1;
    let var_p = moment(state, 0, 2)? - p1 * p1;
    let radius = 6.0 * var_x.max(var_p).max(0.0).sqrt();
    Ok(radius > state.grid().half_extent())
}

/// Prepares the initial Gaussian and applies `periods` protocol periods.
pub fn run_protocol(config: &ProtocolConfig, snapshot_each_period: bool) -> Result<ProtocolTrace> {
    let mut stepper = Stepper::new(config)?;
    let mut w = squeezed_thermal(&config.grid, config.initial)?;
    let mut snapshots = snapshot_each_period.then(Vec::new);
    let mut warned = false;
    for period in 0..config.periods {
        w = stepper.period(&w, period)?;
        if !warned && check_wraparound(&w)? {
            log::warn!("state extends past six sigma of the grid in period {period}; rotations may wrap");
            warned = true;
        }
        if let Some(s) = snapshots.as_mut() {
            s.push(w.clone());
        }
    }
    let final_state = w.with_metadata(format!(
        "protocol gain={} periods={} kicks={} spacing={} order={} n0={} s={} kernel={}",
        config.total_gain,
        config.periods,
        config.kicks_per_period,
        config.kick_spacing_angle,
        config.order,
        config.initial.n0,
        config.initial.s,
        config.kernel.kernel_variance()
    ));
    Ok(ProtocolTrace {
        snapshots,
        final_state,
        log: stepper.log,
    })
}

/// Trotter self-convergence: L-infinity distance between the final states
/// of the runs sliced `refinement` and `refinement / 2` times finer than
/// `config`. Zero for `refinement = 1`.
///
/// Comparing neighbouring refinements (rather than each refinement against
/// the unrefined run) makes the sequence shrink as the splitting converges.
pub fn trotter_convergence(config: &ProtocolConfig, refinement: usize) -> Result<f64> {
    if refinement == 0 {
        return Err(SimError::InvalidParameter("refinement must be >= 1".into()));
    }
    config.validate()?;
    if refinement == 1 {
        return Ok(0.0);
    }
    let fine = run_protocol(&config.refined(refinement)?, false)?.final_state;
    let coarse = run_protocol(&config.refined(refinement / 2)?, false)?.final_state;
    fine.max_abs_diff(&coarse)
}
