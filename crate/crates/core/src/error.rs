use thiserror::Error;

use crate::protocol::StepRecord;

pub type Result<T> = std::result::Result<T, SimError>;

/// Everything that can go wrong inside the simulator.
///
/// Variants split into two families: validation failures (bad input,
/// unresolvable grids, malformed files) and numerical-invariant failures
/// (a computation produced something that is not a quantum state any more).
/// [`SimError::is_numerical`] tells them apart.
#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("state does not fit the grid: needs half-extent {required:.4}, grid has {available:.4}")]
    GridOverflow { required: f64, available: f64 },

    #[error("grid under-resolves the state: {0}")]
    Resolution(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown parameter name `{0}`")]
    UnknownParameter(String),

    #[error("kick schedule does not fit in one period: N*angle = {window:.6} rad >= 2*pi")]
    Schedule { window: f64 },

    #[error("moment order {0} exceeds the supported maximum of 6")]
    MomentOrder(u32),

    #[error("density matrix is not Hermitian: defect {defect:.3e}")]
    Hermiticity { defect: f64 },

    #[error("Wigner function has imaginary residue {residue:.3e}")]
    ImaginaryResidue { residue: f64 },

    #[error("Var(x^2) = {0:.3e} is too small to locate the optimal lambda")]
    DegenerateVariance(f64),

    #[error("nonlinear variance went negative ({0:.3e}); grid is corrupted")]
    NegativeVariance(f64),

    #[error("normalization drifted by {defect:.3e} at step {step}")]
    NormDrift {
        step: usize,
        defect: f64,
        log: Box<Vec<StepRecord>>,
    },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("state file has bad magic bytes {found:?}")]
    BadMagic { found: [u8; 8] },

    #[error("state file truncated: expected {expected} bytes, found {actual}")]
    Truncated { expected: usize, actual: usize },

    #[error("state file header: {0}")]
    Header(#[source] serde_json::Error),

    #[error("config: {0}")]
    Config(#[source] serde_json::Error),

    #[error("malformed CSV: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl SimError {
    /// True when the error signals a broken numerical invariant rather than
    /// bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            SimError::Hermiticity { .. }
                | SimError::ImaginaryResidue { .. }
                | SimError::DegenerateVariance(_)
                | SimError::NegativeVariance(_)
                | SimError::NormDrift { .. }
        )
    }
}
