use thiserror::Error;

use crate::grid::ModeIndex;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("mean mode not invertible (coefficient {0:e})")]
    MeanModeNotInvertible(f64),

    #[error("multiplier undefined branch: {0}")]
    MultiplierUndefinedBranch(String),

    #[error(
        "quadrature failed to reach tolerance {tol:e}: estimated error {estimate:e} after {evaluations} evaluations"
    )]
    QuadratureFailure {
        tol: f64,
        estimate: f64,
        evaluations: usize,
    },

    #[error("wrong mode class for {system}: {detail}")]
    WrongModeClass { system: &'static str, detail: String },

    #[error("step size underflow at t = {t}: h = {h:e}")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),

    #[error("field not divergence free: relative residual {residual:e} exceeds {tol:e}")]
    NotDivergenceFree { residual: f64, tol: f64 },

    #[error("non-finite value in component {component} at mode {mode:?} (t = {t})")]
    NonFinite {
        component: &'static str,
        mode: ModeIndex,
        t: f64,
    },

    #[error("CFL violation: dt = {dt} exceeds limit {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("remap requested at non-lattice time t = {t} (m = {m})")]
    NonLatticeRemap { t: f64, m: usize },

    #[error("empty series: {0}")]
    EmptySeries(String),

    #[error("class restriction violated: {0}")]
    ClassRestriction(String),

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
