use thiserror::Error;

use crate::solver::Trajectory;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids ({left} vs {right} nodes)")]
    GridMismatch { left: usize, right: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("invalid flux: {0}")]
    InvalidFlux(String),

    #[error("invalid forcing: {0}")]
    InvalidForcing(String),

    #[error("forcing path does not cover t = {t} (available [{start}, {end}])")]
    ForcingOutOfRange { t: f64, start: f64, end: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("solution blew up at t = {t}: |u|_inf = {linf:e}")]
    Blowup {
        t: f64,
        linf: f64,
        /// Everything recorded up to the abort.
        trajectory: Box<Trajectory>,
    },

    #[error("coefficient path does not cover t = {t} (available [{start}, {end}])")]
    CoefficientGap { t: f64, start: f64, end: f64 },

    #[error("convexity required: flux has sigma_floor = {0}")]
    ConvexityRequired(f64),

    #[error("mean mismatch: <u0> = {left}, <v0> = {right}")]
    MeanMismatch { left: f64, right: f64 },

    #[error("nonzero mean perturbation: <p> = {0:e}")]
    NonzeroMean(f64),

    #[error("zero difference: contraction factor undefined")]
    ZeroDifference,

    #[error("negative initial data: min = {0:e}")]
    NegativeData(f64),

    #[error("initial data identically zero")]
    ZeroData,

    #[error("too few points for a decay fit: {got} usable, need {need}")]
    TooFewPoints { got: usize, need: usize },

    #[error("underflowed decay: every value in the window is below the noise floor {0:e}")]
    UnderflowedDecay(f64),

    #[error("run too short: {0}")]
    RunTooShort(String),

    #[error("{0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
