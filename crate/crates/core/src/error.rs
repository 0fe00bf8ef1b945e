use thiserror::Error;

use crate::model::SystemFileError;
use crate::MAX_LEVELS;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system: {0}")]
    InvalidSystem(String),

    #[error("system has {0} levels; at most {MAX_LEVELS} are supported")]
    TooManyLevels(usize),

    #[error("no time-independent rotating frame: {violated} cycle constraint(s) violated")]
    InfeasibleFrame { violated: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("invalid time grid: {0}")]
    InvalidTimes(String),

    #[error("Rabi condition is vacuous for a case-1 group (kernel exists for any Rabi frequencies)")]
    VacuousCondition,

    #[error("defective zero eigenvalue: left kernel has dimension {left}, right kernel {right}")]
    DefectiveKernel { left: usize, right: usize },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("invalid parameter path `{0}`")]
    InvalidParameterPath(String),

    #[error("invalid initial state `{0}`")]
    InvalidInitialState(String),

    #[error(transparent)]
    SystemFile(#[from] SystemFileError),
}
