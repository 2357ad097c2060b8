use thiserror::Error;

use crate::section::Plane;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate parameters: {0}")]
    DegenerateParameters(String),

    #[error("no control-plane crossing within {max_time} time units")]
    CrossingTimeout { max_time: f64 },

    #[error("numerical blowup: |state| = {norm:.3e} exceeds bound {bound:.3e}")]
    NumericalBlowup { norm: f64, bound: f64 },

    #[error("calibration failed: {0}")]
    CalibrationFailure(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point is not on a control plane (|v_c2| = {offset:.3e})")]
    NotOnSection { offset: f64 },

    #[error("bin index {index} out of range (bins per plane = {bins})")]
    IndexOutOfRange { index: usize, bins: usize },

    #[error("coding table construction failed at plane {plane:?} bin {bin}: {source}")]
    BinFailure {
        plane: Plane,
        bin: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no macrocontrol target on plane {plane:?} from bin {bin} at horizon {horizon}")]
    NoReachableTarget {
        plane: Plane,
        bin: usize,
        horizon: usize,
    },

    #[error("control word did not stabilize within {crossings} crossings")]
    NotStabilized { crossings: usize },

    #[error("visitation word {0} is not in the lookup table")]
    LookupMiss(String),

    #[error("exchange function produced an empty word")]
    EmptyOutput,

    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),

    #[error("catalog is empty")]
    EmptyCatalog,

    #[error("insufficient data: need at least {needed} symbols, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("targeting failed at hop {hop}: {reason}")]
    TargetingFailed { hop: usize, reason: String },

    #[error("configuration fingerprint mismatch: expected {expected}, found {found}")]
    FingerprintMismatch { expected: String, found: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
