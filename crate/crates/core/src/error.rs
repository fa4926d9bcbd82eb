use thiserror::Error;

use crate::lift::LiftTrajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The Gram determinant fell below the singular threshold, or the curve
    /// entered the forbidden band around a critical radius.
    #[error("near-critical configuration: det P = {det:.3e}, distance to nearest critical radius = {distance:.3e}")]
    NearCritical {
        det: f64,
        distance: f64,
        /// What was integrated before the abort, when aborting mid-lift.
        partial: Option<Box<LiftTrajectory>>,
    },

    #[error("tracking error {error:.3e} exceeded {limit:.3e} at t = {t}")]
    TrackingDiverged {
        error: f64,
        limit: f64,
        t: f64,
        partial: Option<Box<LiftTrajectory>>,
    },

    #[error("group element carries {found} class factors, arm has {expected} length classes")]
    ClassMismatch { expected: usize, found: usize },

    #[error("coincident points (chordal distance {0:.3e})")]
    CoincidentPoints(f64),

    #[error("triples have opposite orientations; no orientation-preserving map exists")]
    OrientationMismatch,

    #[error("constrained Hessian has an eigenvalue {eigenvalue:.3e} within the zero band")]
    IndeterminateIndex { eigenvalue: f64 },

    #[error("degenerate decomposition: {0}")]
    DegenerateDecomposition(String),

    #[error("end-effector is {distance:.3e} away from the baseline point")]
    NotAtBasepoint { distance: f64 },
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Process exit code for command-line use.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NearCritical { .. } | Error::IndeterminateIndex { .. } => 2,
            Error::TrackingDiverged { .. } => 3,
            _ => 1,
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::InvalidInput(_) => "invalid_input",
            Error::NearCritical { .. } => "near_critical",
            Error::TrackingDiverged { .. } => "tracking_diverged",
            Error::ClassMismatch { .. } => "class_mismatch",
            Error::CoincidentPoints(_) => "coincident_points",
            Error::OrientationMismatch => "orientation_mismatch",
            Error::IndeterminateIndex { .. } => "indeterminate_index",
            Error::DegenerateDecomposition(_) => "degenerate_decomposition",
            Error::NotAtBasepoint { .. } => "not_at_basepoint",
        }
    }

    /// Partial trajectory attached to an aborted lift, if any.
    pub fn partial_trajectory(&self) -> Option<&LiftTrajectory> {
        match self {
            Error::NearCritical { partial, .. } | Error::TrackingDiverged { partial, .. } => {
                partial.as_deref()
            }
            _ => None,
        }
    }
}
