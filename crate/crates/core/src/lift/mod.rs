//! Horizontal lifting of end-effector paths and the conservation-law monitors.

pub mod curve;
pub mod export;
pub mod integrate;
pub mod monitor;

pub use curve::{CurveSpec, Piece, Segment};
pub use export::write_csv;
pub use integrate::{
    horizontal_angle_rates, horizontal_vector, kernel_basis, lift_path, project_to_fiber, singular_threshold,
    InvariantSnapshot, LiftOptions, LiftTrajectory, Method, StepDiagnostics,
};
pub use monitor::{monitor_invariants, DriftReport};
