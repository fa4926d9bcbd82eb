//! Horizontal lifting for articulated arms.
//!
//! An arm with segment lengths `a` maps a configuration `z ∈ (S^{d-1})^m` to
//! its end-effector `f(z) = Σ a_j z_j`. Moving the end-effector along a path
//! and taking, at every instant, the joint velocity of least norm gives the
//! *horizontal lift* of the path. This crate computes those lifts and the
//! geometry around them: the Moebius group action preserving horizontality,
//! the invariants that decide reachability, holonomy of loops, and the Morse
//! theory of the product function on fibers.

pub mod arm;
pub mod commands;
pub mod error;
pub mod holonomy;
pub mod lift;
pub mod moebius;
pub mod morse;
pub mod session;

pub use arm::{ArmSpec, Configuration};
pub use error::{Error, Result};
