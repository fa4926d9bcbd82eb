//! The Moebius group acting on configurations: the planar SU(1,1) model and
//! its vector-field algebra, the flows `Γ_t^s` on `S^{d-1}`, the per-class
//! product action of `G(a, d)`, Moebius invariants, and the reachability
//! oracle built on them.

pub mod fields;
pub mod flow;
pub mod group;
pub mod invariants;
pub mod reach;
pub mod su11;

pub use fields::{grad_x, grad_y, lie_bracket_numeric, lie_bracket_numeric_with_step, planar_fields, PlanarField};
pub use flow::{flow_gamma, flow_gamma_planar, rotation_field, sphere_gradient};
pub use group::{act_group, Generator, GroupElement, MoebiusElement, MoebiusWord};
pub use invariants::{
    cross_ratio, cross_ratio_complex, cross_ratio_complex_with_pole, cross_ratio_of, cross_ratio_weak,
    invariant_report, orientation, InvariantReport, InvariantValue,
};
pub use reach::{reachable, vandermonde_rank, ReachReport, Verdict};
pub use su11::{act_homography, moebius_through_triple, SU11Algebra, SU11Element};
