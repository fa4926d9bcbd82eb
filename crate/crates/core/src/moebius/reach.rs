//! Horizontal reachability: two configurations are joined by a horizontal
//! curve exactly when they lie in one `G(a, d)` orbit. The decision is made
//! class by class on complete Moebius invariants (plane and `S²`), and on
//! weak cross-ratios, which are only necessary, in dimension four and up.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::flow::vec_to_complex;
use super::group::{GroupElement, MoebiusElement};
use super::invariants::{class_invariants, coincidence_labels, representatives, ClassInvariants};
use super::su11::{moebius_through_triple, SU11Element};
use crate::arm::{ArmSpec, Configuration};
use crate::error::Result;

/// Tolerance on equality of invariants.
pub const INVARIANT_TOL: f64 = 1e-8;
/// Zero-length components must agree this closely.
pub const FIXED_COMPONENT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Yes,
    No,
    /// Every known necessary invariant agrees, but no complete criterion exists.
    NecessaryOnlyYes,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassVerdict {
    pub class: usize,
    pub length: f64,
    pub indices: Vec<usize>,
    pub representatives: Vec<usize>,
    pub verdict: Verdict,
    pub reason: String,
    pub start: Option<ClassInvariants>,
    pub end: Option<ClassInvariants>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReachReport {
    pub verdict: Verdict,
    pub fixed_components_agree: bool,
    pub classes: Vec<ClassVerdict>,
    /// A group element carrying the start to the end, planar arms only.
    #[serde(skip)]
    pub witness: Option<GroupElement>,
}

fn ccw_midpoint(from: Complex64, to: Complex64) -> Complex64 {
    let gap = (to / from).arg().rem_euclid(std::f64::consts::TAU);
    from * Complex64::from_polar(1.0, gap / 2.0)
}

/// Orientation-preserving circle map sending the distinct points `w` to `v`
/// (at most three points, or more when the cross-ratios already agree).
fn planar_witness(w: &[Complex64], v: &[Complex64]) -> Result<SU11Element> {
    match w.len() {
        0 => Ok(SU11Element::identity()),
        1 => Ok(SU11Element::rotation((v[0] / w[0]).arg())),
        2 => {
            let w3 = ccw_midpoint(w[1], w[0]);
            let v3 = ccw_midpoint(v[1], v[0]);
            moebius_through_triple([w[0], w[1], w3], [v[0], v[1], v3])
        }
        _ => moebius_through_triple([w[0], w[1], w[2]], [v[0], v[1], v[2]]),
    }
}

fn compare(start: &ClassInvariants, end: &ClassInvariants) -> Option<String> {
    if start.orientation != end.orientation {
        return Some(format!(
            "orientation {:?} vs {:?}",
            start.orientation.unwrap_or(0),
            end.orientation.unwrap_or(0)
        ));
    }
    for ((idx, a), (_, b)) in start.cross_ratios.iter().zip(&end.cross_ratios) {
        let scale = a.magnitude().max(b.magnitude()).max(1.0);
        if a.distance(b) > INVARIANT_TOL * scale {
            return Some(format!("cross-ratio at {idx:?} differs: {a:?} vs {b:?}"));
        }
    }
    None
}

pub fn reachable(spec: &ArmSpec, z0: &Configuration, z1: &Configuration) -> Result<ReachReport> {
    spec.check(z0)?;
    spec.check(z1)?;
    let dim = spec.dim();

    let fixed_components_agree = spec
        .zero_segments()
        .iter()
        .all(|&i| (z0.vector(i) - z1.vector(i)).norm() <= FIXED_COMPONENT_TOL);

    let mut classes = Vec::new();
    let mut factors = Vec::new();
    for (class, &length) in spec.class_values().iter().enumerate() {
        let indices = spec.class_members(class);
        let labels0 = coincidence_labels(z0, &indices);
        let labels1 = coincidence_labels(z1, &indices);
        let reps = representatives(&labels0);
        let mut cv = ClassVerdict {
            class,
            length,
            indices,
            representatives: reps.clone(),
            verdict: Verdict::Yes,
            reason: String::new(),
            start: None,
            end: None,
        };

        if labels0 != labels1 {
            cv.verdict = Verdict::No;
            cv.reason = "coincidence patterns differ".into();
            classes.push(cv);
            continue;
        }

        let start = class_invariants(z0, &reps)?;
        let end = class_invariants(z1, &reps)?;
        if let Some(reason) = compare(&start, &end) {
            cv.verdict = Verdict::No;
            cv.reason = reason;
        } else if dim >= 4 && reps.len() >= 4 {
            cv.verdict = Verdict::NecessaryOnlyYes;
            cv.reason = "weak cross-ratios agree; no complete criterion in this dimension".into();
        } else {
            cv.reason = format!("{} distinct points, invariants agree", reps.len());
            if dim == 2 {
                let w: Vec<_> = reps.iter().map(|&i| vec_to_complex(z0.vector(i))).collect();
                let v: Vec<_> = reps.iter().map(|&i| vec_to_complex(z1.vector(i))).collect();
                factors.push(MoebiusElement::Planar(planar_witness(&w, &v)?));
            }
        }
        cv.start = Some(start);
        cv.end = Some(end);
        classes.push(cv);
    }

    let verdict = if !fixed_components_agree || classes.iter().any(|c| c.verdict == Verdict::No) {
        Verdict::No
    } else if classes.iter().any(|c| c.verdict == Verdict::NecessaryOnlyYes) {
        Verdict::NecessaryOnlyYes
    } else {
        Verdict::Yes
    };
    let witness = (verdict == Verdict::Yes && dim == 2).then(|| GroupElement::new(factors));

    Ok(ReachReport {
        verdict,
        fixed_components_agree,
        classes,
        witness,
    })
}

/// Rank of the matrix whose columns are `A¹, …, A^♯` on the nonzero segments.
pub fn vandermonde_rank(spec: &ArmSpec) -> Result<usize> {
    spec.require_planar()?;
    let rows: Vec<f64> = spec.lengths().iter().copied().filter(|a| *a > 0.0).collect();
    let cols = spec.sharp();
    if rows.is_empty() || cols == 0 {
        return Ok(0);
    }
    let m = DMatrix::from_fn(rows.len(), cols, |r, c| rows[r].powi(c as i32 + 1));
    let sv = m.singular_values();
    let top = sv.max();
    Ok(sv.iter().filter(|s| **s > 1e-10 * top).count())
}
