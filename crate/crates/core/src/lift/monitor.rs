//! Drift of the conserved quantities along a lifted trajectory: coincidences
//! of equal-length components, cross-ratios of equal-length quadruples, and
//! orientations of equal-length triples.

use serde::{Deserialize, Serialize};

use super::integrate::LiftTrajectory;
use crate::arm::{ArmSpec, Configuration};
use crate::moebius::flow::vec_to_complex;
use crate::moebius::invariants::{
    cross_ratio, cross_ratio_complex, cross_ratio_weak, orientation, CrossRatioKind, COINCIDENCE_TOL,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceDrift {
    pub pair: [usize; 2],
    pub max_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossRatioDrift {
    pub indices: [usize; 4],
    pub kind: CrossRatioKind,
    pub initial: f64,
    pub max_drift: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientationCheck {
    pub triple: [usize; 3],
    pub initial: i8,
    pub constant: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub coincidences: Vec<CoincidenceDrift>,
    pub cross_ratios: Vec<CrossRatioDrift>,
    pub orientations: Vec<OrientationCheck>,
}

impl DriftReport {
    pub fn is_empty(&self) -> bool {
        self.coincidences.is_empty() && self.cross_ratios.is_empty() && self.orientations.is_empty()
    }

    pub fn max_coincidence_drift(&self) -> f64 {
        self.coincidences.iter().map(|c| c.max_distance).fold(0.0, f64::max)
    }

    pub fn max_cross_ratio_drift(&self, kind: CrossRatioKind) -> f64 {
        self.cross_ratios
            .iter()
            .filter(|c| c.kind == kind)
            .map(|c| c.max_drift)
            .fold(0.0, f64::max)
    }

    pub fn orientations_constant(&self) -> bool {
        self.orientations.iter().all(|o| o.constant)
    }
}

fn chordal(z: &Configuration, i: usize, j: usize) -> f64 {
    (z.vector(i) - z.vector(j)).norm()
}

fn subsets<const K: usize>(items: &[usize]) -> Vec<[usize; K]> {
    fn rec<const K: usize>(items: &[usize], start: usize, cur: &mut Vec<usize>, out: &mut Vec<[usize; K]>) {
        if cur.len() == K {
            out.push(cur.as_slice().try_into().expect("length K"));
            return;
        }
        for k in start..items.len() {
            cur.push(items[k]);
            rec(items, k + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(items, 0, &mut Vec::with_capacity(K), &mut out);
    out
}

/// Evaluate one cross-ratio; `None` when the points have come together.
fn evaluate(kind: CrossRatioKind, z: &Configuration, idx: [usize; 4]) -> Option<(f64, f64)> {
    let v = |k: usize| z.vector(idx[k]);
    match kind {
        CrossRatioKind::Real => {
            let c = |k: usize| vec_to_complex(v(k));
            cross_ratio(c(0), c(1), c(2), c(3)).ok().map(|x| (x, 0.0))
        }
        CrossRatioKind::Complex => cross_ratio_complex(v(0), v(1), v(2), v(3)).ok().map(|w| (w.re, w.im)),
        CrossRatioKind::Weak => cross_ratio_weak(v(0), v(1), v(2), v(3)).ok().map(|x| (x, 0.0)),
    }
}

pub fn monitor_invariants(spec: &ArmSpec, traj: &LiftTrajectory) -> DriftReport {
    let mut report = DriftReport::default();
    let Some(z0) = traj.configs.first() else {
        return report;
    };
    let dim = spec.dim();

    for class in 0..spec.sharp() {
        let members = spec.class_members(class);

        for [i, j] in subsets::<2>(&members) {
            if chordal(z0, i, j) <= COINCIDENCE_TOL {
                let max_distance = traj.configs.iter().map(|z| chordal(z, i, j)).fold(0.0, f64::max);
                report.coincidences.push(CoincidenceDrift {
                    pair: [i, j],
                    max_distance,
                });
            }
        }

        let distinct = |idx: &[usize]| {
            idx.iter()
                .enumerate()
                .all(|(p, &i)| idx[p + 1..].iter().all(|&j| chordal(z0, i, j) > COINCIDENCE_TOL))
        };

        if dim == 2 {
            for t in subsets::<3>(&members) {
                if !distinct(&t) {
                    continue;
                }
                let o = |z: &Configuration| {
                    let c = |k: usize| vec_to_complex(z.vector(t[k]));
                    orientation(c(0), c(1), c(2)).ok()
                };
                let initial = o(z0).unwrap_or(0);
                let constant = traj.configs.iter().all(|z| o(z) == Some(initial));
                report.orientations.push(OrientationCheck {
                    triple: t,
                    initial,
                    constant,
                });
            }
        }

        let mut kinds = vec![CrossRatioKind::Weak];
        match dim {
            2 => kinds.insert(0, CrossRatioKind::Real),
            3 => kinds.insert(0, CrossRatioKind::Complex),
            _ => {}
        }
        for quad in subsets::<4>(&members) {
            if !distinct(&quad) {
                continue;
            }
            let [i, j, k, l] = quad;
            for kind in &kinds {
                let orders: &[[usize; 4]] = if *kind == CrossRatioKind::Weak {
                    &[[i, j, k, l], [i, k, j, l]]
                } else {
                    &[[i, j, k, l]]
                };
                for &idx in orders {
                    let Some(first) = evaluate(*kind, z0, idx) else { continue };
                    let max_drift = traj
                        .configs
                        .iter()
                        .map(|z| {
                            evaluate(*kind, z, idx)
                                .map_or(f64::INFINITY, |v| (v.0 - first.0).hypot(v.1 - first.1))
                        })
                        .fold(0.0, f64::max);
                    report.cross_ratios.push(CrossRatioDrift {
                        indices: idx,
                        kind: *kind,
                        initial: first.0.hypot(first.1),
                        max_drift,
                    });
                }
            }
        }
    }
    report
}
