//! Moebius invariants of points on spheres: orientation of triples, the real
//! cross-ratio on `S¹`, the complex cross-ratio on `S²`, and the weak
//! (absolute) cross-ratio in any dimension.
//!
//! Orientation convention: `O(z1, z2, z3)` is the sign of
//! `Im(z̄1 z2 + z̄2 z3 + z̄3 z1)`, twice the signed area of the triangle. For
//! points on the circle it is `+1` exactly when `z1 → z2 → z3` runs
//! counterclockwise.
//!
//! The weak cross-ratio uses chordal distances,
//! `‖z_i − z_k‖ ‖z_j − z_l‖ / (‖z_i − z_l‖ ‖z_j − z_k‖)`. A literal reading as a
//! ratio of differences of norms would vanish identically on the unit sphere,
//! so the chordal reading is the only meaningful one.

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::flow::vec_to_complex;
use crate::arm::{ArmSpec, Configuration};
use crate::error::{Error, Result};

/// Points closer than this (chordal) are treated as coincident.
pub const COINCIDENCE_TOL: f64 = 1e-9;
/// A point this close to the projection pole triggers the pole fallback.
pub const POLE_CLEARANCE: f64 = 1e-6;

pub(crate) fn check_distinct(points: &[Complex64]) -> Result<()> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = (points[i] - points[j]).norm();
            if d <= COINCIDENCE_TOL {
                return Err(Error::CoincidentPoints(d));
            }
        }
    }
    Ok(())
}

fn check_distinct_vec(points: &[&DVector<f64>]) -> Result<()> {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i].len() != points[j].len() {
                return Err(Error::dims("points live in different dimensions"));
            }
            let d = (points[i] - points[j]).norm();
            if d <= COINCIDENCE_TOL {
                return Err(Error::CoincidentPoints(d));
            }
        }
    }
    Ok(())
}

pub fn orientation(z1: Complex64, z2: Complex64, z3: Complex64) -> Result<i8> {
    check_distinct(&[z1, z2, z3])?;
    let area = (z1.conj() * z2 + z2.conj() * z3 + z3.conj() * z1).im;
    Ok(if area > 0.0 { 1 } else { -1 })
}

/// `(z_i − z_k)/(z_i − z_l) · (z_j − z_l)/(z_j − z_k)` for any four complex numbers.
pub fn cross_ratio_of(zi: Complex64, zj: Complex64, zk: Complex64, zl: Complex64) -> Complex64 {
    (zi - zk) / (zi - zl) * (zj - zl) / (zj - zk)
}

/// Real cross-ratio of four distinct points of the unit circle.
pub fn cross_ratio(zi: Complex64, zj: Complex64, zk: Complex64, zl: Complex64) -> Result<f64> {
    check_distinct(&[zi, zj, zk, zl])?;
    Ok(cross_ratio_of(zi, zj, zk, zl).re)
}

/// Orientation-preserving stereographic chart from the north pole.
fn stereographic(x: &Vector3<f64>) -> Complex64 {
    Complex64::new(x[0], -x[1]) / (1.0 - x[2])
}

/// A rotation taking `pole` to the north pole `(0, 0, 1)`.
fn rotation_to_north(pole: &Vector3<f64>) -> nalgebra::Matrix3<f64> {
    let north = Vector3::z();
    let p = pole.normalize();
    let axis = p.cross(&north);
    let s = axis.norm();
    let c = p.dot(&north);
    if s < 1e-15 {
        if c > 0.0 {
            return nalgebra::Matrix3::identity();
        }
        return nalgebra::Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0);
    }
    let k = axis / s;
    let kx = nalgebra::Matrix3::new(0.0, -k[2], k[1], k[2], 0.0, -k[0], -k[1], k[0], 0.0);
    nalgebra::Matrix3::identity() + kx * s + kx * kx * (1.0 - c)
}

fn to_vec3(x: &DVector<f64>) -> Result<Vector3<f64>> {
    if x.len() != 3 {
        return Err(Error::dims("complex cross-ratio needs points of S²"));
    }
    Ok(Vector3::new(x[0], x[1], x[2]).normalize())
}

/// Complex cross-ratio on `S²`, charted through a chosen projection pole.
pub fn cross_ratio_complex_with_pole(points: [&DVector<f64>; 4], pole: &DVector<f64>) -> Result<Complex64> {
    check_distinct_vec(&points)?;
    let pole = to_vec3(pole)?;
    let r = rotation_to_north(&pole);
    let mut w = [Complex64::new(0.0, 0.0); 4];
    for (slot, x) in w.iter_mut().zip(points) {
        let y = r * to_vec3(x)?;
        if (y - Vector3::z()).norm() <= POLE_CLEARANCE {
            return Err(Error::invalid("point at the projection pole"));
        }
        *slot = stereographic(&y);
    }
    Ok(cross_ratio_of(w[0], w[1], w[2], w[3]))
}

/// Complex cross-ratio on `S²`: north pole by default, otherwise the candidate
/// pole farthest from all four points.
pub fn cross_ratio_complex(
    zi: &DVector<f64>,
    zj: &DVector<f64>,
    zk: &DVector<f64>,
    zl: &DVector<f64>,
) -> Result<Complex64> {
    let points = [zi, zj, zk, zl];
    let pts = points.iter().map(|x| to_vec3(x)).collect::<Result<Vec<_>>>()?;
    let clearance = |p: &Vector3<f64>| pts.iter().map(|x| (x - p).norm()).fold(f64::INFINITY, f64::min);
    let north = Vector3::z();
    let pole = if clearance(&north) > POLE_CLEARANCE {
        north
    } else {
        let candidates = [-Vector3::z(), Vector3::x(), -Vector3::x(), Vector3::y(), -Vector3::y()];
        candidates
            .into_iter()
            .max_by(|a, b| clearance(a).total_cmp(&clearance(b)))
            .unwrap_or(north)
    };
    cross_ratio_complex_with_pole(points, &DVector::from_column_slice(pole.as_slice()))
}

/// Weak (absolute) cross-ratio from chordal distances, any dimension.
pub fn cross_ratio_weak(
    zi: &DVector<f64>,
    zj: &DVector<f64>,
    zk: &DVector<f64>,
    zl: &DVector<f64>,
) -> Result<f64> {
    check_distinct_vec(&[zi, zj, zk, zl])?;
    let d = |x: &DVector<f64>, y: &DVector<f64>| (x - y).norm();
    Ok(d(zi, zk) / d(zi, zl) * (d(zj, zl) / d(zj, zk)))
}

/// A scalar invariant value, real or complex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InvariantValue {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl InvariantValue {
    pub fn distance(&self, other: &InvariantValue) -> f64 {
        match (self, other) {
            (InvariantValue::Real(a), InvariantValue::Real(b)) => (a - b).abs(),
            (InvariantValue::Complex { re: a, im: b }, InvariantValue::Complex { re: c, im: d }) => {
                (a - c).hypot(b - d)
            }
            _ => f64::INFINITY,
        }
    }

    pub fn magnitude(&self) -> f64 {
        match self {
            InvariantValue::Real(a) => a.abs(),
            InvariantValue::Complex { re, im } => re.hypot(*im),
        }
    }
}

impl From<Complex64> for InvariantValue {
    fn from(z: Complex64) -> Self {
        InvariantValue::Complex { re: z.re, im: z.im }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossRatioKind {
    Real,
    Complex,
    Weak,
}

/// Labels grouping `indices` by coincidence of `z`: each entry is the index
/// of the first coincident component.
pub fn coincidence_labels(z: &Configuration, indices: &[usize]) -> Vec<usize> {
    let mut labels: Vec<usize> = Vec::with_capacity(indices.len());
    for (pos, &i) in indices.iter().enumerate() {
        let rep = indices[..pos]
            .iter()
            .zip(&labels)
            .find(|(&j, _)| (z.vector(i) - z.vector(j)).norm() <= COINCIDENCE_TOL)
            .map(|(_, &label)| label);
        labels.push(rep.unwrap_or(i));
    }
    labels
}

/// Distinct representatives, in index order.
pub fn representatives(labels: &[usize]) -> Vec<usize> {
    let mut reps: Vec<usize> = labels.to_vec();
    reps.sort_unstable();
    reps.dedup();
    reps
}

/// Invariants of one length class evaluated on a fixed list of distinct
/// representatives: the orientation of the first triple (plane) and the
/// cross-ratios anchored on the first three representatives, or all weak
/// cross-ratios in dimension four and up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassInvariants {
    pub orientation: Option<i8>,
    pub kind: CrossRatioKind,
    pub cross_ratios: Vec<([usize; 4], InvariantValue)>,
}

pub fn class_invariants(z: &Configuration, reps: &[usize]) -> Result<ClassInvariants> {
    let dim = z.dim();
    let v = |i: usize| z.vector(i);
    let mut out = ClassInvariants {
        orientation: None,
        kind: match dim {
            2 => CrossRatioKind::Real,
            3 => CrossRatioKind::Complex,
            _ => CrossRatioKind::Weak,
        },
        cross_ratios: Vec::new(),
    };
    if dim == 2 && reps.len() >= 3 {
        let c = |i: usize| vec_to_complex(v(i));
        out.orientation = Some(orientation(c(reps[0]), c(reps[1]), c(reps[2]))?);
        for &k in &reps[3..] {
            let value = cross_ratio(c(reps[0]), c(reps[1]), c(reps[2]), c(k))?;
            out.cross_ratios.push(([reps[0], reps[1], reps[2], k], InvariantValue::Real(value)));
        }
    } else if dim == 3 && reps.len() >= 4 {
        for &k in &reps[3..] {
            let value = cross_ratio_complex(v(reps[0]), v(reps[1]), v(reps[2]), v(k))?;
            out.cross_ratios.push(([reps[0], reps[1], reps[2], k], value.into()));
        }
    } else if dim >= 4 && reps.len() >= 4 {
        let n = reps.len();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    for d in c + 1..n {
                        let (i, j, k, l) = (reps[a], reps[b], reps[c], reps[d]);
                        for idx in [[i, j, k, l], [i, k, j, l]] {
                            let value = cross_ratio_weak(v(idx[0]), v(idx[1]), v(idx[2]), v(idx[3]))?;
                            out.cross_ratios.push((idx, InvariantValue::Real(value)));
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientationEntry {
    pub class: usize,
    pub indices: [usize; 3],
    pub value: i8,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossRatioEntry {
    pub class: usize,
    pub kind: CrossRatioKind,
    pub indices: [usize; 4],
    pub value: InvariantValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class: usize,
    pub length: f64,
    pub indices: Vec<usize>,
    /// Groups of coincident components within the class.
    pub coincident: Vec<Vec<usize>>,
}

/// Every Moebius invariant of a configuration, class by class.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub orientation: Vec<OrientationEntry>,
    pub cross_ratios: Vec<CrossRatioEntry>,
    pub classes: Vec<ClassSummary>,
}

pub fn invariant_report(spec: &ArmSpec, z: &Configuration) -> Result<InvariantReport> {
    spec.check(z)?;
    let mut report = InvariantReport {
        orientation: Vec::new(),
        cross_ratios: Vec::new(),
        classes: Vec::new(),
    };
    for (class, &length) in spec.class_values().iter().enumerate() {
        let indices = spec.class_members(class);
        let labels = coincidence_labels(z, &indices);
        let reps = representatives(&labels);
        let coincident = reps
            .iter()
            .map(|r| {
                indices
                    .iter()
                    .zip(&labels)
                    .filter(|(_, l)| *l == r)
                    .map(|(i, _)| *i)
                    .collect::<Vec<_>>()
            })
            .filter(|g| g.len() > 1)
            .collect();
        let inv = class_invariants(z, &reps)?;
        if let Some(value) = inv.orientation {
            report.orientation.push(OrientationEntry {
                class,
                indices: [reps[0], reps[1], reps[2]],
                value,
            });
        }
        for (indices, value) in inv.cross_ratios {
            report.cross_ratios.push(CrossRatioEntry {
                class,
                kind: inv.kind,
                indices,
                value,
            });
        }
        report.classes.push(ClassSummary {
            class,
            length,
            indices,
            coincident,
        });
    }
    Ok(report)
}

/// Gram-Schmidt completion of a unit vector to an orthonormal frame whose
/// first column is `v`. Used to build random rotations in tests and examples.
pub fn frame_from(v: &DVector<f64>) -> DMatrix<f64> {
    let d = v.len();
    let mut cols: Vec<DVector<f64>> = vec![v.normalize()];
    for k in 0..d {
        if cols.len() == d {
            break;
        }
        let mut e = DVector::zeros(d);
        e[k] = 1.0;
        for c in &cols {
            e -= c * c.dot(&e);
        }
        if e.norm() > 1e-8 {
            cols.push(e.normalize());
        }
    }
    DMatrix::from_columns(&cols)
}
