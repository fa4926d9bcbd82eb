//! The arm map `f(z) = Σ a_j z_j`, its Gram matrix `P = Df Dfᵀ`, and the
//! critical-set geometry (aligned configurations, critical radii).
//!
//! A configuration is one unit vector per segment. Planar configurations
//! additionally carry a continuous angle lift `q` with `z_j = (cos q_j, sin q_j)`;
//! the angle lift is the primary state and the unit vectors are derived from it.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Structural invariants: unit norms, angle/vector agreement, class grouping.
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Closed-form identities (Gram determinant, two-link solutions).
pub const IDENTITY_TOL: f64 = 1e-10;

/// Segment lengths and ambient dimension.
///
/// Lengths that agree within [`STRUCTURAL_TOL`] (relative) are one *length
/// class*; zero lengths belong to no class. Classes are numbered by increasing
/// length value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ArmSpecJson", into = "ArmSpecJson")]
pub struct ArmSpec {
    lengths: Vec<f64>,
    dim: usize,
    class_values: Vec<f64>,
    class_of: Vec<Option<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ArmSpecJson {
    lengths: Vec<f64>,
    #[serde(default = "planar_dim")]
    dim: usize,
}

fn planar_dim() -> usize {
    2
}

impl TryFrom<ArmSpecJson> for ArmSpec {
    type Error = Error;

    fn try_from(raw: ArmSpecJson) -> Result<Self> {
        ArmSpec::new(raw.lengths, raw.dim)
    }
}

impl From<ArmSpec> for ArmSpecJson {
    fn from(spec: ArmSpec) -> Self {
        ArmSpecJson {
            lengths: spec.lengths,
            dim: spec.dim,
        }
    }
}

fn same_length(x: f64, y: f64) -> bool {
    (x - y).abs() <= STRUCTURAL_TOL * x.abs().max(y.abs()).max(1.0)
}

impl ArmSpec {
    pub fn new(lengths: Vec<f64>, dim: usize) -> Result<Self> {
        if lengths.is_empty() {
            return Err(Error::invalid("an arm needs at least one segment"));
        }
        if dim < 2 {
            return Err(Error::invalid(format!("ambient dimension must be >= 2, got {dim}")));
        }
        if let Some(bad) = lengths.iter().find(|a| !a.is_finite() || **a < 0.0) {
            return Err(Error::invalid(format!("segment lengths must be finite and >= 0, got {bad}")));
        }

        let mut values: Vec<f64> = lengths.iter().copied().filter(|a| *a > 0.0).collect();
        values.sort_by(f64::total_cmp);
        values.dedup_by(|x, y| same_length(*x, *y));

        let class_of = lengths
            .iter()
            .map(|&a| {
                if a > 0.0 {
                    values.iter().position(|&v| same_length(a, v))
                } else {
                    None
                }
            })
            .collect();

        Ok(ArmSpec {
            lengths,
            dim,
            class_values: values,
            class_of,
        })
    }

    pub fn planar(lengths: Vec<f64>) -> Result<Self> {
        Self::new(lengths, 2)
    }

    /// The arm `(1, …, 1)` with `m` segments in the plane.
    pub fn unit_planar(m: usize) -> Result<Self> {
        Self::new(vec![1.0; m], 2)
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn m(&self) -> usize {
        self.lengths.len()
    }

    /// Number of distinct nonzero length values.
    pub fn sharp(&self) -> usize {
        self.class_values.len()
    }

    pub fn class_values(&self) -> &[f64] {
        &self.class_values
    }

    /// Length class of segment `i`, `None` for zero-length segments.
    pub fn class_of(&self, i: usize) -> Option<usize> {
        self.class_of[i]
    }

    pub fn class_members(&self, class: usize) -> Vec<usize> {
        (0..self.m()).filter(|&i| self.class_of[i] == Some(class)).collect()
    }

    pub fn zero_segments(&self) -> Vec<usize> {
        (0..self.m()).filter(|&i| self.class_of[i].is_none()).collect()
    }

    pub fn total_length(&self) -> f64 {
        self.lengths.iter().sum()
    }

    pub fn sum_sq(&self) -> f64 {
        self.lengths.iter().map(|a| a * a).sum()
    }

    /// True for `a = (1, …, 1)`.
    pub fn is_unit(&self) -> bool {
        self.lengths.iter().all(|&a| a == 1.0)
    }

    pub(crate) fn check(&self, z: &Configuration) -> Result<()> {
        if z.m() != self.m() || z.dim() != self.dim {
            return Err(Error::dims(format!(
                "arm has m={}, d={} but configuration has m={}, d={}",
                self.m(),
                self.dim,
                z.m(),
                z.dim()
            )));
        }
        Ok(())
    }

    pub(crate) fn require_planar(&self) -> Result<()> {
        if self.dim != 2 {
            return Err(Error::dims(format!("planar operation on a d={} arm", self.dim)));
        }
        Ok(())
    }
}

/// One unit direction per segment.
///
/// JSON form: `{"angles": [...]}` for planar configurations, or
/// `{"vectors": [[...], ...]}` in any dimension.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigurationJson", into = "ConfigurationJson")]
pub struct Configuration {
    dim: usize,
    vectors: Vec<DVector<f64>>,
    angles: Option<Vec<f64>>,
}

fn unit(v: DVector<f64>) -> Result<DVector<f64>> {
    let n = v.norm();
    if !n.is_finite() || n < 1e-300 {
        return Err(Error::invalid("direction vector must be nonzero and finite"));
    }
    Ok(v / n)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum ConfigurationJson {
    Angles { angles: Vec<f64> },
    Vectors { vectors: Vec<Vec<f64>> },
}

impl TryFrom<ConfigurationJson> for Configuration {
    type Error = Error;

    fn try_from(raw: ConfigurationJson) -> Result<Self> {
        match raw {
            ConfigurationJson::Angles { angles } => {
                if angles.is_empty() || angles.iter().any(|q| !q.is_finite()) {
                    return Err(Error::invalid("angles must be a nonempty list of finite numbers"));
                }
                Ok(Configuration::from_angles(angles))
            }
            ConfigurationJson::Vectors { vectors } => {
                let dim = vectors.first().map_or(0, Vec::len);
                Configuration::from_rows(dim, &vectors)
            }
        }
    }
}

impl From<Configuration> for ConfigurationJson {
    fn from(z: Configuration) -> Self {
        match z.angles {
            Some(angles) => ConfigurationJson::Angles { angles },
            None => ConfigurationJson::Vectors { vectors: z.rows() },
        }
    }
}

impl Configuration {
    /// Planar configuration from its angle lift.
    pub fn from_angles(angles: Vec<f64>) -> Self {
        let vectors = angles
            .iter()
            .map(|q| DVector::from_vec(vec![q.cos(), q.sin()]))
            .collect();
        Configuration {
            dim: 2,
            vectors,
            angles: Some(angles),
        }
    }

    /// Configuration from arbitrary nonzero vectors, normalized on the way in.
    /// For `dim == 2` the angle lift is taken in `(-π, π]`.
    pub fn from_vectors(dim: usize, vectors: Vec<DVector<f64>>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::invalid("dimension must be >= 2"));
        }
        if vectors.is_empty() {
            return Err(Error::invalid("configuration needs at least one vector"));
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(Error::dims(format!("vector of length {} in dimension {dim}", v.len())));
        }
        let vectors = vectors.into_iter().map(unit).collect::<Result<Vec<_>>>()?;
        if dim == 2 {
            let angles = vectors.iter().map(|v| v[1].atan2(v[0])).collect();
            return Ok(Configuration::from_angles(angles));
        }
        Ok(Configuration {
            dim,
            vectors,
            angles: None,
        })
    }

    /// Components already known to be unit vectors, taken bit for bit.
    pub(crate) fn from_unit_vectors(dim: usize, vectors: Vec<DVector<f64>>) -> Self {
        debug_assert!(dim != 2);
        Configuration {
            dim,
            vectors,
            angles: None,
        }
    }

    pub fn from_rows(dim: usize, rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_vectors(dim, rows.iter().map(|r| DVector::from_column_slice(r)).collect())
    }

    pub fn m(&self) -> usize {
        self.vectors.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vectors(&self) -> &[DVector<f64>] {
        &self.vectors
    }

    pub fn vector(&self, i: usize) -> &DVector<f64> {
        &self.vectors[i]
    }

    /// Angle lift, present exactly when `dim == 2`.
    pub fn angles(&self) -> Option<&[f64]> {
        self.angles.as_deref()
    }

    pub(crate) fn planar_angles(&self) -> Result<&[f64]> {
        self.angles
            .as_deref()
            .ok_or_else(|| Error::dims(format!("planar operation on a d={} configuration", self.dim)))
    }

    /// Replace component `i`, renormalizing. In the plane the angle lift is
    /// moved by the smallest rotation so it stays continuous.
    pub fn set_vector(&mut self, i: usize, v: DVector<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::dims("replacement vector has the wrong dimension"));
        }
        let v = unit(v)?;
        if let Some(angles) = self.angles.as_mut() {
            let target = v[1].atan2(v[0]);
            angles[i] += wrap_angle(target - angles[i]);
            let q = angles[i];
            self.vectors[i] = DVector::from_vec(vec![q.cos(), q.sin()]);
        } else {
            self.vectors[i] = v;
        }
        Ok(())
    }

    /// Components as plain rows, for serialization and export.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.vectors.iter().map(|v| v.iter().copied().collect()).collect()
    }

    /// Max deviation of any component from unit norm.
    pub fn unit_defect(&self) -> f64 {
        self.vectors.iter().map(|v| (v.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Wrap an angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut y = x.rem_euclid(tau);
    if y > std::f64::consts::PI {
        y -= tau;
    }
    y
}

/// `Df Dfᵀ` together with its determinant.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub entries: DMatrix<f64>,
    pub det: f64,
}

impl GramMatrix {
    pub fn inverse(&self) -> Option<DMatrix<f64>> {
        self.entries.clone().try_inverse()
    }
}

pub fn eval_arm(spec: &ArmSpec, z: &Configuration) -> Result<DVector<f64>> {
    spec.check(z)?;
    let mut out = DVector::zeros(spec.dim());
    for (a, v) in spec.lengths().iter().zip(z.vectors()) {
        out.axpy(*a, v, 1.0);
    }
    Ok(out)
}

/// `P = Σ a_j² (I − z_j z_jᵀ)`.
pub fn gram(spec: &ArmSpec, z: &Configuration) -> Result<GramMatrix> {
    spec.check(z)?;
    let d = spec.dim();
    let mut p = DMatrix::<f64>::zeros(d, d);
    for (a, v) in spec.lengths().iter().zip(z.vectors()) {
        if *a == 0.0 {
            continue;
        }
        let a2 = a * a;
        for r in 0..d {
            p[(r, r)] += a2;
            for c in 0..d {
                p[(r, c)] -= a2 * v[r] * v[c];
            }
        }
    }
    let det = p.determinant().max(0.0);
    Ok(GramMatrix { entries: p, det })
}

/// `Σ_{i<j} a_i² a_j² sin²(q_i − q_j)`, planar only.
pub fn det_gram_closed_form(spec: &ArmSpec, z: &Configuration) -> Result<f64> {
    spec.require_planar()?;
    spec.check(z)?;
    let q = z.planar_angles()?;
    let a = spec.lengths();
    let mut sum = 0.0;
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            let s = (q[i] - q[j]).sin();
            sum += a[i] * a[i] * a[j] * a[j] * s * s;
        }
    }
    Ok(sum)
}

/// Planar Jacobian of `q ↦ f(q)`: column `j` is `a_j (−sin q_j, cos q_j)`.
pub fn angle_jacobian(lengths: &[f64], q: &[f64]) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2, q.len());
    for (k, (a, qk)) in lengths.iter().zip(q).enumerate() {
        j[(0, k)] = -a * qk.sin();
        j[(1, k)] = a * qk.cos();
    }
    j
}

/// All pairs satisfy `z_i = ±z_j` within `tol`.
pub fn is_aligned(z: &Configuration, tol: f64) -> bool {
    let v = z.vectors();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let minus = (&v[i] - &v[j]).norm();
            let plus = (&v[i] + &v[j]).norm();
            if minus.min(plus) > tol {
                return false;
            }
        }
    }
    true
}

/// Norms of the images of aligned configurations, `{ |Σ ε_i a_i| }`, sorted.
pub fn critical_radii(spec: &ArmSpec) -> Vec<f64> {
    // Signed partial sums, deduplicated as we go so the set stays small.
    let mut sums = vec![0.0_f64];
    for &a in spec.lengths() {
        if a == 0.0 {
            continue;
        }
        let mut next: Vec<f64> = sums.iter().flat_map(|s| [s + a, s - a]).collect();
        next.sort_by(f64::total_cmp);
        next.dedup_by(|x, y| (*x - *y).abs() <= STRUCTURAL_TOL);
        sums = next;
    }
    let mut radii: Vec<f64> = sums.into_iter().map(f64::abs).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup_by(|x, y| (*x - *y).abs() <= STRUCTURAL_TOL);
    radii
}

/// Distance from `‖b‖` to the nearest critical radius.
pub fn distance_to_critical(spec: &ArmSpec, b: &DVector<f64>) -> f64 {
    let r = b.norm();
    critical_radii(spec)
        .into_iter()
        .map(|c| (r - c).abs())
        .fold(f64::INFINITY, f64::min)
}

pub fn is_regular_value(spec: &ArmSpec, b: &DVector<f64>, margin: f64) -> bool {
    distance_to_critical(spec, b) > margin
}

/// Every planar two-link configuration reaching `b`, by the law of cosines.
/// The elbow-left solution comes first. At the workspace boundary the two
/// solutions merge into one.
pub fn two_link_solutions(a1: f64, a2: f64, b: [f64; 2]) -> Result<Vec<Configuration>> {
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(Error::invalid("two-link lengths must be positive"));
    }
    let r = b[0].hypot(b[1]);
    let (lo, hi) = ((a1 - a2).abs(), a1 + a2);
    let slack = IDENTITY_TOL * hi;
    if r > hi + slack || r < lo - slack {
        return Ok(Vec::new());
    }
    if r <= slack {
        return Err(Error::invalid("b = 0 with equal lengths has a circle of solutions"));
    }
    let phi = b[1].atan2(b[0]);
    let cos_alpha = ((a1 * a1 + r * r - a2 * a2) / (2.0 * a1 * r)).clamp(-1.0, 1.0);
    let alpha = cos_alpha.acos();

    let solve = |q1: f64| {
        let x = b[0] - a1 * q1.cos();
        let y = b[1] - a1 * q1.sin();
        Configuration::from_angles(vec![q1, y.atan2(x)])
    };

    if alpha <= 1e-8 || (std::f64::consts::PI - alpha) <= 1e-8 {
        return Ok(vec![solve(phi + alpha)]);
    }
    Ok(vec![solve(phi + alpha), solve(phi - alpha)])
}
