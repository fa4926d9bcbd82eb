//! Horizontal (minimal-norm) velocities and the fixed-step RK4 lift.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::curve::{CurveSpec, Piece};
use crate::arm::{critical_radii, distance_to_critical, eval_arm, gram, ArmSpec, Configuration};
use crate::error::{Error, Result};
use crate::moebius::invariants::{invariant_report, InvariantReport};

/// Relative singular threshold: `det P < SINGULAR_REL · (Σ a_j²)^d` is singular.
pub const SINGULAR_REL: f64 = 1e-10;

pub fn singular_threshold(spec: &ArmSpec) -> f64 {
    SINGULAR_REL * spec.sum_sq().powi(spec.dim() as i32)
}

/// With at most one nonzero segment every value in the image is critical
/// and `P` is singular everywhere. Such arms are lifted along curves that stay
/// on their image sphere using the pseudo-inverse of `P`.
fn structurally_deficient(spec: &ArmSpec) -> bool {
    spec.lengths().iter().filter(|a| **a > 0.0).count() <= 1
}

/// Solve `P x = v`, or the least-squares problem for structurally deficient arms.
fn gram_solve(spec: &ArmSpec, z: &Configuration, v: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let p = gram(spec, z)?;
    if structurally_deficient(spec) {
        let eig = p.entries.symmetric_eigen();
        let cut = 1e-12 * spec.sum_sq().max(f64::MIN_POSITIVE);
        let mut x = DVector::zeros(v.len());
        for (k, lambda) in eig.eigenvalues.iter().enumerate() {
            if *lambda > cut {
                let u = eig.eigenvectors.column(k);
                x += u * (u.dot(v) / lambda);
            }
        }
        return Ok((x, p.det));
    }
    if p.det < singular_threshold(spec) {
        let b = eval_arm(spec, z)?;
        return Err(Error::NearCritical {
            det: p.det,
            distance: distance_to_critical(spec, &b),
            partial: None,
        });
    }
    let x = p
        .entries
        .lu()
        .solve(v)
        .ok_or(Error::NearCritical {
            det: p.det,
            distance: f64::NAN,
            partial: None,
        })?;
    Ok((x, p.det))
}

/// The unique `w` with `Df(w) = v` orthogonal to `ker Df`:
/// `w_j = a_j (I − z_j z_jᵀ) P⁻¹ v`.
pub fn horizontal_vector(spec: &ArmSpec, z: &Configuration, v: &DVector<f64>) -> Result<Vec<DVector<f64>>> {
    spec.check(z)?;
    if v.len() != spec.dim() {
        return Err(Error::dims(format!("velocity has {} components, arm lives in d={}", v.len(), spec.dim())));
    }
    let (x, _) = gram_solve(spec, z, v)?;
    Ok(spec
        .lengths()
        .iter()
        .zip(z.vectors())
        .map(|(a, zj)| (&x - zj * zj.dot(&x)) * *a)
        .collect())
}

/// Planar form `q̇ = Dfᵀ P⁻¹ v`.
pub fn horizontal_angle_rates(spec: &ArmSpec, z: &Configuration, v: &DVector<f64>) -> Result<DVector<f64>> {
    spec.require_planar()?;
    let q = z.planar_angles()?.to_vec();
    spec.check(z)?;
    if v.len() != 2 {
        return Err(Error::dims("planar velocity must have two components"));
    }
    let (x, _) = gram_solve(spec, z, v)?;
    Ok(angle_rates(spec.lengths(), &q, &x))
}

fn angle_rates(a: &[f64], q: &[f64], x: &DVector<f64>) -> DVector<f64> {
    DVector::from_fn(q.len(), |j, _| a[j] * (-q[j].sin() * x[0] + q[j].cos() * x[1]))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Classical fourth-order Runge-Kutta, fixed step.
    Rk4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LiftOptions {
    /// Upper bound on the step; each smooth piece is cut into equal steps.
    pub h: f64,
    pub method: Method,
    /// Every sampled tracking error is expected below this.
    pub tolerance: f64,
    /// Abort with `TrackingDiverged` above this.
    pub divergence: f64,
    /// Required distance of the curve from every critical radius, relative to `Σ a_j`.
    pub critical_margin: f64,
    /// Allowed mismatch between `f(q0)` and the start of the curve.
    pub start_tolerance: f64,
    /// Record an invariant snapshot every this many steps; 0 disables them.
    pub snapshot_every: usize,
}

impl Default for LiftOptions {
    fn default() -> Self {
        LiftOptions {
            h: 1e-3,
            method: Method::Rk4,
            tolerance: 1e-6,
            divergence: 1e-3,
            critical_margin: 1e-6,
            start_tolerance: 1e-8,
            snapshot_every: 1,
        }
    }
}

impl LiftOptions {
    pub fn with_step(h: f64) -> Self {
        LiftOptions {
            h,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantSnapshot {
    /// `Σ q_j`, the angle lift of `ρ = z_1⋯z_m`, for planar arms.
    pub rho_lift: Option<f64>,
    pub invariants: InvariantReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub tracking_error: f64,
    pub det_gram: f64,
    pub snapshot: Option<InvariantSnapshot>,
}

/// Sampled horizontal lift. Index 0 is the initial configuration.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftTrajectory {
    pub times: Vec<f64>,
    pub configs: Vec<Configuration>,
    pub diagnostics: Vec<StepDiagnostics>,
    pub tolerance: f64,
}

impl std::fmt::Debug for LiftTrajectory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LiftTrajectory")
            .field("samples", &self.len())
            .field("final_time", &self.times.last())
            .field("max_tracking_error", &self.diagnostics.iter().map(|d| d.tracking_error).fold(0.0, f64::max))
            .finish_non_exhaustive()
    }
}

impl LiftTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_config(&self) -> &Configuration {
        self.configs.last().expect("trajectory holds the initial configuration")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial time")
    }

    pub fn final_tracking_error(&self) -> f64 {
        self.diagnostics.last().map_or(0.0, |d| d.tracking_error)
    }

    pub fn max_tracking_error(&self) -> f64 {
        self.diagnostics.iter().map(|d| d.tracking_error).fold(0.0, f64::max)
    }

    /// Some sampled tracking error exceeded the requested tolerance.
    pub fn degraded(&self) -> bool {
        self.max_tracking_error() > self.tolerance
    }
}

/// Integration state: the angle lift in the plane, unit vectors otherwise.
#[derive(Clone)]
enum State {
    Angles(DVector<f64>),
    Vectors(Vec<DVector<f64>>),
}

enum Delta {
    Angles(DVector<f64>),
    Vectors(Vec<DVector<f64>>),
}

impl State {
    fn from_config(z: &Configuration) -> Self {
        match z.angles() {
            Some(q) => State::Angles(DVector::from_column_slice(q)),
            None => State::Vectors(z.vectors().to_vec()),
        }
    }

    fn config(&self) -> Configuration {
        match self {
            State::Angles(q) => Configuration::from_angles(q.iter().copied().collect()),
            State::Vectors(v) => Configuration::from_unit_vectors(v[0].len(), v.clone()),
        }
    }

    /// `self + h·delta`, renormalized; zero-length components stay put exactly.
    fn advance(&self, a: &[f64], deltas: &[(&Delta, f64)]) -> State {
        match self {
            State::Angles(q) => {
                let mut out = q.clone();
                for (d, h) in deltas {
                    if let Delta::Angles(r) = d {
                        out.axpy(*h, r, 1.0);
                    }
                }
                for (j, aj) in a.iter().enumerate() {
                    if *aj == 0.0 {
                        out[j] = q[j];
                    }
                }
                State::Angles(out)
            }
            State::Vectors(vs) => State::Vectors(
                vs.iter()
                    .enumerate()
                    .map(|(j, z)| {
                        if a[j] == 0.0 {
                            return z.clone();
                        }
                        let mut y = z.clone();
                        for (d, h) in deltas {
                            if let Delta::Vectors(w) = d {
                                y.axpy(*h, &w[j], 1.0);
                            }
                        }
                        let n = y.norm();
                        y / n
                    })
                    .collect(),
            ),
        }
    }
}

fn field(spec: &ArmSpec, state: &State, v: &DVector<f64>) -> Result<Delta> {
    let z = state.config();
    let (x, _) = gram_solve(spec, &z, v)?;
    Ok(match state {
        State::Angles(q) => Delta::Angles(angle_rates(spec.lengths(), q.as_slice(), &x)),
        State::Vectors(vs) => Delta::Vectors(
            spec.lengths()
                .iter()
                .zip(vs)
                .map(|(a, zj)| (&x - zj * zj.dot(&x)) * *a)
                .collect(),
        ),
    })
}

fn rk4_step(spec: &ArmSpec, state: &State, piece: &Piece, t: f64, dt: f64) -> Result<State> {
    let a = spec.lengths();
    let k1 = field(spec, state, &piece.velocity(t))?;
    let s2 = state.advance(a, &[(&k1, dt / 2.0)]);
    let k2 = field(spec, &s2, &piece.velocity(t + dt / 2.0))?;
    let s3 = state.advance(a, &[(&k2, dt / 2.0)]);
    let k3 = field(spec, &s3, &piece.velocity(t + dt / 2.0))?;
    let s4 = state.advance(a, &[(&k3, dt)]);
    let k4 = field(spec, &s4, &piece.velocity(t + dt))?;
    let w = dt / 6.0;
    Ok(state.advance(a, &[(&k1, w), (&k2, 2.0 * w), (&k3, 2.0 * w), (&k4, w)]))
}

/// Step grid of one piece: equal steps no longer than `h`.
fn piece_grid(piece: &Piece, h: f64) -> Vec<f64> {
    let (t0, t1) = piece.span();
    let n = ((t1 - t0) / h - 1e-9).ceil().max(1.0) as usize;
    (0..=n).map(|k| if k == n { t1 } else { t0 + (t1 - t0) * k as f64 / n as f64 }).collect()
}

/// Subsamples per step used to scan the curve for critical radii.
const SCAN_SUBSAMPLES: usize = 4;

/// Range of `‖c‖` over `[t, u]` within one piece: exact on straight legs,
/// from the endpoints on arcs (which are subsampled finely).
fn norm_range(piece: &Piece, t: f64, u: f64) -> (f64, f64) {
    let (p, q) = (piece.position(t), piece.position(u));
    let hi = p.norm().max(q.norm());
    let lo = match piece {
        Piece::Linear { .. } => {
            let d = &q - &p;
            let dd = d.norm_squared();
            let s = if dd > 0.0 { (-p.dot(&d) / dd).clamp(0.0, 1.0) } else { 0.0 };
            (&p + d * s).norm()
        }
        Piece::Arc { .. } => p.norm().min(q.norm()),
    };
    (lo, hi)
}

/// First grid time from which the curve comes within `margin` of a critical
/// radius, together with that distance.
fn first_critical_crossing(spec: &ArmSpec, curve: &CurveSpec, h: f64, margin: f64) -> Option<(f64, f64)> {
    let radii = critical_radii(spec);
    for piece in curve.pieces() {
        let grid = piece_grid(piece, h);
        for w in grid.windows(2) {
            for k in 0..SCAN_SUBSAMPLES {
                let t = w[0] + (w[1] - w[0]) * k as f64 / SCAN_SUBSAMPLES as f64;
                let u = w[0] + (w[1] - w[0]) * (k + 1) as f64 / SCAN_SUBSAMPLES as f64;
                let (lo, hi) = norm_range(piece, t, u);
                for &r in &radii {
                    let d = if r < lo { lo - r } else if r > hi { r - hi } else { 0.0 };
                    if d <= margin {
                        return Some((w[0], d));
                    }
                }
            }
        }
    }
    None
}

fn check_on_image_sphere(spec: &ArmSpec, curve: &CurveSpec, h: f64) -> Result<()> {
    let radius = spec.total_length();
    for piece in curve.pieces() {
        for t in piece_grid(piece, h) {
            let off = (piece.position(t).norm() - radius).abs();
            if off > 1e-8 * radius.max(1.0) {
                return Err(Error::invalid(format!(
                    "curve leaves the image sphere of radius {radius} at t = {t} (off by {off:.3e})"
                )));
            }
        }
    }
    Ok(())
}

fn diagnostics(
    spec: &ArmSpec,
    z: &Configuration,
    target: &DVector<f64>,
    with_snapshot: bool,
) -> Result<StepDiagnostics> {
    let tracking_error = (eval_arm(spec, z)? - target).norm();
    let det_gram = gram(spec, z)?.det;
    let snapshot = if with_snapshot {
        invariant_report(spec, z).ok().map(|invariants| InvariantSnapshot {
            rho_lift: z.angles().map(|q| q.iter().sum()),
            invariants,
        })
    } else {
        None
    };
    Ok(StepDiagnostics {
        tracking_error,
        det_gram,
        snapshot,
    })
}

/// Lift `curve` horizontally from `q0` by fixed-step RK4.
///
/// Piece boundaries (polyline vertices, square corners) are always step
/// boundaries. Before integrating, the curve is scanned against the critical
/// radii; if it comes within the margin the lift stops there and returns
/// `NearCritical` carrying the partial trajectory.
pub fn lift_path(spec: &ArmSpec, q0: &Configuration, curve: &CurveSpec, opts: &LiftOptions) -> Result<LiftTrajectory> {
    spec.check(q0)?;
    if curve.dim() != spec.dim() {
        return Err(Error::dims(format!("curve lives in d={}, arm in d={}", curve.dim(), spec.dim())));
    }
    if !(opts.h > 0.0 && opts.h.is_finite()) {
        return Err(Error::invalid("step h must be positive and finite"));
    }
    let start_gap = (eval_arm(spec, q0)? - curve.start()).norm();
    if start_gap > opts.start_tolerance {
        return Err(Error::invalid(format!(
            "f(q0) misses the curve start by {start_gap:.3e} (allowed {:.1e})",
            opts.start_tolerance
        )));
    }

    let deficient = structurally_deficient(spec);
    let crossing = if deficient {
        check_on_image_sphere(spec, curve, opts.h)?;
        None
    } else {
        first_critical_crossing(spec, curve, opts.h, opts.critical_margin * spec.total_length())
    };
    let threshold = singular_threshold(spec);

    let snap = |k: usize| opts.snapshot_every > 0 && k.is_multiple_of(opts.snapshot_every);
    let mut traj = LiftTrajectory {
        times: vec![0.0],
        configs: vec![q0.clone()],
        diagnostics: vec![diagnostics(spec, q0, &curve.start(), snap(0))?],
        tolerance: opts.tolerance,
    };

    let near_critical = |traj: LiftTrajectory, det: f64, distance: f64| Error::NearCritical {
        det,
        distance,
        partial: Some(Box::new(traj)),
    };

    let mut state = State::from_config(q0);
    let mut step = 0usize;
    for piece in curve.pieces() {
        let grid = piece_grid(piece, opts.h);
        for w in grid.windows(2) {
            let (t, t_next) = (w[0], w[1]);
            let det_now = traj.diagnostics.last().map_or(0.0, |d| d.det_gram);
            if let Some((t_cross, distance)) = crossing {
                if t >= t_cross {
                    return Err(near_critical(traj, det_now, distance));
                }
            }
            if !deficient && det_now < threshold {
                let b = eval_arm(spec, traj.final_config())?;
                let distance = distance_to_critical(spec, &b);
                return Err(near_critical(traj, det_now, distance));
            }
            state = match rk4_step(spec, &state, piece, t, t_next - t) {
                Ok(s) => s,
                Err(Error::NearCritical { det, distance, .. }) => return Err(near_critical(traj, det, distance)),
                Err(e) => return Err(e),
            };
            step += 1;
            let z = state.config();
            let diag = diagnostics(spec, &z, &piece.position(t_next), snap(step))?;
            let error = diag.tracking_error;
            traj.times.push(t_next);
            traj.configs.push(z);
            traj.diagnostics.push(diag);
            if !(error <= opts.divergence) {
                return Err(Error::TrackingDiverged {
                    error,
                    limit: opts.divergence,
                    t: t_next,
                    partial: Some(Box::new(traj)),
                });
            }
        }
    }
    Ok(traj)
}

/// Newton projection of `z` onto the fiber `f = b` along horizontal directions.
pub fn project_to_fiber(spec: &ArmSpec, z: &Configuration, b: &DVector<f64>) -> Result<Configuration> {
    spec.check(z)?;
    if b.len() != spec.dim() {
        return Err(Error::dims("target point has the wrong dimension"));
    }
    let tol = 1e-14 * spec.total_length().max(1.0);
    let mut state = State::from_config(z);
    for _ in 0..60 {
        let cur = state.config();
        let residual = b - eval_arm(spec, &cur)?;
        if residual.norm() <= tol {
            return Ok(cur);
        }
        let delta = field(spec, &state, &residual)?;
        state = state.advance(spec.lengths(), &[(&delta, 1.0)]);
    }
    let cur = state.config();
    let residual = (b - eval_arm(spec, &cur)?).norm();
    if residual <= 1e3 * tol {
        return Ok(cur);
    }
    Err(Error::invalid(format!("projection onto the fiber did not converge (residual {residual:.3e})")))
}

/// Orthonormal basis of `ker Df` for a planar configuration, as columns.
pub fn kernel_basis(spec: &ArmSpec, q: &[f64]) -> DMatrix<f64> {
    let df = crate::arm::angle_jacobian(spec.lengths(), q);
    let m = q.len();
    let svd = df.transpose().svd(true, false);
    let u = svd.u.expect("requested U");
    let top = svd.singular_values.max().max(f64::MIN_POSITIVE);
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-12 * top).count();
    // Columns of U beyond the rank span the complement of the row space of Df.
    let mut full = u;
    if full.ncols() < m {
        full = complete_basis(&full, m);
    }
    full.columns(rank, m - rank).into_owned()
}

fn complete_basis(u: &DMatrix<f64>, m: usize) -> DMatrix<f64> {
    let mut cols: Vec<DVector<f64>> = u.column_iter().map(|c| c.into_owned()).collect();
    for k in 0..m {
        if cols.len() == m {
            break;
        }
        let mut e = DVector::zeros(m);
        e[k] = 1.0;
        for c in &cols {
            let p = c.dot(&e);
            e -= c * p;
        }
        let n = e.norm();
        if n > 1e-8 {
            cols.push(e / n);
        }
    }
    DMatrix::from_columns(&cols)
}
