//! Real-time steering: a planar arm follows a moving target by lifting each
//! tick's straight target increment horizontally.
//!
//! The commanded point moves toward the target at no more than the speed cap
//! and is kept out of a band of width `margin` around every critical radius,
//! so the lift never meets a singular configuration.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::arm::{critical_radii, eval_arm, gram, is_aligned, ArmSpec, Configuration};
use crate::error::{Error, Result};
use crate::holonomy::{alignment, Alignment};
use crate::lift::{lift_path, singular_threshold, CurveSpec, LiftOptions};
use crate::moebius::invariants::{invariant_report, InvariantReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SessionSettings {
    /// Largest speed of the commanded point, units per second.
    pub speed_cap: f64,
    /// Half-width of the forbidden band around each critical radius.
    pub margin: f64,
    /// Ticks per second.
    pub tick_rate: f64,
    /// Integration step bound.
    pub h: f64,
    pub tolerance: f64,
    /// Distance from the baseline point accepted by a holonomy snapshot.
    pub basepoint_eps: f64,
    /// Loop history cap (points kept).
    pub history_cap: usize,
}

impl Default for SessionSettings {
    fn default() -> Self {
        SessionSettings {
            speed_cap: 1.0,
            margin: 0.05,
            tick_rate: 30.0,
            h: 1e-3,
            tolerance: 1e-6,
            basepoint_eps: 1e-3,
            history_cap: 5000,
        }
    }
}

/// Session state after a tick. The service sends it tagged `"type": "state"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateFrame {
    pub id: String,
    pub t: f64,
    pub q: Vec<f64>,
    pub effector: [f64; 2],
    pub target: [f64; 2],
    pub det_p: f64,
    /// `Σ q_j` when all segments have one length.
    pub rho: Option<f64>,
    pub invariants: InvariantReport,
    pub tracking_error: f64,
    pub clamped: bool,
    pub degraded: bool,
    pub critical_radii: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolonomySnapshot {
    pub baseline: Configuration,
    pub current: Configuration,
    pub displacement: Vec<f64>,
    pub norm: f64,
    /// Relation of the displacement to `grad ρ_b`, equal-length arms with `m ≥ 3`.
    pub alignment: Option<Alignment>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub spec: ArmSpec,
    pub config: Configuration,
    pub baseline: Configuration,
    /// Where the human wants the end-effector.
    pub target: [f64; 2],
    /// Where the integrated path currently is.
    pub commanded: [f64; 2],
    pub t: f64,
    pub settings: SessionSettings,
    pub history: Vec<[f64; 2]>,
    pub clamped: bool,
    pub degraded: bool,
    pub tracking_error: f64,
}

fn pair(v: &DVector<f64>) -> [f64; 2] {
    [v[0], v[1]]
}

fn equal_lengths(spec: &ArmSpec) -> bool {
    spec.sharp() == 1 && spec.zero_segments().is_empty()
}

impl Session {
    pub fn create(id: impl Into<String>, spec: ArmSpec, q0: Configuration, settings: SessionSettings) -> Result<Self> {
        spec.require_planar()?;
        spec.check(&q0)?;
        if !(settings.speed_cap > 0.0 && settings.tick_rate >= 0.0 && settings.margin >= 0.0 && settings.h > 0.0) {
            return Err(Error::invalid("speed cap and step must be positive, margin and tick rate non-negative"));
        }
        let p = gram(&spec, &q0)?;
        if is_aligned(&q0, 1e-9) || p.det < singular_threshold(&spec) {
            let b = eval_arm(&spec, &q0)?;
            return Err(Error::NearCritical {
                det: p.det,
                distance: crate::arm::distance_to_critical(&spec, &b),
                partial: None,
            });
        }
        let e = pair(&eval_arm(&spec, &q0)?);
        Ok(Session {
            id: id.into(),
            spec,
            baseline: q0.clone(),
            config: q0,
            target: e,
            commanded: e,
            t: 0.0,
            settings,
            history: vec![e],
            clamped: false,
            degraded: false,
            tracking_error: 0.0,
        })
    }

    pub fn effector(&self) -> [f64; 2] {
        pair(&eval_arm(&self.spec, &self.config).expect("session configuration matches its arm"))
    }

    pub fn set_target(&mut self, point: [f64; 2]) -> Result<()> {
        if !(point[0].is_finite() && point[1].is_finite()) {
            return Err(Error::invalid("target must be finite"));
        }
        self.target = point;
        Ok(())
    }

    pub fn set_tick_rate(&mut self, hz: f64) -> Result<()> {
        if !(hz >= 0.0 && hz.is_finite()) {
            return Err(Error::invalid("tick rate must be a finite number >= 0"));
        }
        self.settings.tick_rate = hz;
        Ok(())
    }

    /// Make the current configuration the holonomy baseline.
    pub fn reset_baseline(&mut self) {
        self.baseline = self.config.clone();
    }

    /// Radius range the commanded point may occupy starting from radius `r`.
    fn admissible(&self, r: f64) -> (f64, f64) {
        let radii = critical_radii(&self.spec);
        let below = radii.iter().copied().filter(|c| *c <= r).fold(f64::NEG_INFINITY, f64::max);
        let above = radii.iter().copied().filter(|c| *c > r).fold(f64::INFINITY, f64::min);
        let m = self.settings.margin;
        let (mut lo, mut hi) = (below + m, above - m);
        if lo > hi {
            let mid = 0.5 * (below + above);
            lo = mid;
            hi = mid;
        }
        (lo.min(r), hi.max(r))
    }

    /// Next commanded point: capped speed, then radial clamp.
    fn next_point(&self, dt: f64) -> ([f64; 2], bool) {
        let cur = DVector::from_row_slice(&self.commanded);
        let goal = DVector::from_row_slice(&self.target);
        let gap = &goal - &cur;
        let reach = self.settings.speed_cap * dt;
        let len = gap.norm();
        let mut next = if len > reach { &cur + gap * (reach / len) } else { goal };
        let (lo, hi) = self.admissible(cur.norm());
        let r = next.norm();
        let mut clamped = false;
        if r < lo || r > hi {
            let dir = if r > 0.0 { &next / r } else { &cur / cur.norm() };
            next = dir * r.clamp(lo, hi);
            clamped = true;
        }
        (pair(&next), clamped)
    }

    /// Advance by `dt` seconds and return the new state frame.
    pub fn tick(&mut self, dt: f64) -> Result<StateFrame> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::invalid("tick duration must be a finite number >= 0"));
        }
        let (next, clamped) = self.next_point(dt);
        self.clamped = clamped;
        let start = self.effector();
        let moved = (next[0] - start[0]).hypot(next[1] - start[1]) > 0.0;
        if dt > 0.0 && moved {
            let curve = CurveSpec::polyline(vec![start.to_vec(), next.to_vec()], vec![0.0, dt])?;
            let opts = LiftOptions {
                h: self.settings.h.min(dt),
                tolerance: self.settings.tolerance,
                snapshot_every: 0,
                ..LiftOptions::default()
            };
            match lift_path(&self.spec, &self.config, &curve, &opts) {
                Ok(traj) => {
                    self.config = traj.final_config().clone();
                    self.commanded = next;
                    self.tracking_error = traj.final_tracking_error();
                    self.degraded = traj.degraded();
                }
                Err(e @ (Error::NearCritical { .. } | Error::TrackingDiverged { .. })) => {
                    if let Some(partial) = e.partial_trajectory() {
                        self.config = partial.final_config().clone();
                    }
                    self.commanded = self.effector();
                    self.degraded = true;
                    self.clamped = true;
                }
                Err(e) => return Err(e),
            }
        }
        self.t += dt;
        let e = self.effector();
        if self.history.last() != Some(&e) {
            self.history.push(e);
            if self.history.len() > self.settings.history_cap {
                let excess = self.history.len() - self.settings.history_cap;
                self.history.drain(..excess);
            }
        }
        self.state()
    }

    pub fn state(&self) -> Result<StateFrame> {
        let q = self.config.planar_angles()?.to_vec();
        Ok(StateFrame {
            id: self.id.clone(),
            t: self.t,
            rho: equal_lengths(&self.spec).then(|| q.iter().sum()),
            q,
            effector: self.effector(),
            target: self.target,
            det_p: gram(&self.spec, &self.config)?.det,
            invariants: invariant_report(&self.spec, &self.config)?,
            tracking_error: self.tracking_error,
            clamped: self.clamped,
            degraded: self.degraded,
            critical_radii: critical_radii(&self.spec),
        })
    }

    /// Displacement from the baseline once the end-effector is back at the
    /// baseline point.
    pub fn holonomy_snapshot(&self) -> Result<HolonomySnapshot> {
        let base = eval_arm(&self.spec, &self.baseline)?;
        let here = eval_arm(&self.spec, &self.config)?;
        let distance = (&here - &base).norm();
        if distance > self.settings.basepoint_eps {
            return Err(Error::NotAtBasepoint { distance });
        }
        let q0 = self.baseline.planar_angles()?;
        let q1 = self.config.planar_angles()?;
        let d = DVector::from_fn(q0.len(), |j, _| q1[j] - q0[j]);
        let alignment = if equal_lengths(&self.spec) && q0.len() >= 3 && d.norm() > 0.0 {
            alignment(&self.spec, q0, &d).ok()
        } else {
            None
        };
        Ok(HolonomySnapshot {
            baseline: self.baseline.clone(),
            current: self.config.clone(),
            norm: d.norm(),
            displacement: d.iter().copied().collect(),
            alignment,
        })
    }
}
